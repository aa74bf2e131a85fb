#pragma once

#include "omx/fit_models.hpp"
#include "omx/least_squares.hpp"
#include "omx/om_core.hpp"
#include "omx/spectra.hpp"

#include <optional>
#include <span>
#include <vector>

namespace omx {

struct CurveFitInput {
    std::span<const double> x;
    std::span<const double> y;
    std::span<const double> sigma; // empty = unit weights
};

// Weighted least squares of a CurveModel. `scale` (same length as the
// parameters, default ones) is the typical magnitude of each parameter;
// the solver works in p / scale.
FitResult fit_curve(const CurveModel& model, const CurveFitInput& data, std::span<const double> initial,
                    std::span<const double> scale = {}, std::span<const double> lower = {},
                    std::span<const double> upper = {}, const SolverOptions& options = {});

// Result parameters: {center, fwhm, area, offset} in the trace's units.
// Complex traces are fitted on |values|.
FitResult fit_lorentzian(const SpectrumTrace& trace, std::optional<std::vector<double>> initial = std::nullopt,
                         const SolverOptions& options = {});

// Result parameters: {center, width, q, amplitude, offset}. A curve with q
// also fits with -1/q (amplitude -A q^2); the branch with |q| <= 1 is reported.
FitResult fit_fano(const SpectrumTrace& trace, std::optional<std::vector<double>> initial = std::nullopt,
                   const SolverOptions& options = {});

// Peak height of a fitted Lorentzian above its offset (negative for dips).
double lorentzian_peak(const FitResult& fit);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double var_intercept = 0.0;
    double var_slope = 0.0;
    double cov = 0.0;
    double chi2 = 0.0;
};

// Weighted straight-line fit. With absolute sigmas the variances are the
// formal ones; with unit weights they are scaled by chi2 / (m - 2).
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> sigma = {});

enum class Branch { red, blue };

struct LinewidthPoint {
    double n_c;
    double gamma_m; // rad/s
    double sigma = 0.0; // rad/s, 0 = unknown
};

// Linear backaction fit gamma_m = gamma_0 +- (4 g0^2 / kappa) n_c.
// Result parameters: {g0, gamma_0, slope}. With fix_intercept the device
// gamma_0 is held and only the slope is fitted.
FitResult fit_g0_from_linewidths(std::span<const LinewidthPoint> points, double kappa, double gamma_0, Branch branch,
                                 bool fix_intercept = false);

struct OccupancyPoint {
    double n_c;
    double n_m;
    double sigma = 0.0;
};

// Heating-model fit. Parameters are {alpha_sat, beta_sat, alpha_lin}, with
// n_th0 prepended when it is not fixed. All parameters are bounded below by 0.
FitResult fit_heating_params(std::span<const OccupancyPoint> points, const Device& device,
                             std::optional<double> fixed_n_th0, const SolverOptions& options = {});

HeatingParams heating_params_from(const FitResult& fit, std::optional<double> fixed_n_th0);

} // namespace omx
