#pragma once

#include "omx/om_core.hpp"

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace omx {

enum class TraceKind { omit_reflection, psd, generic };

// Sampled response on a strictly increasing angular-frequency grid.
// Real traces store zero imaginary parts and report is_complex() == false.
class SpectrumTrace {
public:
    static SpectrumTrace real(TraceKind kind, std::vector<double> freq, std::span<const double> values);
    static SpectrumTrace complex(TraceKind kind, std::vector<double> freq,
                                 std::vector<std::complex<double>> values);

    TraceKind kind() const { return kind_; }
    bool is_complex() const { return complex_; }
    std::size_t size() const { return freq_.size(); }
    const std::vector<double>& freq() const { return freq_; }
    const std::vector<std::complex<double>>& values() const { return values_; }

    std::vector<double> magnitude() const;
    std::vector<double> real_part() const;

private:
    SpectrumTrace(TraceKind kind, bool is_complex, std::vector<double> freq,
                  std::vector<std::complex<double>> values);

    TraceKind kind_;
    bool complex_;
    std::vector<double> freq_;
    std::vector<std::complex<double>> values_;
};

enum class OmitModel {
    rotating_wave, // single resonant sideband (beam-splitter / two-mode-squeezing term only)
    full,          // both pump sidebands and both mechanical branches
};

// Reflection seen by a weak probe at pump + probe_freq.
std::complex<double> omit_response(const Device& device, double n_c, double detuning, double probe_freq,
                                   OmitModel model = OmitModel::rotating_wave);

SpectrumTrace omit_reflection(const Device& device, double n_c, double detuning, std::span<const double> probe_grid,
                              OmitModel model = OmitModel::rotating_wave);

// |r| over a detuning x probe grid, row-major in detuning. The serial version
// is the reference; the OpenMP version must agree bit for bit.
std::vector<double> omit_map_serial(const Device& device, double n_c, std::span<const double> detunings,
                                    std::span<const double> probe_grid);
std::vector<double> omit_map(const Device& device, double n_c, std::span<const double> detunings,
                             std::span<const double> probe_grid, int num_threads = 0);

struct NormalModes {
    std::array<std::complex<double>, 2> eigenvalues; // Re = -decay/2, Im = frequency
    double splitting = 0.0;                          // |Im l+ - Im l-|
    bool above_threshold = false;                    // g > |kappa - gamma_0| / 4
    double coupling = 0.0;                           // g

    double two_g() const { return 2.0 * coupling; }
};

NormalModes normal_modes(const Device& device, double n_c, double detuning);

// Distance between the two most prominent local minima of |values|, with
// three-point quadratic refinement. Empty when fewer than two minima qualify.
std::optional<double> extract_splitting(const SpectrumTrace& trace, double min_relative_prominence = 1e-3);

// Full width at half maximum of the dominant feature of (values - baseline),
// linear interpolation at the crossings. Empty if either crossing is missing.
std::optional<double> feature_fwhm(std::span<const double> freq, std::span<const double> values, double baseline);

struct LorentzianComponent {
    double center;
    double fwhm;
    double area;

    void validate() const;
    double density(double omega) const;
    double peak() const;
};

SpectrumTrace psd_model(std::span<const LorentzianComponent> components, double offset, std::span<const double> grid);

struct OccupancyAnchor {
    double mech_area_ref;
    double cal_area_ref;
    double n_ref;
};

// Gain-ratio thermometry against a reference point of known occupancy.
double occupancy_from_areas(double mech_area, double cal_area, const OccupancyAnchor& anchor);

std::vector<double> linspace(double first, double last, std::size_t count);
std::vector<double> logspace(double first, double last, std::size_t count);

} // namespace omx
