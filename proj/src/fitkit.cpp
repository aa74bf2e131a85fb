#include "omx/fitkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace omx {

namespace {

std::vector<double> ones(std::size_t n)
{
    return std::vector<double>(n, 1.0);
}

double median(std::vector<double> v)
{
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

std::vector<double> trace_samples(const SpectrumTrace& trace)
{
    return trace.is_complex() ? trace.magnitude() : trace.real_part();
}

// Affine map of a trace onto [-1, 1] x O(1) so Lorentzian/Fano fits are
// well conditioned regardless of the physical units.
struct Normalization {
    double x0, sx, y0, sy;
    std::vector<double> u, v;

    explicit Normalization(const SpectrumTrace& trace)
    {
        if (trace.size() < 5) throw std::invalid_argument("resonance fit needs at least 5 samples");
        const auto& x = trace.freq();
        const auto y = trace_samples(trace);
        x0 = 0.5 * (x.front() + x.back());
        sx = 0.5 * (x.back() - x.front());
        y0 = median(y);
        sy = 0.0;
        for (double yi : y) sy = std::max(sy, std::abs(yi - y0));
        if (sy == 0.0) sy = 1.0;
        u.resize(x.size());
        v.resize(y.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            u[k] = (x[k] - x0) / sx;
            v[k] = (y[k] - y0) / sy;
        }
    }
};

struct ResonanceGuess {
    double center, fwhm, amplitude, offset;
};

// Extremum, half-maximum crossings and median offset on normalized data.
ResonanceGuess auto_initialize(const Normalization& nz)
{
    const double offset = median(nz.v);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < nz.v.size(); ++k) {
        if (std::abs(nz.v[k] - offset) > std::abs(nz.v[peak] - offset)) peak = k;
    }
    const double amplitude = nz.v[peak] - offset;
    double fwhm = 0.1 * (nz.u.back() - nz.u.front());
    if (auto w = feature_fwhm(nz.u, nz.v, offset); w && *w > 0.0) fwhm = *w;
    return {nz.u[peak], fwhm, amplitude, offset};
}

void rescale_covariance(FitResult& fit, const std::vector<double>& factors)
{
    for (std::size_t k = 0; k < factors.size(); ++k) fit.values[static_cast<Eigen::Index>(k)] *= factors[k];
    if (fit.covariance.rows() == 0) return;
    for (Eigen::Index a = 0; a < fit.covariance.rows(); ++a) {
        for (Eigen::Index b = 0; b < fit.covariance.cols(); ++b) {
            fit.covariance(a, b) *= factors[static_cast<std::size_t>(a)] * factors[static_cast<std::size_t>(b)];
        }
    }
}

// (q, A, B) and (-1/q, -A q^2, B + A (1 + q^2)) give the same curve.
// Report the branch with |q| <= 1, which is finite for every line shape.
void canonicalize_fano(FitResult& fit)
{
    const double q = fit.values[2];
    const double a = fit.values[3];
    if (!(std::abs(q) > 1.0)) return;
    Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Identity();
    j(2, 2) = 1.0 / (q * q);
    j(3, 2) = -2.0 * a * q;
    j(3, 3) = -q * q;
    j(4, 2) = 2.0 * a * q;
    j(4, 3) = 1.0 + q * q;
    fit.values[2] = -1.0 / q;
    fit.values[3] = -a * q * q;
    fit.values[4] += a * (1.0 + q * q);
    if (fit.covariance.rows() == 5) fit.covariance = j * fit.covariance * j.transpose();
}

} // namespace

FitResult fit_curve(const CurveModel& model, const CurveFitInput& data, std::span<const double> initial,
                    std::span<const double> scale, std::span<const double> lower, std::span<const double> upper,
                    const SolverOptions& options)
{
    const std::size_t np = model.size();
    const std::size_t m = data.x.size();
    if (data.y.size() != m || (!data.sigma.empty() && data.sigma.size() != m)) {
        throw std::invalid_argument("fit data lengths differ");
    }
    if (initial.size() != np) throw std::invalid_argument("initial guess has the wrong size");
    const std::vector<double> s = scale.empty() ? ones(np) : std::vector<double>(scale.begin(), scale.end());
    if (s.size() != np) throw std::invalid_argument("parameter scale has the wrong size");

    LeastSquaresProblem problem;
    problem.names = model.names();
    problem.residual_count = m;
    problem.residuals = [&model, &data, s, np, m](const Eigen::VectorXd& u, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        std::vector<double> p(np);
        for (std::size_t k = 0; k < np; ++k) p[k] = u[static_cast<Eigen::Index>(k)] * s[k];
        std::vector<double> grad(np);
        r.resize(static_cast<Eigen::Index>(m));
        if (jac) jac->resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(np));
        for (std::size_t i = 0; i < m; ++i) {
            const double w = data.sigma.empty() ? 1.0 : 1.0 / data.sigma[i];
            const auto row = static_cast<Eigen::Index>(i);
            r[row] = w * (model.value(p, data.x[i]) - data.y[i]);
            if (jac) {
                model.gradient(p, data.x[i], grad);
                for (std::size_t k = 0; k < np; ++k) (*jac)(row, static_cast<Eigen::Index>(k)) = w * grad[k] * s[k];
            }
        }
    };
    auto scaled_bounds = [&](std::span<const double> b) {
        Eigen::VectorXd out;
        if (b.empty()) return out;
        if (b.size() != np) throw std::invalid_argument("bounds have the wrong size");
        out.resize(static_cast<Eigen::Index>(np));
        for (std::size_t k = 0; k < np; ++k) out[static_cast<Eigen::Index>(k)] = b[k] / s[k];
        return out;
    };
    problem.lower = scaled_bounds(lower);
    problem.upper = scaled_bounds(upper);

    Eigen::VectorXd u0(static_cast<Eigen::Index>(np));
    for (std::size_t k = 0; k < np; ++k) u0[static_cast<Eigen::Index>(k)] = initial[k] / s[k];
    FitResult fit = solve_least_squares(problem, u0, options);
    rescale_covariance(fit, s);
    return fit;
}

FitResult fit_lorentzian(const SpectrumTrace& trace, std::optional<std::vector<double>> initial,
                         const SolverOptions& options)
{
    const Normalization nz(trace);
    std::array<double, 4> guess{};
    if (initial) {
        if (initial->size() != 4) throw std::invalid_argument("Lorentzian guess needs {center, fwhm, area, offset}");
        const auto& g = *initial;
        guess = {(g[0] - nz.x0) / nz.sx, g[1] / nz.sx, g[2] / (nz.sx * nz.sy), (g[3] - nz.y0) / nz.sy};
    } else {
        const auto g = auto_initialize(nz);
        guess = {g.center, g.fwhm, g.amplitude * std::numbers::pi * g.fwhm / 2.0, g.offset};
    }
    const double inf = std::numeric_limits<double>::infinity();
    const std::array<double, 4> lower{-inf, 1e-12, -inf, -inf};
    FitResult fit = fit_curve(LorentzianModel{}, {nz.u, nz.v, {}}, guess, {}, lower, {}, options);

    // back to physical units
    rescale_covariance(fit, {nz.sx, nz.sx, nz.sx * nz.sy, nz.sy});
    fit.values[0] += nz.x0;
    fit.values[3] += nz.y0;
    return fit;
}

FitResult fit_fano(const SpectrumTrace& trace, std::optional<std::vector<double>> initial, const SolverOptions& options)
{
    const Normalization nz(trace);
    std::array<double, 5> guess{};
    if (initial) {
        if (initial->size() != 5) {
            throw std::invalid_argument("Fano guess needs {center, width, q, amplitude, offset}");
        }
        const auto& g = *initial;
        guess = {(g[0] - nz.x0) / nz.sx, g[1] / nz.sx, g[2], g[3] / nz.sy, (g[4] - nz.y0) / nz.sy};
    } else {
        const auto g = auto_initialize(nz);
        // Amplitude and offset are linear for fixed (center, width, q): scan q.
        double best_sse = std::numeric_limits<double>::infinity();
        const FanoModel model;
        for (double q : {-1.0, -0.7, -0.4, -0.2, -0.1, 0.0, 0.1, 0.2, 0.4, 0.7, 1.0}) {
            Eigen::MatrixXd basis(static_cast<Eigen::Index>(nz.u.size()), 2);
            Eigen::VectorXd target(static_cast<Eigen::Index>(nz.u.size()));
            for (std::size_t k = 0; k < nz.u.size(); ++k) {
                const std::array<double, 5> p{g.center, g.fwhm, q, 1.0, 0.0};
                basis(static_cast<Eigen::Index>(k), 0) = model.value(p, nz.u[k]);
                basis(static_cast<Eigen::Index>(k), 1) = 1.0;
                target[static_cast<Eigen::Index>(k)] = nz.v[k];
            }
            const Eigen::Vector2d coef = basis.colPivHouseholderQr().solve(target);
            const double sse = (basis * coef - target).squaredNorm();
            if (sse < best_sse) {
                best_sse = sse;
                guess = {g.center, g.fwhm, q, coef[0], coef[1]};
            }
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    const std::array<double, 5> lower{-inf, 1e-12, -inf, -inf, -inf};
    FitResult fit = fit_curve(FanoModel{}, {nz.u, nz.v, {}}, guess, {}, lower, {}, options);

    rescale_covariance(fit, {nz.sx, nz.sx, 1.0, nz.sy, nz.sy});
    fit.values[0] += nz.x0;
    fit.values[4] += nz.y0;
    canonicalize_fano(fit);
    return fit;
}

double lorentzian_peak(const FitResult& fit)
{
    return 2.0 * fit.value("area") / (std::numbers::pi * fit.value("fwhm"));
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma)
{
    const std::size_t m = x.size();
    if (y.size() != m || (!sigma.empty() && sigma.size() != m)) {
        throw std::invalid_argument("linear fit data lengths differ");
    }
    if (m < 2) throw std::invalid_argument("linear fit needs at least 2 points");
    auto weight = [&](std::size_t i) { return sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]); };

    double sw = 0.0, swx = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sw += weight(i);
        swx += weight(i) * x[i];
        swy += weight(i) * y[i];
    }
    const double xbar = swx / sw;
    const double ybar = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += weight(i) * (x[i] - xbar) * (x[i] - xbar);
        sxy += weight(i) * (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear fit needs at least two distinct abscissae");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    for (std::size_t i = 0; i < m; ++i) {
        const double res = y[i] - fit.intercept - fit.slope * x[i];
        fit.chi2 += weight(i) * res * res;
    }
    const double scale = sigma.empty() ? (m > 2 ? fit.chi2 / static_cast<double>(m - 2) : 0.0) : 1.0;
    fit.var_slope = scale / sxx;
    fit.var_intercept = scale * (1.0 / sw + xbar * xbar / sxx);
    fit.cov = -scale * xbar / sxx;
    return fit;
}

FitResult fit_g0_from_linewidths(std::span<const LinewidthPoint> points, double kappa, double gamma_0, Branch branch,
                                 bool fix_intercept)
{
    if (points.size() < 2) throw std::invalid_argument("g0 fit needs at least 2 points");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    std::vector<double> x, y, sigma;
    const bool have_sigma = std::all_of(points.begin(), points.end(), [](const auto& p) { return p.sigma > 0.0; });
    for (const auto& p : points) {
        x.push_back(p.n_c);
        y.push_back(p.gamma_m);
        if (have_sigma) sigma.push_back(p.sigma);
    }

    double intercept = gamma_0, slope = 0.0, var_a = 0.0, var_b = 0.0, cov_ab = 0.0;
    if (fix_intercept) {
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double w = have_sigma ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
            sxx += w * x[i] * x[i];
            sxy += w * x[i] * (y[i] - gamma_0);
        }
        if (sxx == 0.0) throw std::invalid_argument("g0 fit needs a non-zero photon number");
        slope = sxy / sxx;
        double chi2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double w = have_sigma ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
            const double res = y[i] - gamma_0 - slope * x[i];
            chi2 += w * res * res;
        }
        const double scale = have_sigma ? 1.0 : chi2 / static_cast<double>(x.size() - 1);
        var_b = scale / sxx;
    } else {
        const auto lin = weighted_linear_fit(x, y, sigma);
        intercept = lin.intercept;
        slope = lin.slope;
        var_a = lin.var_intercept;
        var_b = lin.var_slope;
        cov_ab = lin.cov;
    }
    if ((branch == Branch::red && !(slope > 0.0)) || (branch == Branch::blue && !(slope < 0.0))) {
        throw std::invalid_argument(branch == Branch::red
                                        ? "red-detuned linewidths must increase with n_c"
                                        : "blue-detuned linewidths must decrease with n_c");
    }

    const double g0 = std::sqrt(std::abs(slope) * kappa / 4.0);
    const double dg0 = (slope > 0 ? 1.0 : -1.0) * kappa / (8.0 * g0);
    FitResult fit;
    fit.names = {"g0", "gamma_0", "slope"};
    fit.values = Eigen::Vector3d(g0, intercept, slope);
    fit.covariance.resize(3, 3);
    fit.covariance << dg0 * dg0 * var_b, dg0 * cov_ab, dg0 * var_b, //
        dg0 * cov_ab, var_a, cov_ab,                                 //
        dg0 * var_b, cov_ab, var_b;
    fit.converged = true;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = have_sigma ? 1.0 / sigma[i] : 1.0;
        const double res = w * (y[i] - intercept - slope * x[i]);
        rss += res * res;
    }
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

FitResult fit_heating_params(std::span<const OccupancyPoint> points, const Device& device,
                             std::optional<double> fixed_n_th0, const SolverOptions& options)
{
    const HeatingCurveModel model(device, fixed_n_th0);
    const std::size_t np = model.size();
    if (points.size() < std::max<std::size_t>(4, np)) {
        throw std::invalid_argument("heating fit needs at least 4 points and one per parameter");
    }
    std::vector<double> x, y, sigma;
    const bool have_sigma = std::all_of(points.begin(), points.end(), [](const auto& p) { return p.sigma > 0.0; });
    for (const auto& p : points) {
        x.push_back(p.n_c);
        y.push_back(p.n_m);
        if (have_sigma) sigma.push_back(p.sigma);
    }

    // Linear in everything but beta_sat: scan beta_sat, solve the rest.
    const double c1 = cooperativity(device, 1.0);
    const auto m = static_cast<Eigen::Index>(x.size());
    std::vector<double> best(np, 0.0);
    double best_sse = std::numeric_limits<double>::infinity();
    for (double beta : logspace(1e-5, 10.0, 61)) {
        const Eigen::Index cols = fixed_n_th0 ? 2 : 3;
        Eigen::MatrixXd basis(m, cols);
        Eigen::VectorXd target(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double n = x[static_cast<std::size_t>(i)];
            const double w = have_sigma ? 1.0 / sigma[static_cast<std::size_t>(i)] : 1.0;
            const double cool = 1.0 / (1.0 + c1 * n);
            Eigen::Index c = 0;
            if (!fixed_n_th0) basis(i, c++) = w * cool;
            basis(i, c++) = w * n / (1.0 + beta * n) * cool;
            basis(i, c) = w * n * cool;
            target[i] = w * (y[static_cast<std::size_t>(i)] - (fixed_n_th0 ? *fixed_n_th0 * cool : 0.0));
        }
        Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(target).cwiseMax(0.0);
        const double sse = (basis * coef - target).squaredNorm();
        if (sse < best_sse) {
            best_sse = sse;
            std::size_t k = 0;
            Eigen::Index c = 0;
            if (!fixed_n_th0) best[k++] = coef[c++];
            best[k++] = coef[c++];
            best[k++] = beta;
            best[k] = coef[c];
        }
    }

    std::vector<double> scale(np), lower(np, 0.0);
    for (std::size_t k = 0; k < np; ++k) scale[k] = best[k] > 0.0 ? best[k] : 1e-3;
    return fit_curve(model, {x, y, sigma}, best, scale, lower, {}, options);
}

HeatingParams heating_params_from(const FitResult& fit, std::optional<double> fixed_n_th0)
{
    HeatingParams h;
    h.n_th0 = fixed_n_th0 ? *fixed_n_th0 : fit.value("n_th0");
    h.alpha_sat = fit.value("alpha_sat");
    h.beta_sat = fit.value("beta_sat");
    h.alpha_lin = fit.value("alpha_lin");
    return h;
}

} // namespace omx
