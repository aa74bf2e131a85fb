#include "omx/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omx {

using cplx = std::complex<double>;

SpectrumTrace::SpectrumTrace(TraceKind kind, bool is_complex, std::vector<double> freq, std::vector<cplx> values)
    : kind_(kind), complex_(is_complex), freq_(std::move(freq)), values_(std::move(values))
{
    if (freq_.size() != values_.size()) {
        throw std::invalid_argument("trace frequency and value lengths differ");
    }
    for (std::size_t i = 1; i < freq_.size(); ++i) {
        if (!(freq_[i] > freq_[i - 1])) throw std::invalid_argument("trace frequencies must be strictly increasing");
    }
}

SpectrumTrace SpectrumTrace::real(TraceKind kind, std::vector<double> freq, std::span<const double> values)
{
    std::vector<cplx> v(values.begin(), values.end());
    return SpectrumTrace(kind, false, std::move(freq), std::move(v));
}

SpectrumTrace SpectrumTrace::complex(TraceKind kind, std::vector<double> freq, std::vector<cplx> values)
{
    return SpectrumTrace(kind, true, std::move(freq), std::move(values));
}

std::vector<double> SpectrumTrace::magnitude() const
{
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](cplx v) { return std::abs(v); });
    return out;
}

std::vector<double> SpectrumTrace::real_part() const
{
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](cplx v) { return v.real(); });
    return out;
}

cplx omit_response(const Device& device, double n_c, double detuning, double probe_freq, OmitModel model)
{
    if (!(n_c >= 0.0)) throw std::invalid_argument("n_c must be non-negative");
    constexpr cplx i{0.0, 1.0};
    const double half_kappa = 0.5 * device.optical().kappa();
    const double kappa_e = device.optical().kappa_e();
    const double half_gamma = 0.5 * device.mechanical().gamma_0();
    const double omega_m = device.mechanical().omega_m();
    const double g2 = device.g0() * device.g0() * n_c;

    const cplx chi_o = 1.0 / (half_kappa - i * (detuning + probe_freq));
    // mechanical annihilation and creation branches
    const cplx chi_m = 1.0 / (half_gamma - i * (probe_freq - omega_m));
    const cplx chi_m_conj = 1.0 / (half_gamma - i * (probe_freq + omega_m));

    if (model == OmitModel::rotating_wave) {
        if (detuning <= 0.0) return 1.0 - kappa_e * chi_o / (1.0 + g2 * chi_o * chi_m);
        return 1.0 - kappa_e * chi_o / (1.0 - g2 * chi_o * chi_m_conj);
    }
    const cplx chi_o_mirror = 1.0 / (half_kappa - i * (probe_freq - detuning));
    const cplx sigma = chi_m - chi_m_conj;
    return 1.0 - kappa_e * chi_o * (1.0 - g2 * sigma * chi_o_mirror) / (1.0 + g2 * sigma * (chi_o - chi_o_mirror));
}

SpectrumTrace omit_reflection(const Device& device, double n_c, double detuning, std::span<const double> probe_grid,
                              OmitModel model)
{
    std::vector<cplx> values;
    values.reserve(probe_grid.size());
    for (double omega : probe_grid) values.push_back(omit_response(device, n_c, detuning, omega, model));
    return SpectrumTrace::complex(TraceKind::omit_reflection, {probe_grid.begin(), probe_grid.end()},
                                  std::move(values));
}

NormalModes normal_modes(const Device& device, double n_c, double detuning)
{
    if (!(n_c >= 0.0)) throw std::invalid_argument("n_c must be non-negative");
    constexpr cplx i{0.0, 1.0};
    const double kappa = device.optical().kappa();
    const double gamma0 = device.mechanical().gamma_0();
    const double g = device.g0() * std::sqrt(n_c);

    // [[i detuning - kappa/2, -i g], [-i g, -i omega_m - gamma0/2]]
    const cplx a = i * detuning - 0.5 * kappa;
    const cplx d = -i * device.mechanical().omega_m() - 0.5 * gamma0;
    const cplx mean = 0.5 * (a + d);
    const cplx half_diff = 0.5 * (a - d);
    const cplx root = std::sqrt(half_diff * half_diff - g * g);

    NormalModes modes;
    modes.eigenvalues = {mean - root, mean + root};
    modes.splitting = std::abs(modes.eigenvalues[1].imag() - modes.eigenvalues[0].imag());
    modes.above_threshold = g > 0.25 * std::abs(kappa - gamma0);
    modes.coupling = g;
    return modes;
}

namespace {

double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2)
{
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den == 0.0) return x1;
    return x1 - 0.5 * num / den;
}

} // namespace

std::optional<double> extract_splitting(const SpectrumTrace& trace, double min_relative_prominence)
{
    if (trace.size() < 5) throw std::invalid_argument("splitting extraction needs at least 5 samples");
    const auto& x = trace.freq();
    std::vector<double> power(trace.size());
    std::transform(trace.values().begin(), trace.values().end(), power.begin(),
                   [](cplx v) { return std::norm(v); });

    const auto [lo_it, hi_it] = std::minmax_element(power.begin(), power.end());
    const double range = *hi_it - *lo_it;
    if (range <= 0.0) return std::nullopt;

    struct Minimum {
        std::size_t index;
        double prominence;
    };
    std::vector<Minimum> minima;
    const std::size_t n = power.size();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (!(power[k] < power[k - 1] && power[k] <= power[k + 1])) continue;
        double left_max = power[k];
        for (std::size_t j = k; j-- > 0;) {
            if (power[j] < power[k]) break;
            left_max = std::max(left_max, power[j]);
        }
        double right_max = power[k];
        for (std::size_t j = k + 1; j < n; ++j) {
            if (power[j] < power[k]) break;
            right_max = std::max(right_max, power[j]);
        }
        const double prominence = std::min(left_max, right_max) - power[k];
        if (prominence >= min_relative_prominence * range) minima.push_back({k, prominence});
    }
    if (minima.size() < 2) return std::nullopt;

    std::partial_sort(minima.begin(), minima.begin() + 2, minima.end(),
                      [](const Minimum& l, const Minimum& r) { return l.prominence > r.prominence; });
    auto refine = [&](std::size_t k) {
        return parabola_vertex(x[k - 1], power[k - 1], x[k], power[k], x[k + 1], power[k + 1]);
    };
    return std::abs(refine(minima[0].index) - refine(minima[1].index));
}

std::optional<double> feature_fwhm(std::span<const double> freq, std::span<const double> values, double baseline)
{
    if (freq.size() != values.size() || freq.size() < 3) {
        throw std::invalid_argument("feature width needs matching grids of at least 3 samples");
    }
    std::size_t peak = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (std::abs(values[k] - baseline) > std::abs(values[peak] - baseline)) peak = k;
    }
    const double half = 0.5 * std::abs(values[peak] - baseline);
    if (half == 0.0) return std::nullopt;
    auto excess = [&](std::size_t k) { return std::abs(values[k] - baseline) - half; };
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double t = excess(inside) / (excess(inside) - excess(outside));
        return freq[inside] + t * (freq[outside] - freq[inside]);
    };

    std::optional<double> left;
    for (std::size_t k = peak; k > 0; --k) {
        if (excess(k - 1) < 0.0) {
            left = crossing(k, k - 1);
            break;
        }
    }
    std::optional<double> right;
    for (std::size_t k = peak; k + 1 < values.size(); ++k) {
        if (excess(k + 1) < 0.0) {
            right = crossing(k, k + 1);
            break;
        }
    }
    if (!left || !right) return std::nullopt;
    return *right - *left;
}

void LorentzianComponent::validate() const
{
    if (!(fwhm > 0.0)) throw std::invalid_argument("Lorentzian fwhm must be positive");
    if (!(area >= 0.0)) throw std::invalid_argument("Lorentzian area must be non-negative");
}

double LorentzianComponent::density(double omega) const
{
    const double hw = 0.5 * fwhm;
    const double dx = omega - center;
    return area * hw / (std::numbers::pi * (dx * dx + hw * hw));
}

double LorentzianComponent::peak() const
{
    return 2.0 * area / (std::numbers::pi * fwhm);
}

SpectrumTrace psd_model(std::span<const LorentzianComponent> components, double offset, std::span<const double> grid)
{
    if (components.empty()) throw std::invalid_argument("PSD model needs at least one component");
    for (const auto& c : components) c.validate();
    std::vector<double> values(grid.size(), offset);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (const auto& c : components) values[k] += c.density(grid[k]);
    }
    return SpectrumTrace::real(TraceKind::psd, {grid.begin(), grid.end()}, values);
}

double occupancy_from_areas(double mech_area, double cal_area, const OccupancyAnchor& anchor)
{
    for (double a : {mech_area, cal_area, anchor.mech_area_ref, anchor.cal_area_ref}) {
        if (!(a > 0.0 && std::isfinite(a))) throw std::invalid_argument("spectral areas must be positive");
    }
    if (!(anchor.n_ref > 0.0)) throw std::invalid_argument("anchor occupancy must be positive");
    return anchor.n_ref * (mech_area / cal_area) / (anchor.mech_area_ref / anchor.cal_area_ref);
}

std::vector<double> linspace(double first, double last, std::size_t count)
{
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = first;
        return out;
    }
    const double step = (last - first) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) out[k] = first + step * static_cast<double>(k);
    if (count > 1) out.back() = last;
    return out;
}

std::vector<double> logspace(double first, double last, std::size_t count)
{
    if (!(first > 0.0 && last > 0.0)) throw std::invalid_argument("log grid bounds must be positive");
    auto exps = linspace(std::log(first), std::log(last), count);
    for (auto& e : exps) e = std::exp(e);
    if (count > 0) {
        exps.front() = first;
        exps.back() = last;
    }
    return exps;
}

} // namespace omx
