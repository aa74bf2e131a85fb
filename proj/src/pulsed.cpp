#include "omx/pulsed.hpp"

#include "omx/diagnostics.hpp"
#include "omx/fit_models.hpp"
#include "omx/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace omx {

void PulseTrain::validate() const
{
    if (!(tau > 0.0 && rep_rate > 0.0 && tau < 1.0 / rep_rate)) {
        throw std::invalid_argument("pulse train requires 0 < tau < 1 / rep_rate");
    }
    if (!(peak_power >= 0.0)) throw std::invalid_argument("peak power must be non-negative");
    if (n_pulses < 1) throw std::invalid_argument("pulse train needs at least one pulse");
}

double PulseTrain::detuning(const Device& device) const
{
    const double omega_m = device.mechanical().omega_m();
    return sideband == Sideband::red ? -omega_m : omega_m;
}

void DetectionChain::validate() const
{
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("detection efficiency must lie in [0, 1]");
    if (!(dark_rate >= 0.0)) throw std::invalid_argument("dark rate must be non-negative");
    if (!(window > 0.0)) throw std::invalid_argument("detection window must be positive");
}

void HeatingKernel::validate() const
{
    if (!(delta >= 0.0 && tau_th >= 0.0 && n_base >= 0.0)) {
        throw std::invalid_argument("heating kernel parameters must be non-negative");
    }
}

double scattering_probability(const Device& device, double n_c, double tau)
{
    if (!(n_c >= 0.0)) throw std::invalid_argument("n_c must be non-negative");
    if (!(tau >= 0.0)) throw std::invalid_argument("pulse length must be non-negative");
    const double g0 = device.g0();
    const double p_s = 4.0 * g0 * g0 * n_c * tau / device.optical().kappa();
    if (p_s > 0.2) {
        std::ostringstream msg;
        msg << "scattering probability " << p_s << " exceeds 0.2; the linear picture degrades";
        warn(msg.str());
    }
    return p_s;
}

PulseOccupancy steady_state_prepulse_occupancy(const HeatingKernel& kernel, double rep_rate)
{
    kernel.validate();
    if (!(rep_rate > 0.0)) throw std::invalid_argument("repetition rate must be positive");
    double before = kernel.n_base;
    if (kernel.tau_th > 0.0 && kernel.delta > 0.0) {
        // x / (1 - x) with x = exp(-1 / (R tau_th))
        const double keep = -std::expm1(-1.0 / (rep_rate * kernel.tau_th));
        before += kernel.delta * (1.0 - keep) / keep;
    }
    return {before, before + kernel.delta};
}

HeatingKernel fit_heating_kernel(std::span<const RateOccupancy> points, double n_base)
{
    std::set<double> rates;
    for (const auto& p : points) {
        if (!(p.rep_rate > 0.0)) throw std::invalid_argument("repetition rates must be positive");
        rates.insert(p.rep_rate);
    }
    if (rates.size() < 2) throw std::invalid_argument("kernel fit needs at least two distinct repetition rates");

    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(p.rep_rate);
        y.push_back(p.n_m);
    }

    // Occupancies span decades, so residuals are relative whenever every point is positive.
    std::vector<double> sigma;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v - n_base > 0.0; })) sigma = y;
    const auto weight = [&](std::size_t i) { return sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]); };

    // delta is linear for fixed tau_th: profile over a log grid first.
    const double tau_lo = 1e-3 / *rates.rbegin();
    const double tau_hi = 1e3 / *rates.begin();
    double best_sse = std::numeric_limits<double>::infinity();
    double best_tau = tau_lo, best_delta = 0.0;
    for (double tau : logspace(tau_lo, tau_hi, 1201)) {
        double sff = 0.0, sfy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double f = 1.0 / -std::expm1(-1.0 / (x[i] * tau));
            sff += weight(i) * f * f;
            sfy += weight(i) * f * (y[i] - n_base);
        }
        const double delta = std::max(0.0, sfy / sff);
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = n_base + delta / -std::expm1(-1.0 / (x[i] * tau)) - y[i];
            sse += weight(i) * r * r;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best_tau = tau;
            best_delta = delta;
        }
    }
    if (best_delta == 0.0) {
        return {.delta = 0.0, .tau_th = 0.0, .n_base = n_base};
    }

    const HeatingKernelModel model(n_base);
    const std::vector<double> initial{best_delta, best_tau};
    const std::vector<double> lower{0.0, 1e-6 * best_tau};
    const auto fit = fit_curve(model, {x, y, sigma}, initial, initial, lower);
    if (!fit.converged) throw NumericError("heating kernel fit did not converge: " + fit.message);
    return {.delta = fit.value("delta"), .tau_th = fit.value("tau_th"), .n_base = n_base};
}

AsymmetryResult estimate_occupancy(double counts_blue, double counts_red, double n_pulses_each,
                                   const DetectionChain& chain)
{
    chain.validate();
    if (!(counts_blue >= 0.0 && counts_red >= 0.0)) throw std::invalid_argument("counts must be non-negative");
    if (!(n_pulses_each > 0.0)) throw std::invalid_argument("pulse count must be positive");

    const double d = chain.dark_per_pulse();
    const double blue = counts_blue / n_pulses_each - d;
    double red = counts_red / n_pulses_each - d;
    if (!(blue > red)) throw std::domain_error("no resolvable asymmetry");

    AsymmetryResult out;
    out.counts_blue = counts_blue;
    out.counts_red = counts_red;
    out.dark_estimate = d * n_pulses_each;
    if (red < 0.0) {
        red = 0.0;
        out.clamped = true;
    }
    const double diff = blue - red;
    out.n_m = red / diff;
    // Poisson errors; a zero count is given unit variance.
    const double sigma_blue = std::sqrt(std::max(counts_blue, 1.0)) / n_pulses_each;
    const double sigma_red = std::sqrt(std::max(counts_red, 1.0)) / n_pulses_each;
    out.std_error = std::hypot(red * sigma_blue, blue * sigma_red) / (diff * diff);
    return out;
}

AsymmetryResult estimate_occupancy(std::span<const ClickRecord> blue_run, std::span<const ClickRecord> red_run,
                                   double n_pulses_each, const DetectionChain& chain)
{
    return estimate_occupancy(static_cast<double>(blue_run.size()), static_cast<double>(red_run.size()),
                              n_pulses_each, chain);
}

Histogram histogram(std::span<const ClickRecord> blue_run, std::span<const ClickRecord> red_run, double bin_width,
                    double window, double n_pulses)
{
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
    if (!(n_pulses > 0.0)) throw std::invalid_argument("pulse count must be positive");

    const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window / bin_width * (1.0 - 1e-12))));
    Histogram h;
    h.bin_width = bin_width;
    h.bin_start.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) h.bin_start[b] = static_cast<double>(b) * bin_width;
    h.counts_blue.assign(bins, 0);
    h.counts_red.assign(bins, 0);

    auto fill = [&](std::span<const ClickRecord> run, std::vector<std::uint64_t>& counts) {
        for (const auto& c : run) {
            if (!(c.t >= 0.0 && c.t <= window)) throw std::invalid_argument("click time outside the detection window");
            const auto b = std::min(bins - 1, static_cast<std::size_t>(c.t / bin_width));
            ++counts[b];
        }
    };
    fill(blue_run, h.counts_blue);
    fill(red_run, h.counts_red);

    const double norm = 1.0 / (n_pulses * bin_width);
    h.rate_blue.resize(bins);
    h.rate_red.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h.rate_blue[b] = static_cast<double>(h.counts_blue[b]) * norm;
        h.rate_red[b] = static_cast<double>(h.counts_red[b]) * norm;
    }
    return h;
}

} // namespace omx
