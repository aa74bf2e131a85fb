#include "omx/om_core.hpp"

#include "omx/units.hpp"

#include <cmath>
#include <stdexcept>

namespace omx {

namespace {

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

constexpr double kZeroTemperatureCutoff = 1e-6; // K

} // namespace

OpticalMode::OpticalMode(double omega_c, double kappa, double kappa_e)
    : omega_c_(omega_c), kappa_(kappa), kappa_e_(kappa_e)
{
    require_finite(omega_c, "omega_c");
    require_finite(kappa, "kappa");
    require_finite(kappa_e, "kappa_e");
    if (omega_c <= 0.0) throw std::invalid_argument("omega_c must be positive");
    if (!(kappa_e > 0.0 && kappa_e <= kappa)) {
        throw std::invalid_argument("optical mode requires 0 < kappa_e <= kappa");
    }
}

OpticalMode OpticalMode::from_hz(double omega_c_hz, double kappa_hz, double kappa_e_hz)
{
    return {angular_from_hz(omega_c_hz), angular_from_hz(kappa_hz), angular_from_hz(kappa_e_hz)};
}

MechanicalMode::MechanicalMode(double omega_m, double gamma_0) : omega_m_(omega_m), gamma_0_(gamma_0)
{
    require_finite(omega_m, "omega_m");
    require_finite(gamma_0, "gamma_0");
    if (omega_m <= 0.0) throw std::invalid_argument("omega_m must be positive");
    if (!(gamma_0 > 0.0 && gamma_0 < omega_m)) {
        throw std::invalid_argument("mechanical mode requires 0 < gamma_0 < omega_m");
    }
}

MechanicalMode MechanicalMode::from_hz(double omega_m_hz, double gamma_0_hz)
{
    return {angular_from_hz(omega_m_hz), angular_from_hz(gamma_0_hz)};
}

Device::Device(OpticalMode optical, MechanicalMode mechanical, double g0, std::string label,
               std::optional<double> g0_alt)
    : optical_(optical), mechanical_(mechanical), g0_(g0), g0_alt_(g0_alt), label_(std::move(label))
{
    require_finite(g0, "g0");
    if (g0 <= 0.0) throw std::invalid_argument("g0 must be positive");
    if (g0_alt && !(*g0_alt > 0.0 && std::isfinite(*g0_alt))) {
        throw std::invalid_argument("alternate g0 must be positive");
    }
}

Device Device::with_g0(double g0) const
{
    return Device(optical_, mechanical_, g0, label_, g0_alt_);
}

Device Device::with_kappa(double kappa) const
{
    return Device(OpticalMode(optical_.omega_c(), kappa, std::min(optical_.kappa_e(), kappa)), mechanical_,
                  g0_, label_, g0_alt_);
}

Drive::Drive(double omega_l, double detuning, std::optional<double> power, std::optional<double> n_c)
    : omega_l_(omega_l), detuning_(detuning), power_(power), n_c_(n_c)
{
    require_finite(omega_l, "omega_l");
    require_finite(detuning, "detuning");
    if (omega_l <= 0.0) throw std::invalid_argument("omega_l must be positive");
    if (power_.has_value() == n_c_.has_value()) {
        throw std::invalid_argument("drive needs exactly one of on-chip power or photon number");
    }
    if (power_ && !(*power_ >= 0.0 && std::isfinite(*power_))) {
        throw std::invalid_argument("on-chip power must be finite and non-negative");
    }
    if (n_c_ && !(*n_c_ >= 0.0 && std::isfinite(*n_c_))) {
        throw std::invalid_argument("photon number must be finite and non-negative");
    }
}

Drive Drive::with_power(double omega_l, double detuning, double on_chip_power)
{
    return Drive(omega_l, detuning, on_chip_power, std::nullopt);
}

Drive Drive::with_photons(double omega_l, double detuning, double n_c)
{
    return Drive(omega_l, detuning, std::nullopt, n_c);
}

Drive Drive::at_detuning(const OpticalMode& optical, double detuning, double on_chip_power)
{
    return with_power(optical.omega_c() + detuning, detuning, on_chip_power);
}

void HeatingParams::validate() const
{
    for (double v : {n_th0, alpha_sat, beta_sat, alpha_lin}) {
        if (!(v >= 0.0 && std::isfinite(v))) {
            throw std::invalid_argument("heating parameters must be finite and non-negative");
        }
    }
}

HeatingParams HeatingParams::published()
{
    return {.n_th0 = 7.95, .alpha_sat = 0.324, .beta_sat = 0.019, .alpha_lin = 0.003};
}

HeatingParams HeatingParams::none(double n_th0)
{
    return {.n_th0 = n_th0};
}

double thermal_occupancy(double omega, double temperature)
{
    require_finite(omega, "frequency");
    require_finite(temperature, "temperature");
    if (omega <= 0.0) throw std::invalid_argument("frequency must be positive");
    if (temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
    if (temperature < kZeroTemperatureCutoff) return 0.0;
    const double x = constants::hbar * omega / (constants::boltzmann * temperature);
    return 1.0 / std::expm1(x);
}

double temperature_from_occupancy(double omega, double occupancy)
{
    require_finite(omega, "frequency");
    require_finite(occupancy, "occupancy");
    if (omega <= 0.0) throw std::invalid_argument("frequency must be positive");
    if (occupancy <= 0.0) throw std::invalid_argument("occupancy must be positive");
    return constants::hbar * omega / (constants::boltzmann * std::log1p(1.0 / occupancy));
}

double intracavity_photons(const OpticalMode& optical, const Drive& drive)
{
    if (drive.n_c_override()) return *drive.n_c_override();
    const double half_kappa = 0.5 * optical.kappa();
    const double delta = drive.detuning();
    return *drive.on_chip_power() * optical.kappa_e() /
           (constants::hbar * drive.omega_l() * (half_kappa * half_kappa + delta * delta));
}

double cooperativity(const Device& device, double n_c)
{
    if (!(n_c >= 0.0)) throw std::invalid_argument("n_c must be non-negative");
    const double g0 = device.g0();
    return 4.0 * g0 * g0 * n_c / (device.optical().kappa() * device.mechanical().gamma_0());
}

BackactionResult backaction(const Device& device, double n_c, double detuning)
{
    const double coop = cooperativity(device, n_c);
    const double kappa = device.optical().kappa();
    const double omega_m = device.mechanical().omega_m();
    const double hk2 = 0.25 * kappa * kappa;
    const double g2 = device.g0() * device.g0() * n_c;

    const double anti_stokes = detuning + omega_m;
    const double stokes = detuning - omega_m;
    const double l_as = 1.0 / (hk2 + anti_stokes * anti_stokes);
    const double l_s = 1.0 / (hk2 + stokes * stokes);

    BackactionResult r;
    r.g = std::sqrt(g2);
    r.cooperativity = coop;
    r.gamma_opt = g2 * kappa * (l_as - l_s);
    if (detuning < 0.0) {
        r.gamma_opt_rwa = g2 * kappa * l_as;
    } else if (detuning > 0.0) {
        r.gamma_opt_rwa = -g2 * kappa * l_s;
    }
    r.spring_shift = g2 * (anti_stokes * l_as + stokes * l_s);
    r.gamma_eff = device.mechanical().gamma_0() + r.gamma_opt;
    return r;
}

double heated_bath_occupancy(const HeatingParams& heating, double n_c)
{
    return heating.n_th0 + heating.alpha_sat * n_c / (1.0 + heating.beta_sat * n_c) + heating.alpha_lin * n_c;
}

double heating_model_occupancy(const Device& device, const HeatingParams& heating, double n_c)
{
    heating.validate();
    return heated_bath_occupancy(heating, n_c) / (1.0 + cooperativity(device, n_c));
}

std::vector<CoolingPoint> cooling_curve(const Device& device, const HeatingParams& heating,
                                        std::span<const double> n_c_grid)
{
    if (n_c_grid.empty()) throw std::invalid_argument("cooling curve needs a non-empty grid");
    for (std::size_t i = 0; i < n_c_grid.size(); ++i) {
        if (!(n_c_grid[i] > 0.0) || (i > 0 && !(n_c_grid[i] > n_c_grid[i - 1]))) {
            throw std::invalid_argument("cooling grid must be strictly positive and increasing");
        }
    }
    const double red = -device.mechanical().omega_m();
    std::vector<CoolingPoint> out;
    out.reserve(n_c_grid.size());
    for (double n_c : n_c_grid) {
        const auto ba = backaction(device, n_c, red);
        out.push_back({n_c, heating_model_occupancy(device, heating, n_c), ba.cooperativity, ba.gamma_eff});
    }
    return out;
}

} // namespace omx
