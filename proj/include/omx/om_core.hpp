#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

// Closed-form linearized optomechanics. All rates and frequencies are
// angular (rad/s); use the from_hz factories at the boundary.
namespace omx {

class OpticalMode {
public:
    OpticalMode(double omega_c, double kappa, double kappa_e);
    static OpticalMode from_hz(double omega_c_hz, double kappa_hz, double kappa_e_hz);

    double omega_c() const { return omega_c_; }
    double kappa() const { return kappa_; }
    double kappa_e() const { return kappa_e_; }
    // Loaded quality factor omega_c / kappa.
    double quality_factor() const { return omega_c_ / kappa_; }

private:
    double omega_c_;
    double kappa_;
    double kappa_e_;
};

class MechanicalMode {
public:
    MechanicalMode(double omega_m, double gamma_0);
    static MechanicalMode from_hz(double omega_m_hz, double gamma_0_hz);

    double omega_m() const { return omega_m_; }
    double gamma_0() const { return gamma_0_; }
    double quality_factor() const { return omega_m_ / gamma_0_; }

private:
    double omega_m_;
    double gamma_0_;
};

class Device {
public:
    Device(OpticalMode optical, MechanicalMode mechanical, double g0, std::string label = {},
           std::optional<double> g0_alt = std::nullopt);

    const OpticalMode& optical() const { return optical_; }
    const MechanicalMode& mechanical() const { return mechanical_; }
    double g0() const { return g0_; }
    // Second reported value of g0 (e.g. from the opposite detuning branch).
    const std::optional<double>& g0_alt() const { return g0_alt_; }
    const std::string& label() const { return label_; }

    bool sideband_resolved() const { return mechanical_.omega_m() > optical_.kappa(); }
    double sideband_ratio() const { return mechanical_.omega_m() / optical_.kappa(); }

    Device with_g0(double g0) const;
    Device with_kappa(double kappa) const;

private:
    OpticalMode optical_;
    MechanicalMode mechanical_;
    double g0_;
    std::optional<double> g0_alt_;
    std::string label_;
};

// Laser drive. Exactly one of on-chip power or a direct photon number is set.
class Drive {
public:
    static Drive with_power(double omega_l, double detuning, double on_chip_power);
    static Drive with_photons(double omega_l, double detuning, double n_c);
    // Laser placed at omega_c + detuning.
    static Drive at_detuning(const OpticalMode& optical, double detuning, double on_chip_power);

    double omega_l() const { return omega_l_; }
    double detuning() const { return detuning_; }
    const std::optional<double>& on_chip_power() const { return power_; }
    const std::optional<double>& n_c_override() const { return n_c_; }

private:
    Drive(double omega_l, double detuning, std::optional<double> power, std::optional<double> n_c);

    double omega_l_;
    double detuning_;
    std::optional<double> power_;
    std::optional<double> n_c_;
};

struct HeatingParams {
    double n_th0 = 0.0;
    double alpha_sat = 0.0;
    double beta_sat = 0.0;
    double alpha_lin = 0.0;

    void validate() const;

    // Fitted 3 K cooling-run constants for Device A.
    static HeatingParams published();
    // Pure backaction cooling from a fixed bath.
    static HeatingParams none(double n_th0);
};

struct BackactionResult {
    double g = 0.0;            // field-enhanced coupling g0 sqrt(n_c)
    double cooperativity = 0.0;
    double gamma_opt = 0.0;    // exact two-sideband optical damping (signed)
    double gamma_opt_rwa = 0.0; // resolved-sideband value, +-4 g^2 / kappa at the sidebands
    double spring_shift = 0.0;
    double gamma_eff = 0.0;
};

// Bose-Einstein occupancy. Temperatures below 1 uK take the T = 0 branch.
double thermal_occupancy(double omega, double temperature);
double temperature_from_occupancy(double omega, double occupancy);

double intracavity_photons(const OpticalMode& optical, const Drive& drive);

double cooperativity(const Device& device, double n_c);

BackactionResult backaction(const Device& device, double n_c, double detuning);

// n_m = [n_th0 + alpha_sat n_c / (1 + beta_sat n_c) + alpha_lin n_c] / (1 + C(n_c))
double heating_model_occupancy(const Device& device, const HeatingParams& heating, double n_c);

// Bath occupancy before backaction cooling (numerator of the heating model).
double heated_bath_occupancy(const HeatingParams& heating, double n_c);

struct CoolingPoint {
    double n_c;
    double n_m;
    double cooperativity;
    double gamma_eff;
};

// Red-detuned (detuning = -omega_m) cooling curve over a strictly increasing,
// strictly positive photon-number grid.
std::vector<CoolingPoint> cooling_curve(const Device& device, const HeatingParams& heating,
                                        std::span<const double> n_c_grid);

} // namespace omx
