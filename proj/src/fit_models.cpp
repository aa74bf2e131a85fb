#include "omx/fit_models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omx {

double LorentzianModel::value(std::span<const double> p, double x) const
{
    const double hw = 0.5 * p[1];
    const double dx = x - p[0];
    return p[2] * hw / (std::numbers::pi * (dx * dx + hw * hw)) + p[3];
}

void LorentzianModel::gradient(std::span<const double> p, double x, std::span<double> out) const
{
    const double hw = 0.5 * p[1];
    const double dx = x - p[0];
    const double den = dx * dx + hw * hw;
    const double inv_pi = 1.0 / std::numbers::pi;
    out[0] = p[2] * inv_pi * hw * 2.0 * dx / (den * den);
    out[1] = p[2] * inv_pi * (den - 2.0 * hw * hw) / (2.0 * den * den);
    out[2] = inv_pi * hw / den;
    out[3] = 1.0;
}

double FanoModel::value(std::span<const double> p, double x) const
{
    const double xi = 2.0 * (x - p[0]) / p[1];
    const double s = p[2] + xi;
    return p[3] * s * s / (1.0 + xi * xi) + p[4];
}

void FanoModel::gradient(std::span<const double> p, double x, std::span<double> out) const
{
    const double w = p[1];
    const double q = p[2];
    const double xi = 2.0 * (x - p[0]) / w;
    const double s = q + xi;
    const double den = 1.0 + xi * xi;
    const double dshape_dxi = 2.0 * s * (1.0 - q * xi) / (den * den);
    out[0] = p[3] * dshape_dxi * (-2.0 / w);
    out[1] = p[3] * dshape_dxi * (-xi / w);
    out[2] = p[3] * 2.0 * s / den;
    out[3] = s * s / den;
    out[4] = 1.0;
}

HeatingCurveModel::HeatingCurveModel(const Device& device, std::optional<double> fixed_n_th0)
    : cooperativity_per_photon_(cooperativity(device, 1.0)), fixed_n_th0_(fixed_n_th0)
{
}

std::vector<std::string> HeatingCurveModel::names() const
{
    if (fixed_n_th0_) return {"alpha_sat", "beta_sat", "alpha_lin"};
    return {"n_th0", "alpha_sat", "beta_sat", "alpha_lin"};
}

HeatingParams HeatingCurveModel::unpack(std::span<const double> p) const
{
    if (fixed_n_th0_) return {.n_th0 = *fixed_n_th0_, .alpha_sat = p[0], .beta_sat = p[1], .alpha_lin = p[2]};
    return {.n_th0 = p[0], .alpha_sat = p[1], .beta_sat = p[2], .alpha_lin = p[3]};
}

double HeatingCurveModel::value(std::span<const double> p, double x) const
{
    return heated_bath_occupancy(unpack(p), x) / (1.0 + cooperativity_per_photon_ * x);
}

void HeatingCurveModel::gradient(std::span<const double> p, double x, std::span<double> out) const
{
    const auto h = unpack(p);
    const double cool = 1.0 / (1.0 + cooperativity_per_photon_ * x);
    const double sat = 1.0 + h.beta_sat * x;
    std::size_t k = 0;
    if (!fixed_n_th0_) out[k++] = cool;
    out[k++] = x / sat * cool;
    out[k++] = -h.alpha_sat * x * x / (sat * sat) * cool;
    out[k] = x * cool;
}

double HeatingKernelModel::value(std::span<const double> p, double x) const
{
    return n_base_ + p[0] / -std::expm1(-1.0 / (x * p[1]));
}

void HeatingKernelModel::gradient(std::span<const double> p, double x, std::span<double> out) const
{
    const double tau = p[1];
    const double decay = std::exp(-1.0 / (x * tau));
    const double keep = -std::expm1(-1.0 / (x * tau));
    out[0] = 1.0 / keep;
    out[1] = p[0] * decay / (x * tau * tau) / (keep * keep);
}

} // namespace omx
