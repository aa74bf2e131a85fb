#pragma once

#include "omx/om_core.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace omx {

// A scalar model y = f(x; p) with an analytic gradient in p.
class CurveModel {
public:
    virtual ~CurveModel() = default;
    virtual std::vector<std::string> names() const = 0;
    virtual double value(std::span<const double> p, double x) const = 0;
    virtual void gradient(std::span<const double> p, double x, std::span<double> out) const = 0;

    std::size_t size() const { return names().size(); }
};

// p = {center, fwhm, area, offset}; area-normalized, negative area for dips.
class LorentzianModel final : public CurveModel {
public:
    std::vector<std::string> names() const override { return {"center", "fwhm", "area", "offset"}; }
    double value(std::span<const double> p, double x) const override;
    void gradient(std::span<const double> p, double x, std::span<double> out) const override;
};

// p = {center, width, q, amplitude, offset};
// y = amplitude (q w/2 + (x - center))^2 / ((w/2)^2 + (x - center)^2) + offset.
class FanoModel final : public CurveModel {
public:
    std::vector<std::string> names() const override { return {"center", "width", "q", "amplitude", "offset"}; }
    double value(std::span<const double> p, double x) const override;
    void gradient(std::span<const double> p, double x, std::span<double> out) const override;
};

// Heating-model occupancy versus n_c. With a fixed bath the parameters are
// {alpha_sat, beta_sat, alpha_lin}; otherwise n_th0 is prepended.
class HeatingCurveModel final : public CurveModel {
public:
    HeatingCurveModel(const Device& device, std::optional<double> fixed_n_th0);

    std::vector<std::string> names() const override;
    double value(std::span<const double> p, double x) const override;
    void gradient(std::span<const double> p, double x, std::span<double> out) const override;

    HeatingParams unpack(std::span<const double> p) const;

private:
    double cooperativity_per_photon_;
    std::optional<double> fixed_n_th0_;
};

// Pulse occupancy versus repetition rate for a kick-and-relax bath.
// p = {delta, tau_th}; x = repetition rate (Hz).
class HeatingKernelModel final : public CurveModel {
public:
    explicit HeatingKernelModel(double n_base) : n_base_(n_base) {}

    std::vector<std::string> names() const override { return {"delta", "tau_th"}; }
    double value(std::span<const double> p, double x) const override;
    void gradient(std::span<const double> p, double x, std::span<double> out) const override;

private:
    double n_base_;
};

} // namespace omx
