#include "omx/geometry.hpp"

#include "omx/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace omx {

void UnitCellParams::validate() const
{
    for (double v : {a, w, r, u_y, fillet, d, h}) {
        if (!(v > 0.0)) throw std::invalid_argument("unit-cell lengths must be positive");
    }
    if (!(d < a && h < a)) throw std::invalid_argument("defect lengths must be smaller than the lattice constant");
}

void DesignParams::validate() const
{
    for (double v : {a, w, r, u_y, fillet, d0, h0, dN, hN}) {
        if (!(v > 0.0)) throw std::invalid_argument("design lengths must be positive");
    }
    if (!(delta_x > 0.0 && m_exp > 0.0)) throw std::invalid_argument("taper shape parameters must be positive");
    if (n_cells < 1) throw std::invalid_argument("taper needs at least one cell per side");
}

std::optional<DesignParams> builtin_design(std::string_view name)
{
    if (name == "A") {
        return DesignParams{.label = "A", .a = 448, .w = 92, .r = 167, .u_y = 356, .fillet = 25,
                            .d0 = 70, .h0 = 194.5, .dN = 122, .hN = 217.6, .delta_x = 4.2, .m_exp = 2.55,
                            .n_cells = 17};
    }
    if (name == "B") {
        return DesignParams{.label = "B", .a = 448, .w = 93, .r = 172, .u_y = 359, .fillet = 25,
                            .d0 = 76, .h0 = 196.9, .dN = 123, .hN = 231, .delta_x = 3.68, .m_exp = 2.55,
                            .n_cells = 17};
    }
    return std::nullopt;
}

DesignParams design_preset(std::string_view name)
{
    if (auto d = builtin_design(name)) return *d;
    throw UnknownPreset(std::string(name));
}

double taper_value(double n, double v0, double vN, double delta_x, double m_exp)
{
    if (!(n >= 0.0)) throw std::invalid_argument("cell index must be non-negative");
    if (!(delta_x > 0.0 && m_exp > 0.0)) throw std::invalid_argument("taper shape parameters must be positive");
    if (n == 0.0) return v0;
    return vN - (vN - v0) * std::exp2(-std::pow(n / delta_x, m_exp));
}

namespace {

TaperedParameter tabulate(double v0, double vN, const DesignParams& design)
{
    TaperedParameter p{v0, vN, {}};
    p.values.reserve(static_cast<std::size_t>(design.n_cells) + 1);
    for (int n = 0; n <= design.n_cells; ++n) {
        p.values.push_back(taper_value(n, v0, vN, design.delta_x, design.m_exp));
    }
    return p;
}

} // namespace

TaperSchedule generate_schedule(const DesignParams& design)
{
    design.validate();
    return {design.n_cells, design.delta_x, design.m_exp, tabulate(design.d0, design.dN, design),
            tabulate(design.h0, design.hN, design), design};
}

TaperSchedule generate_schedule(std::string_view preset)
{
    return generate_schedule(design_preset(preset));
}

UnitCellParams TaperSchedule::cell(int index) const
{
    if (index < 0 || index > n_cells) throw std::out_of_range("cell index outside the taper");
    const auto k = static_cast<std::size_t>(index);
    UnitCellParams c{design.a, design.w, design.r, design.u_y, design.fillet, d.values[k], h.values[k]};
    c.validate();
    return c;
}

UnitCellParams TaperSchedule::cell_at(double index) const
{
    if (!(index >= 0.0 && index <= n_cells)) throw std::out_of_range("cell index outside the taper");
    UnitCellParams c{design.a,
                     design.w,
                     design.r,
                     design.u_y,
                     design.fillet,
                     taper_value(index, d.v0, d.vN, delta_x, m_exp),
                     taper_value(index, h.v0, h.vN, delta_x, m_exp)};
    c.validate();
    return c;
}

} // namespace omx
