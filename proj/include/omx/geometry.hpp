#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace omx {

// Waveguide unit cell; all lengths in nm.
struct UnitCellParams {
    double a, w, r, u_y, fillet;
    double d, h; // dagger defect lengths, tapered along the crystal

    void validate() const;
};

// Design constants for a crystal of 2 n_cells + 1 unit cells, mirror
// symmetric about the central defect (index 0).
struct DesignParams {
    std::string label;
    double a, w, r, u_y, fillet;
    double d0, h0; // center cell
    double dN, hN; // outermost cell
    double delta_x;
    double m_exp;
    int n_cells = 17;

    void validate() const;
};

std::optional<DesignParams> builtin_design(std::string_view name);
// Throws UnknownPreset.
DesignParams design_preset(std::string_view name);

// v_n = vN - (vN - v0) 2^{-(n / delta_x)^M}; fractional n allowed.
double taper_value(double n, double v0, double vN, double delta_x, double m_exp);

struct TaperedParameter {
    double v0 = 0.0;
    double vN = 0.0;
    std::vector<double> values; // index 0..N
};

struct TaperSchedule {
    int n_cells = 0;
    double delta_x = 0.0;
    double m_exp = 0.0;
    TaperedParameter d;
    TaperedParameter h;
    DesignParams design;

    UnitCellParams cell(int index) const;
    // Interpolated cell at a fractional index.
    UnitCellParams cell_at(double index) const;
};

TaperSchedule generate_schedule(const DesignParams& design);
TaperSchedule generate_schedule(std::string_view preset);

} // namespace omx
