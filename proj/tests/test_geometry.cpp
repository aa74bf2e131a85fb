#include "omx/geometry.hpp"
#include "omx/presets.hpp"

#include "property.hpp"

#include <doctest.h>

#include <cmath>

using namespace omx;
using omx::test::for_all;
using omx::test::Gen;

TEST_CASE("taper endpoints and midpoint")
{
    CHECK(taper_value(0.0, 76.0, 123.0, 3.68, 2.55) == 76.0);
    CHECK(taper_value(3.68, 76.0, 123.0, 3.68, 2.55) == 99.5);
    CHECK(taper_value(4.2, 70.0, 122.0, 4.2, 2.55) == 96.0);
    const double end = taper_value(17.0, 76.0, 123.0, 3.68, 2.55);
    CHECK(std::abs(end - 123.0) < 1e-12);
    CHECK(std::abs(end - 123.0) <= 47.0 * std::exp2(-std::pow(17.0 / 3.68, 2.55)) + 1e-13);
}

TEST_CASE("taper input validation")
{
    CHECK_THROWS_AS(taper_value(-1.0, 1.0, 2.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(taper_value(1.0, 1.0, 2.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(taper_value(1.0, 1.0, 2.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("design presets")
{
    const auto b = design_preset("B");
    CHECK(b.d0 == 76.0);
    CHECK(b.h0 == 196.9);
    CHECK(b.dN == 123.0);
    CHECK(b.hN == 231.0);
    CHECK(b.delta_x == 3.68);
    CHECK(b.m_exp == 2.55);
    CHECK(b.n_cells == 17);
    const auto a = design_preset("A");
    CHECK(a.d0 == 70.0);
    CHECK(a.h0 == 194.5);
    CHECK(a.dN == 122.0);
    CHECK(a.hN == 217.6);
    CHECK(a.delta_x == 4.2);
    CHECK_THROWS_AS(design_preset("C"), UnknownPreset);
    CHECK_THROWS_AS(generate_schedule("C"), UnknownPreset);
}

TEST_CASE("schedules start at the center cell and rise monotonically")
{
    for (const char* name : {"A", "B"}) {
        const auto s = generate_schedule(name);
        INFO(name);
        REQUIRE(s.d.values.size() == 18);
        REQUIRE(s.h.values.size() == 18);
        CHECK(s.d.values[0] == s.design.d0);
        CHECK(s.h.values[0] == s.design.h0);
        for (std::size_t n = 1; n < 18; ++n) {
            CHECK(s.d.values[n] > s.d.values[n - 1]);
            CHECK(s.h.values[n] > s.h.values[n - 1]);
        }
        const double bound = std::exp2(-std::pow(17.0 / s.delta_x, s.m_exp));
        CHECK(std::abs(s.d.values[17] - s.design.dN) <= (s.design.dN - s.design.d0) * bound + 1e-12);
        CHECK(std::abs(s.h.values[17] - s.design.hN) <= (s.design.hN - s.design.h0) * bound + 1e-12);
    }
    const auto b = generate_schedule("B");
    CHECK(b.d.values[0] == 76.0);
    CHECK(b.h.values[0] == 196.9);
}

TEST_CASE("schedule cells carry the constant columns")
{
    const auto s = generate_schedule("B");
    const auto c = s.cell(5);
    CHECK(c.a == 448.0);
    CHECK(c.w == 93.0);
    CHECK(c.r == 172.0);
    CHECK(c.u_y == 359.0);
    CHECK(c.fillet == 25.0);
    CHECK(c.d == s.d.values[5]);
    CHECK(c.h == s.h.values[5]);
    CHECK_NOTHROW(c.validate());
    CHECK(s.cell_at(3.68).d == 99.5);
    CHECK_THROWS(s.cell(18));
    CHECK_THROWS(s.cell(-1));
}

TEST_CASE("unit cell validation")
{
    UnitCellParams c{448, 93, 172, 359, 25, 76, 196.9};
    CHECK_NOTHROW(c.validate());
    c.d = 500;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.d = 76;
    c.w = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("property: taper is monotone and reverses with the endpoints")
{
    for_all(41, 300, [](Gen& g, int) {
        const double v0 = g.uniform(10.0, 300.0);
        const double vN = v0 + g.uniform(0.5, 100.0);
        const double dx = g.uniform(0.5, 10.0);
        const double m = g.uniform(0.5, 5.0);
        const double n1 = g.uniform(0.0, 30.0);
        const double n2 = n1 + g.uniform(1e-3, 5.0);
        CHECK(taper_value(n2, v0, vN, dx, m) >= taper_value(n1, v0, vN, dx, m));
        CHECK(taper_value(n2, vN, v0, dx, m) <= taper_value(n1, vN, v0, dx, m));
        const double v = taper_value(n1, v0, vN, dx, m);
        CHECK(v >= v0);
        CHECK(v <= vN);
    });
}

TEST_CASE("property: taper is scale equivariant")
{
    for_all(42, 300, [](Gen& g, int) {
        const double v0 = g.uniform(10.0, 300.0);
        const double vN = g.uniform(10.0, 300.0);
        const double dx = g.uniform(0.5, 10.0);
        const double m = g.uniform(0.5, 5.0);
        const double n = g.uniform(0.0, 30.0);
        // Power-of-two scales are exact in binary floating point.
        const double s2 = std::ldexp(1.0, g.integer(-8, 8));
        CHECK(taper_value(n, s2 * v0, s2 * vN, dx, m) == s2 * taper_value(n, v0, vN, dx, m));
        const double s = g.uniform(0.1, 10.0);
        const double ref = s * taper_value(n, v0, vN, dx, m);
        CHECK(std::abs(taper_value(n, s * v0, s * vN, dx, m) - ref) <= 8e-16 * s * std::max(std::abs(v0), std::abs(vN)));
    });
}
