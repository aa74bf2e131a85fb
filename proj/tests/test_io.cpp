#include "omx/io.hpp"
#include "omx/presets.hpp"
#include "omx/units.hpp"

#include "property.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace omx;
using omx::test::for_all;
using omx::test::Gen;

namespace {

bool same_device(const Device& a, const Device& b)
{
    return a.label() == b.label() && a.optical().omega_c() == b.optical().omega_c() &&
           a.optical().kappa() == b.optical().kappa() && a.optical().kappa_e() == b.optical().kappa_e() &&
           a.mechanical().omega_m() == b.mechanical().omega_m() &&
           a.mechanical().gamma_0() == b.mechanical().gamma_0() && a.g0() == b.g0() && a.g0_alt() == b.g0_alt();
}

} // namespace

TEST_CASE("property: number formatting round trips")
{
    for_all(51, 2000, [](Gen& g, int) {
        const double v = std::ldexp(g.uniform(-1.0, 1.0), g.integer(-300, 300));
        CHECK(parse_number(format_number(v)) == v);
    });
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(4800.0) == "4800");
    CHECK(parse_number(" 2.5\r") == 2.5);
    CHECK(parse_number("+3") == 3.0);
    CHECK_THROWS_AS(parse_number("abc"), FormatError);
    CHECK_THROWS_AS(parse_number("1.0x"), FormatError);
    CHECK_THROWS_AS(parse_number(""), FormatError);
}

TEST_CASE("device JSON round trip is lossless")
{
    for (const char* name : {"A", "B"}) {
        const auto d = device_preset(name);
        const auto j = device_to_json(d);
        CHECK(j.contains("omega_c_hz"));
        CHECK(same_device(d, device_from_json(nlohmann::json::parse(j.dump()))));
    }
    CHECK(!device_to_json(device_preset("B")).contains("g0_alt_hz"));
    CHECK(device_to_json(device_preset("A"))["g0_hz"].get<double>() == doctest::Approx(901e3).epsilon(1e-14));
}

TEST_CASE("device JSON errors")
{
    auto j = nlohmann::json::parse(device_to_json(device_preset("A")).dump());
    j.erase("kappa_hz");
    CHECK_THROWS_AS(device_from_json(j), FormatError);
    j = nlohmann::json::parse(device_to_json(device_preset("A")).dump());
    j["kappa_e_hz"] = 5e9;
    CHECK_THROWS_AS(device_from_json(j), std::invalid_argument);
}

TEST_CASE("heating and kernel JSON round trips")
{
    const auto h = HeatingParams::published();
    const auto h2 = heating_from_json(nlohmann::json::parse(heating_to_json(h).dump()));
    CHECK(h2.n_th0 == h.n_th0);
    CHECK(h2.alpha_sat == h.alpha_sat);
    CHECK(h2.beta_sat == h.beta_sat);
    CHECK(h2.alpha_lin == h.alpha_lin);

    const HeatingKernel k{0.0298, 4.49e-6, 0.001};
    const auto k2 = kernel_from_json(nlohmann::json::parse(kernel_to_json(k).dump()));
    CHECK(k2.delta == k.delta);
    CHECK(k2.tau_th == k.tau_th);
    CHECK(k2.n_base == k.n_base);
    CHECK(kernel_from_json(nlohmann::json::parse(R"({"delta": 0.1, "tau_th_s": 1e-6})")).n_base == 0.0);
    CHECK_THROWS_AS(kernel_from_json(nlohmann::json::parse(R"({"delta": -0.1, "tau_th_s": 1e-6})")),
                    std::invalid_argument);
}

TEST_CASE("fit JSON has value and stderr per parameter")
{
    FitResult fit;
    fit.names = {"a", "b"};
    fit.values = Eigen::Vector2d(1.5, -2.0);
    fit.covariance = Eigen::Matrix2d::Identity() * 0.25;
    fit.converged = true;
    fit.iterations = 3;
    const auto j = fit_to_json(fit);
    CHECK(j["a"]["value"].get<double>() == 1.5);
    CHECK(j["a"]["stderr"].get<double>() == 0.5);
    CHECK(j["_fit"]["converged"].get<bool>());
    fit.covariance.resize(0, 0);
    CHECK(fit_to_json(fit)["b"]["stderr"].is_null());
}

TEST_CASE("tables encode identical numbers in CSV and JSON")
{
    Table t{{"x", "y"}, {}};
    Gen g(52);
    for (int i = 0; i < 200; ++i) t.rows.push_back({g.uniform(-1e9, 1e9), std::ldexp(g.uniform(0, 1), g.integer(-200, 200))});
    std::stringstream csv, json;
    write_table(csv, t, OutputFormat::csv);
    write_table(json, t, OutputFormat::json);
    const auto from_csv = read_table_csv(csv);
    const auto from_json = read_table_json(json);
    CHECK(from_csv.columns == t.columns);
    CHECK(from_json.columns == t.columns);
    CHECK(from_csv.rows == t.rows);
    CHECK(from_json.rows == t.rows);
}

TEST_CASE("CSV reader errors")
{
    std::stringstream empty;
    CHECK_THROWS_AS(read_table_csv(empty), FormatError);
    std::stringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_table_csv(ragged), FormatError);
    std::stringstream wrong("freq,value\n1,2\n");
    CHECK_THROWS_AS(read_trace_csv(wrong), FormatError);
    std::stringstream crlf("a,b\r\n1,2\r\n\r\n");
    CHECK(read_table_csv(crlf).rows == std::vector<std::vector<double>>{{1.0, 2.0}});
}

TEST_CASE("trace CSV round trips")
{
    const std::vector<double> freq{constants::two_pi * 1e9, constants::two_pi * 2e9, constants::two_pi * 3.5e9};
    const auto c = SpectrumTrace::complex(TraceKind::omit_reflection, freq, {{1, 2}, {0.5, -0.25}, {0, 1e-17}});
    std::stringstream ss;
    write_trace_csv(ss, c);
    CHECK(ss.str().rfind("freq_hz,re,im\n1000000000,", 0) == 0);
    const auto back = read_trace_csv(ss, TraceKind::omit_reflection);
    CHECK(back.is_complex());
    CHECK(back.values() == c.values());
    for (std::size_t k = 0; k < 3; ++k) CHECK(back.freq()[k] == doctest::Approx(freq[k]).epsilon(1e-15));

    const auto r = SpectrumTrace::real(TraceKind::psd, freq, std::vector<double>{3, 4, 5});
    std::stringstream rs;
    write_trace_csv(rs, r);
    CHECK(rs.str().rfind("freq_hz,value\n", 0) == 0);
    const auto rb = read_trace_csv(rs);
    CHECK_FALSE(rb.is_complex());
    CHECK(rb.real_part() == std::vector<double>{3, 4, 5});
}

TEST_CASE("click CSV round trip")
{
    std::vector<ClickRecord> clicks;
    Gen g(53);
    for (std::uint64_t p = 0; p < 500; ++p) {
        clicks.push_back({p, g.uniform(0.0, 80e-9), static_cast<ClickLabel>(g.integer(0, 2))});
    }
    std::stringstream ss;
    write_clicks_csv(ss, clicks);
    CHECK(ss.str().rfind("pulse_index,t_ns,label\n", 0) == 0);
    const auto back = read_clicks_csv(ss);
    REQUIRE(back.size() == clicks.size());
    for (std::size_t k = 0; k < clicks.size(); ++k) {
        CHECK(back[k].pulse_index == clicks[k].pulse_index);
        CHECK(back[k].label == clicks[k].label);
        CHECK(std::abs(back[k].t - clicks[k].t) <= 2.0 * std::numeric_limits<double>::epsilon() * clicks[k].t);
    }
    std::stringstream bad("pulse_index,t_ns,label\n1,2,green\n");
    CHECK_THROWS_AS(read_clicks_csv(bad), FormatError);
    std::stringstream bad_index("pulse_index,t_ns,label\n-1,2,red\n");
    CHECK_THROWS_AS(read_clicks_csv(bad_index), FormatError);
}

TEST_CASE("taper CSV round trip is lossless")
{
    for (const char* name : {"A", "B"}) {
        const auto s = generate_schedule(name);
        std::stringstream ss;
        write_taper_csv(ss, s);
        CHECK(ss.str().rfind("cell_index,d_nm,h_nm\n0,", 0) == 0);
        const auto rows = read_taper_csv(ss);
        REQUIRE(rows.size() == 18);
        for (std::size_t n = 0; n < rows.size(); ++n) {
            CHECK(rows[n].cell_index == static_cast<int>(n));
            CHECK(rows[n].d_nm == s.d.values[n]);
            CHECK(rows[n].h_nm == s.h.values[n]);
        }
    }
}

TEST_CASE("histogram CSV header")
{
    const ClickRecord one[] = {{0, 1e-9, ClickLabel::blue}};
    std::stringstream ss;
    write_histogram_csv(ss, histogram(one, {}, 40e-9, 80e-9, 1.0));
    CHECK(ss.str() == "bin_start_ns,rate_hz_blue,rate_hz_red\n0,25000000,0\n40,0,0\n");
}

TEST_CASE("preset directory overrides the built-ins")
{
    const auto dir = std::filesystem::temp_directory_path() / "omx_test_presets";
    std::filesystem::create_directories(dir);
    auto j = device_to_json(device_preset("B"));
    j["label"] = "C";
    j["g0_hz"] = 1.0e6;
    std::ofstream(dir / "C.json") << j.dump();
    j["label"] = "A";
    std::ofstream(dir / "A.json") << j.dump();
    ::setenv("OMX_PRESET_DIR", dir.c_str(), 1);
    CHECK(device_preset("C").label() == "C");
    CHECK(device_preset("A").g0() == doctest::Approx(constants::two_pi * 1e6));
    CHECK(device_preset("B").label() == "B");
    const auto names = device_preset_names();
    CHECK(std::find(names.begin(), names.end(), "C") != names.end());
    ::unsetenv("OMX_PRESET_DIR");
    CHECK(device_preset("A").g0() == doctest::Approx(constants::two_pi * 901e3));
    CHECK_THROWS_AS(device_preset("C"), UnknownPreset);
    std::filesystem::remove_all(dir);
}
