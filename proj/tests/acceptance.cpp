// Acceptance run: one PASS/FAIL line per criterion. argv[1] is the omx executable.

#include "omx/fitkit.hpp"
#include "omx/geometry.hpp"
#include "omx/io.hpp"
#include "omx/om_core.hpp"
#include "omx/presets.hpp"
#include "omx/pulsed.hpp"
#include "omx/spectra.hpp"
#include "omx/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace omx;

namespace {

namespace fs = std::filesystem;

const double two_pi = constants::two_pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Criterion {
    std::ostringstream detail;
    bool ok = true;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

bool report(int number, const std::string& title, Criterion& c)
{
    std::cout << (c.ok ? "PASS" : "FAIL") << "  " << number << ". " << title << ":" << c.detail.str() << std::endl;
    return c.ok;
}

double photons_for_coupling(const Device& d, double g) { return (g / d.g0()) * (g / d.g0()); }

Criterion thermal_anchor()
{
    Criterion c;
    const double wm = two_pi * 7.436e9;
    const double n = thermal_occupancy(wm, 3.0);
    const double t = temperature_from_occupancy(wm, 0.35);
    c.detail << " n_th(3 K) = " << n << ", T(0.35) = " << t * 1e3 << " mK";
    c.require(n >= 7.87 && n <= 7.99, "n_th in [7.87, 7.99]");
    c.require(t >= 0.258 && t <= 0.270, "T in [258, 270] mK");
    return c;
}

Criterion strong_coupling()
{
    Criterion c;
    const auto a = device_preset("A");
    const auto modes = normal_modes(a, 8e4, -a.mechanical().omega_m());
    const double two_g = hz_from_angular(modes.two_g());
    c.detail << " 2g/2pi = " << two_g / 1e6 << " MHz";
    c.require(two_g >= 498e6 && two_g <= 520e6, "2g in [498, 520] MHz");

    const auto wide = a.with_kappa(two_pi * 870e6);
    const auto at = normal_modes(wide, photons_for_coupling(wide, two_pi * 254.8e6), -a.mechanical().omega_m());
    c.detail << ", 4g/kappa = " << 4.0 * at.coupling / wide.optical().kappa()
             << ", above threshold = " << (at.above_threshold ? "yes" : "no");
    c.require(at.above_threshold, "above-threshold flag");
    return c;
}

Criterion scattering()
{
    Criterion c;
    const auto b = device_preset("B");
    const double n_c =
        intracavity_photons(b.optical(), Drive::at_detuning(b.optical(), -b.mechanical().omega_m(), 7.4e-6));
    const double p = scattering_probability(b, n_c, 80e-9);
    c.detail << " n_c = " << n_c << ", p_s = " << p;
    c.require(p >= 0.040 && p <= 0.060, "p_s in [0.040, 0.060]");
    return c;
}

Criterion cooling()
{
    Criterion c;
    const double n = heating_model_occupancy(device_preset("A"), HeatingParams::published(), 4800.0);
    c.detail << " n_m(4800) = " << n << " (reported 0.35 +- 0.01)";
    c.require(n >= 0.31 && n <= 0.51, "n_m in [0.31, 0.51]");
    return c;
}

Criterion estimator()
{
    Criterion c;
    DetectionChain dark_free;
    dark_free.dark_rate = 0.0;
    const auto r = estimate_occupancy(24260.0, 1000.0, 1e6, dark_free);
    c.detail << " analytic n = " << r.n_m;
    c.require(std::abs(r.n_m - 0.0430) <= 0.0005, "24.26:1 gives 0.0430 +- 0.0005");

    const auto b = device_preset("B");
    const double n_c =
        intracavity_photons(b.optical(), Drive::at_detuning(b.optical(), -b.mechanical().omega_m(), 7.4e-6));
    const double p_s = scattering_probability(b, n_c, 80e-9);
    DetectionChain chain;
    chain.eta = 0.0487 / p_s;
    const HeatingKernel kernel{0.0, 0.0, 0.043};
    PulseTrain train;
    train.n_pulses = 1000000;

    int covered = 0;
    double mean_stderr = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        train.sideband = Sideband::blue;
        const auto blue = simulate_clicks(b, train, chain, kernel, n_c, 2 * s + 1);
        train.sideband = Sideband::red;
        const auto red = simulate_clicks(b, train, chain, kernel, n_c, 2 * s + 2);
        const auto e = estimate_occupancy(blue.clicks, red.clicks, 1e6, chain);
        mean_stderr += e.std_error / seeds;
        if (std::abs(e.n_m - 0.043) <= 3.0 * e.std_error) ++covered;
    }
    c.detail << ", eta p_s = " << chain.eta * p_s << ", mean stderr = " << mean_stderr << ", within 3 sigma "
             << covered << "/" << seeds;
    c.require(mean_stderr > 0.0008 && mean_stderr < 0.0012, "stderr near 0.001");
    c.require(covered >= 48, "at least 95% of seeds within 3 sigma");
    return c;
}

// Independent solution of n(R) = delta / (1 - exp(-1 / (R tau))) through both anchors.
std::pair<double, double> bisect_kernel(double r1, double n1, double r2, double n2)
{
    const auto ratio = [&](double tau) {
        return (1.0 - std::exp(-1.0 / (r1 * tau))) / (1.0 - std::exp(-1.0 / (r2 * tau)));
    };
    double lo = 1e-9, hi = 1e-3;
    for (int k = 0; k < 200; ++k) {
        const double mid = std::sqrt(lo * hi);
        if (ratio(mid) < n2 / n1) lo = mid; else hi = mid;
    }
    const double tau = std::sqrt(lo * hi);
    return {n1 * (1.0 - std::exp(-1.0 / (r1 * tau))), tau};
}

Criterion heating_kernel()
{
    Criterion c;
    const RateOccupancy pts[] = {{188e3, 0.043}, {3.012e6, 0.42}};
    const auto k = fit_heating_kernel(pts, 0.0);
    const auto [delta, tau] = bisect_kernel(188e3, 0.043, 3.012e6, 0.42);
    c.detail << " delta = " << k.delta << ", tau_th = " << k.tau_th * 1e6 << " us";
    c.require(rel(k.delta, delta) < 1e-6 && rel(k.tau_th, tau) < 1e-6, "agrees with bisection");
    c.require(rel(k.delta, 0.030) < 0.1, "delta within 10% of 0.030");
    c.require(rel(k.tau_th, 4.5e-6) < 0.1, "tau_th within 10% of 4.5 us");
    c.require(rel(steady_state_prepulse_occupancy(k, 188e3).during_pulse, 0.043) < 1e-6, "188 kHz anchor");
    c.require(rel(steady_state_prepulse_occupancy(k, 3.012e6).during_pulse, 0.42) < 1e-6, "3.012 MHz anchor");
    return c;
}

Criterion omit_properties()
{
    Criterion c;
    {
        const auto a = device_preset("A");
        const double det = -a.mechanical().omega_m();
        const auto grid = linspace(-det - 3 * a.optical().kappa(), -det + 3 * a.optical().kappa(), 2001);
        const auto trace = omit_reflection(a, 0.0, det, grid);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const std::complex<double> chi = 1.0 / std::complex<double>(0.5 * a.optical().kappa(), -(det + grid[k]));
            worst = std::max(worst, std::abs(trace.values()[k] - (1.0 - a.optical().kappa_e() * chi)));
        }
        c.detail << " bare deviation = " << worst;
        c.require(worst < 1e-12, "g = 0 is the bare Lorentzian");
    }
    {
        const double wm = two_pi * 5e9;
        const double kappa = 0.1 * wm;
        const Device d(OpticalMode(two_pi * 1.9e14, kappa, 0.3 * kappa), MechanicalMode(wm, 1e-5 * kappa), two_pi * 1e6);
        double worst = 0.0;
        for (double coop : {1.0, 10.0, 100.0}) {
            const double width = d.mechanical().gamma_0() * (1.0 + coop);
            const double n_c = coop * kappa * d.mechanical().gamma_0() / (4.0 * d.g0() * d.g0());
            const auto grid = linspace(wm - 10 * width, wm + 10 * width, 20001);
            const auto trace = omit_reflection(d, n_c, -wm, grid);
            std::vector<double> power;
            for (const auto& v : trace.values()) power.push_back(std::norm(v));
            const auto w = feature_fwhm(grid, power, std::norm(omit_response(d, 0.0, -wm, wm)));
            const double err = w ? rel(*w, width) : 1.0;
            worst = std::max(worst, err);
        }
        c.detail << ", width error = " << worst;
        c.require(worst < 0.01, "transparency width within 1% for C = 1, 10, 100");
    }
    {
        const auto a = device_preset("A");
        const double wm = a.mechanical().omega_m();
        double largest = 0.0;
        for (double det_ratio : {0.25, 0.5, 1.0, 1.5, 2.0}) {
            for (double n : {1.0, 1e2, 1e4, 8e4, 1e6}) {
                const auto grid = linspace(-3 * wm, 3 * wm, 4001);
                for (const auto& v : omit_reflection(a, n, -det_ratio * wm, grid).values()) {
                    largest = std::max(largest, std::abs(v));
                }
            }
        }
        c.detail << ", max |r| red = " << largest;
        c.require(largest <= 1.0 + 1e-12, "|r| <= 1 red-detuned");
    }
    {
        const auto a = device_preset("A");
        const double wm = a.mechanical().omega_m();
        double worst = 0.0;
        for (double ratio : {4.0, 8.0, 16.0, 40.0}) {
            const double g = ratio * a.optical().kappa() / 4.0;
            const auto grid = linspace(wm - 1.5 * g, wm + 1.5 * g, 6001);
            const auto s = extract_splitting(omit_reflection(a, photons_for_coupling(a, g), -wm, grid));
            worst = std::max(worst, s ? rel(*s, 2.0 * g) : 1.0);
        }
        c.detail << ", splitting vs 2g = " << worst;
        c.require(worst < 0.02, "minima splitting within 2% of 2g for 4g/kappa >= 4");
    }
    return c;
}

// Worst relative mismatch between the analytic gradient and central differences.
double gradient_mismatch(const CurveModel& model, std::vector<double> p, std::span<const double> xs)
{
    // Per parameter: largest |analytic - central difference| over the grid,
    // relative to the largest |analytic| on the same grid.
    const std::size_t n = p.size();
    std::vector<double> g(n), err(n, 0.0), size(n, 0.0);
    for (double x : xs) {
        model.gradient(p, x, g);
        for (std::size_t k = 0; k < n; ++k) {
            const double h = 1e-5 * (p[k] != 0.0 ? std::abs(p[k]) : 1.0);
            auto hi = p, lo = p;
            hi[k] += h;
            lo[k] -= h;
            const double fd = (model.value(hi, x) - model.value(lo, x)) / (hi[k] - lo[k]);
            err[k] = std::max(err[k], std::abs(g[k] - fd));
            size[k] = std::max(size[k], std::abs(g[k]));
        }
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, err[k] / size[k]);
    return worst;
}

double worst_param_error(const FitResult& fit, std::span<const double> truth)
{
    double worst = fit.converged ? 0.0 : 1.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        worst = std::max(worst, rel(fit.values[static_cast<Eigen::Index>(k)], truth[k]));
    }
    return worst;
}

SpectrumTrace sample(const CurveModel& model, std::span<const double> p, std::vector<double> grid)
{
    std::vector<double> y;
    for (double x : grid) y.push_back(model.value(p, x));
    return SpectrumTrace::real(TraceKind::generic, std::move(grid), y);
}

Criterion fits()
{
    Criterion c;
    const auto a = device_preset("A");
    double worst = 0.0;
    {
        const std::vector<double> truth{two_pi * 191.7e12, two_pi * 800e6, -two_pi * 300e6, 1.0};
        worst = std::max(worst, worst_param_error(fit_lorentzian(sample(LorentzianModel{}, truth,
                                                  linspace(truth[0] - 5 * truth[1], truth[0] + 5 * truth[1], 401))),
                                                  truth));
    }
    {
        const std::vector<double> truth{two_pi * 191.7e12, two_pi * 800e6, 0.6, 0.2, 0.5};
        worst = std::max(worst, worst_param_error(fit_fano(sample(FanoModel{}, truth,
                                                  linspace(truth[0] - 6 * truth[1], truth[0] + 6 * truth[1], 601))),
                                                  truth));
    }
    {
        const double kappa = a.optical().kappa();
        const double g0 = a.g0();
        const double gamma0 = a.mechanical().gamma_0();
        std::vector<LinewidthPoint> red;
        for (double n : {50.0, 200.0, 500.0, 1000.0, 2000.0}) red.push_back({n, gamma0 + 4.0 * g0 * g0 / kappa * n});
        const auto fit = fit_g0_from_linewidths(red, kappa, gamma0, Branch::red);
        const double truth[] = {g0, gamma0};
        worst = std::max(worst, worst_param_error(fit, truth));
    }
    std::vector<OccupancyPoint> pts;
    for (double n : logspace(1.0, 5000.0, 25)) pts.push_back({n, heating_model_occupancy(a, HeatingParams::published(), n)});
    {
        const double truth[] = {7.95, 0.324, 0.019, 0.003};
        worst = std::max(worst, worst_param_error(fit_heating_params(pts, a, std::nullopt), truth));
    }
    c.detail << " worst parameter error = " << worst;
    c.require(worst < 1e-4, "noiseless self-fits to 1e-4");

    const auto xs = linspace(-4.0, 4.0, 41);
    const auto ncs = logspace(0.5, 5000.0, 30);
    const auto rates = logspace(1e4, 1e7, 20);
    const double jac = std::max({gradient_mismatch(LorentzianModel{}, {0.3, 1.2, -0.7, 0.2}, xs),
                                 gradient_mismatch(FanoModel{}, {0.3, 1.2, 2.5, 0.7, 0.2}, xs),
                                 gradient_mismatch(HeatingCurveModel(a, std::nullopt), {7.95, 0.324, 0.019, 0.003}, ncs),
                                 gradient_mismatch(HeatingKernelModel(0.01), {0.03, 4.5e-6}, rates)});
    c.detail << ", worst Jacobian mismatch = " << jac;
    c.require(jac < 1e-6, "Jacobians match finite differences");

    const auto fixed = fit_heating_params(pts, a, 7.95);
    const double h = std::max({rel(fixed.value("alpha_sat"), 0.324), rel(fixed.value("beta_sat"), 0.019),
                               rel(fixed.value("alpha_lin"), 0.003)});
    c.detail << ", heating constants error = " << h;
    c.require(fixed.converged && h < 1e-3, "heating constants to 1e-3");
    return c;
}

Criterion taper()
{
    Criterion c;
    c.require(taper_value(0.0, 76.0, 123.0, 3.68, 2.55) == 76.0, "d(0) = d0");
    c.require(taper_value(3.68, 76.0, 123.0, 3.68, 2.55) == 99.5, "d(3.68) = 99.5");
    c.detail << " d(3.68) = " << taper_value(3.68, 76.0, 123.0, 3.68, 2.55) << " nm";
    for (const char* name : {"A", "B"}) {
        const auto s = generate_schedule(name);
        c.require(s.d.values.size() == 18 && s.h.values.size() == 18, "18 cells");
        c.require(s.d.values.front() == s.design.d0 && s.h.values.front() == s.design.h0, "center cell exact");
        c.require(std::is_sorted(s.d.values.begin(), s.d.values.end(), std::less_equal<>()) &&
                      std::adjacent_find(s.d.values.begin(), s.d.values.end()) == s.d.values.end(),
                  "d monotone");
        c.require(std::adjacent_find(s.h.values.begin(), s.h.values.end(), std::greater_equal<>()) == s.h.values.end(),
                  "h monotone");
        std::stringstream ss;
        write_taper_csv(ss, s);
        const auto rows = read_taper_csv(ss);
        bool same = rows.size() == 18;
        for (std::size_t n = 0; same && n < rows.size(); ++n) {
            same = rows[n].d_nm == s.d.values[n] && rows[n].h_nm == s.h.values[n];
        }
        c.require(same, "CSV round trip lossless");
    }
    return c;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Criterion determinism(const char* exe)
{
    Criterion c;
    if (!exe) {
        c.require(false, "omx executable path not given");
        return c;
    }
    const fs::path dir = fs::temp_directory_path() / ("omx_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto run = [&](const std::string& threads, const std::string& name) {
        const std::string cmd = std::string("\"") + exe +
                                "\" pulse-sim --pulses 200000 --seed 2024 --dark-rate 1e5 --n-base 0.5 --threads " +
                                threads + " --out \"" + (dir / name).string() + "\"";
        return std::system(cmd.c_str()) == 0;
    };
    const bool ran = run("1", "a.csv") && run("1", "b.csv") && run("2", "c.csv") && run("4", "d.csv") &&
                     run("7", "e.csv");
    c.require(ran, "pulse-sim runs");
    if (ran) {
        const auto a = slurp(dir / "a.csv");
        c.detail << " " << a.size() << " bytes per run";
        c.require(a.size() > 1000, "non-trivial output");
        c.require(a == slurp(dir / "b.csv"), "identical across runs");
        c.require(a == slurp(dir / "c.csv") && a == slurp(dir / "d.csv") && a == slurp(dir / "e.csv"),
                  "identical across worker counts 1, 2, 4, 7");
    }
    fs::remove_all(dir);
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    bool all = true;
    const auto guarded = [&](int number, const std::string& title, auto&& body) {
        Criterion c;
        try {
            c = body();
        } catch (const std::exception& e) {
            c.require(false, std::string("exception: ") + e.what());
        }
        all = report(number, title, c) && all;
    };
    guarded(1, "thermal anchor", thermal_anchor);
    guarded(2, "strong-coupling number", strong_coupling);
    guarded(3, "scattering probability", scattering);
    guarded(4, "cooling curve", cooling);
    guarded(5, "asymmetry estimator", estimator);
    guarded(6, "heating kernel", heating_kernel);
    guarded(7, "OMIT properties", omit_properties);
    guarded(8, "fit round trips", fits);
    guarded(9, "taper", taper);
    guarded(10, "determinism", [&] { return determinism(argc > 1 ? argv[1] : nullptr); });
    std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
    return all ? 0 : 1;
}
