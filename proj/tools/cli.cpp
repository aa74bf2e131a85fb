#include "cli.hpp"

#include "omx/diagnostics.hpp"
#include "omx/fitkit.hpp"
#include "omx/geometry.hpp"
#include "omx/io.hpp"
#include "omx/om_core.hpp"
#include "omx/presets.hpp"
#include "omx/pulsed.hpp"
#include "omx/spectra.hpp"
#include "omx/units.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

namespace omx::cli {
namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Settings shared by every subcommand.
struct RunConfig {
    std::string device;
    std::string output; // empty = stdout
    std::uint64_t seed = 0;
    std::string format = "csv";
    std::string config;

    OutputFormat output_format() const { return format == "json" ? OutputFormat::json : OutputFormat::csv; }
};

// Writes through `body` either to the --out file or to the given stream.
void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& body)
{
    if (cfg.output.empty()) {
        body(out);
        out.flush();
        return;
    }
    std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
    if (!file) throw UsageError("cannot write " + cfg.output);
    body(file);
    file.flush();
    if (!file) throw UsageError("write failed: " + cfg.output);
}

void emit_json(const RunConfig& cfg, std::ostream& out, const Json& j)
{
    emit(cfg, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

Device resolve_device(const std::string& name_or_path)
{
    const std::filesystem::path p(name_or_path);
    if (p.extension() == ".json" || std::filesystem::is_regular_file(p)) {
        return device_from_json(read_json_file(p));
    }
    return device_preset(name_or_path);
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    return in;
}

Table read_table_file(const std::string& path)
{
    auto in = open_input(path);
    if (std::filesystem::path(path).extension() == ".json") return read_table_json(in);
    return read_table_csv(in);
}

std::optional<std::size_t> find_column(const Table& t, std::string_view name)
{
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - t.columns.begin());
}

std::size_t require_column(const Table& t, std::string_view name)
{
    const auto c = find_column(t, name);
    if (!c) throw UsageError("input is missing column '" + std::string(name) + "'");
    return *c;
}

// Multiplies parameter k by factors[k], propagating the covariance.
FitResult rescale(FitResult fit, const std::vector<double>& factors)
{
    const Eigen::Map<const Eigen::VectorXd> s(factors.data(), static_cast<Eigen::Index>(factors.size()));
    fit.values = fit.values.cwiseProduct(s);
    if (fit.covariance.size() > 0) fit.covariance = s.asDiagonal() * fit.covariance * s.asDiagonal();
    return fit;
}

int fit_exit(const FitResult& fit) { return fit.converged ? exit_ok : exit_numeric; }

// -- config files -------------------------------------------------------------

bool truthy(const std::string& v)
{
    return v == "true" || v == "1" || v == "on" || v == "yes";
}

// Rewrites argv so that `key = value` lines of --config act like flags placed
// before any flag given on the command line (later occurrences win).
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args)
{
    std::string path;
    for (std::size_t k = 1; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
    }
    if (path.empty()) return args;

    // Locate the (possibly nested) subcommand.
    CLI::App* sub = &app;
    std::size_t insert_at = 1;
    for (std::size_t k = 1; k < args.size(); ++k) {
        const auto& a = args[k];
        if (a == "--config" || a == "--format" || a == "--out") {
            ++k;
            continue;
        }
        if (!a.empty() && a[0] == '-') continue;
        CLI::App* next = nullptr;
        try {
            next = sub->get_subcommand(a);
        } catch (const CLI::OptionNotFound&) {
        }
        if (!next) {
            if (sub != &app) break;
            continue;
        }
        sub = next;
        insert_at = k + 1;
    }

    std::vector<std::string> root_items;
    std::vector<std::string> sub_items;
    CLI::ConfigINI ini;
    for (const auto& item : ini.from_file(path)) {
        if (item.name == "++" || item.name == "--") continue;
        std::string name = item.name;
        std::replace(name.begin(), name.end(), '_', '-');
        if (name == "config") continue;
        CLI::App* owner = sub;
        const CLI::Option* opt = nullptr;
        while (owner) {
            opt = owner->get_option_no_throw("--" + name);
            if (opt) break;
            owner = owner->get_parent();
        }
        if (!opt) throw UsageError("unknown key '" + item.name + "' in " + path);
        auto& dst = owner == &app ? root_items : sub_items;
        if (opt->get_expected_min() == 0) {
            if (!item.inputs.empty() && truthy(item.inputs.front())) dst.push_back("--" + name);
            continue;
        }
        dst.push_back("--" + name);
        for (const auto& v : item.inputs) dst.push_back(v);
    }
    std::vector<std::string> rewritten;
    rewritten.push_back(args[0]);
    rewritten.insert(rewritten.end(), root_items.begin(), root_items.end());
    rewritten.insert(rewritten.end(), args.begin() + 1, args.begin() + static_cast<std::ptrdiff_t>(insert_at));
    rewritten.insert(rewritten.end(), sub_items.begin(), sub_items.end());
    rewritten.insert(rewritten.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
    return rewritten;
}

// -- subcommands --------------------------------------------------------------

struct DeviceArgs {
    std::string name;
    std::string path;
    std::string only;
};

int cmd_device_list(const RunConfig& cfg, std::ostream& out)
{
    const auto names = device_preset_names();
    if (cfg.output_format() == OutputFormat::json) {
        emit_json(cfg, out, Json(names));
        return exit_ok;
    }
    emit(cfg, out, [&](std::ostream& os) {
        for (const auto& n : names) os << n << '\n';
    });
    return exit_ok;
}

int cmd_device_show(const RunConfig& cfg, const DeviceArgs& a, std::ostream& out)
{
    const Device d = resolve_device(a.name);
    Json j = device_to_json(d);
    j["q_opt"] = d.optical().quality_factor();
    j["q_m"] = d.mechanical().quality_factor();
    j["sideband_ratio"] = d.sideband_ratio();
    j["sideband_resolved"] = d.sideband_resolved();
    emit_json(cfg, out, j);
    return exit_ok;
}

// With a preset name writes that preset to `path`; otherwise `path` is a
// directory receiving <name>.json for every preset.
int cmd_device_export(const DeviceArgs& a)
{
    const auto write = [](const std::filesystem::path& file, const Device& d) {
        std::ofstream os(file, std::ios::binary | std::ios::trunc);
        if (!os) throw UsageError("cannot write " + file.string());
        os << device_to_json(d).dump(2) << '\n';
    };
    if (!a.only.empty()) {
        write(a.path, resolve_device(a.only));
        return exit_ok;
    }
    std::filesystem::create_directories(a.path);
    for (const auto& n : device_preset_names()) write(std::filesystem::path(a.path) / (n + ".json"), device_preset(n));
    return exit_ok;
}

struct CoolArgs {
    double nc_min = 1e-3;
    double nc_max = 4800.0;
    std::size_t points = 200;
    std::string heating = "published";
    std::string spacing = "log";
};

HeatingParams resolve_heating(const std::string& choice)
{
    if (choice == "published") return HeatingParams::published();
    if (choice == "zero") return HeatingParams::none(HeatingParams::published().n_th0);
    return heating_from_json(read_json_file(choice));
}

int cmd_cool_curve(const RunConfig& cfg, const CoolArgs& a, std::ostream& out)
{
    const Device d = resolve_device(cfg.device);
    const HeatingParams h = resolve_heating(a.heating);
    if (!(a.nc_min > 0.0 && a.nc_max > a.nc_min) || a.points < 2) {
        throw UsageError("need 0 < nc-min < nc-max and at least 2 points");
    }
    const auto grid =
        a.spacing == "log" ? logspace(a.nc_min, a.nc_max, a.points) : linspace(a.nc_min, a.nc_max, a.points);
    Table t{{"n_c", "C", "gamma_eff_hz", "n_m", "t_eff_k"}, {}};
    for (const auto& p : cooling_curve(d, h, grid)) {
        t.rows.push_back({p.n_c, p.cooperativity, hz_from_angular(p.gamma_eff), p.n_m,
                          temperature_from_occupancy(d.mechanical().omega_m(), p.n_m)});
    }
    emit(cfg, out, [&](std::ostream& os) { write_table(os, t, cfg.output_format()); });
    return exit_ok;
}

struct OmitArgs {
    double n_c = 8e4;
    std::optional<double> detuning_hz;
    std::optional<double> span_hz;
    std::optional<double> center_hz;
    std::size_t points = 2001;
    std::string model = "rwa";
    // map only
    std::optional<double> detuning_span_hz;
    std::size_t detunings = 41;
};

int cmd_omit(const RunConfig& cfg, const OmitArgs& a, std::ostream& out)
{
    const Device d = resolve_device(cfg.device);
    const double omega_m_hz = hz_from_angular(d.mechanical().omega_m());
    const double detuning_hz = a.detuning_hz.value_or(-omega_m_hz);
    const double span_hz = a.span_hz.value_or(3.0 * hz_from_angular(d.optical().kappa()));
    const double center_hz = a.center_hz.value_or(-detuning_hz);
    if (!(span_hz > 0.0) || a.points < 2) throw UsageError("need a positive span and at least 2 points");
    std::vector<double> grid = linspace(angular_from_hz(center_hz - span_hz / 2), angular_from_hz(center_hz + span_hz / 2),
                                        a.points);
    const auto model = a.model == "full" ? OmitModel::full : OmitModel::rotating_wave;
    const auto trace = omit_reflection(d, a.n_c, angular_from_hz(detuning_hz), grid, model);
    if (cfg.output_format() == OutputFormat::csv) {
        emit(cfg, out, [&](std::ostream& os) { write_trace_csv(os, trace); });
        return exit_ok;
    }
    Table t{{"freq_hz", "re", "im"}, {}};
    for (std::size_t k = 0; k < trace.size(); ++k) {
        t.rows.push_back({hz_from_angular(trace.freq()[k]), trace.values()[k].real(), trace.values()[k].imag()});
    }
    emit(cfg, out, [&](std::ostream& os) { write_table(os, t, OutputFormat::json); });
    return exit_ok;
}

int cmd_omit_map(const RunConfig& cfg, const OmitArgs& a, std::ostream& out)
{
    const Device d = resolve_device(cfg.device);
    const double omega_m_hz = hz_from_angular(d.mechanical().omega_m());
    const double kappa_hz = hz_from_angular(d.optical().kappa());
    const double detuning_hz = a.detuning_hz.value_or(-omega_m_hz);
    const double detuning_span = a.detuning_span_hz.value_or(2.0 * kappa_hz);
    const double span_hz = a.span_hz.value_or(3.0 * kappa_hz);
    const double center_hz = a.center_hz.value_or(omega_m_hz);
    if (!(span_hz > 0.0 && detuning_span > 0.0) || a.points < 2 || a.detunings < 2) {
        throw UsageError("need positive spans and at least 2 points per axis");
    }
    const auto detunings = linspace(angular_from_hz(detuning_hz - detuning_span / 2),
                                    angular_from_hz(detuning_hz + detuning_span / 2), a.detunings);
    const auto grid =
        linspace(angular_from_hz(center_hz - span_hz / 2), angular_from_hz(center_hz + span_hz / 2), a.points);
    const auto mag = omit_map_serial(d, a.n_c, detunings, grid);
    Table t{{"detuning_hz", "freq_hz", "mag"}, {}};
    t.rows.reserve(mag.size());
    for (std::size_t i = 0; i < detunings.size(); ++i) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            t.rows.push_back({hz_from_angular(detunings[i]), hz_from_angular(grid[k]), mag[i * grid.size() + k]});
        }
    }
    emit(cfg, out, [&](std::ostream& os) { write_table(os, t, cfg.output_format()); });
    return exit_ok;
}

struct PulseArgs {
    double rep_rate = 188e3;
    double tau_ns = 80.0;
    double peak_power = 7.4e-6;
    std::optional<double> n_c;
    std::uint64_t pulses = 100000;
    std::string kernel;
    double n_base = 0.0;
    std::string sideband = "blue";
    double eta = 1.0;
    double dark_rate = 5.0;
    std::optional<double> window_ns;
    int threads = 0;
};

void write_clicks(std::ostream& os, std::span<const ClickRecord> clicks, OutputFormat format)
{
    if (format == OutputFormat::csv) {
        write_clicks_csv(os, clicks);
        return;
    }
    os << "[\n";
    for (std::size_t k = 0; k < clicks.size(); ++k) {
        os << "  {\"pulse_index\": " << clicks[k].pulse_index << ", \"t_ns\": " << format_number(clicks[k].t * 1e9)
           << ", \"label\": \"" << to_string(clicks[k].label) << "\"}" << (k + 1 < clicks.size() ? "," : "") << '\n';
    }
    os << "]\n";
}

int cmd_pulse_sim(const RunConfig& cfg, const PulseArgs& a, std::ostream& out)
{
    const Device d = resolve_device(cfg.device);
    PulseTrain train;
    train.tau = a.tau_ns * 1e-9;
    train.rep_rate = a.rep_rate;
    train.peak_power = a.peak_power;
    train.sideband = a.sideband == "red" ? Sideband::red : Sideband::blue;
    train.n_pulses = a.pulses;
    train.validate();
    DetectionChain chain{a.eta, a.dark_rate, a.window_ns.value_or(a.tau_ns) * 1e-9};
    HeatingKernel kernel{0.0, 0.0, a.n_base};
    if (!a.kernel.empty()) kernel = kernel_from_json(read_json_file(a.kernel));
    const double n_c = a.n_c ? *a.n_c
                             : intracavity_photons(d.optical(), Drive::at_detuning(d.optical(), train.detuning(d),
                                                                                   train.peak_power));
    const auto sim = simulate_clicks(d, train, chain, kernel, n_c, cfg.seed, a.threads);
    emit(cfg, out, [&](std::ostream& os) { write_clicks(os, sim.clicks, cfg.output_format()); });
    return exit_ok;
}

struct EstimateArgs {
    std::string blue;
    std::string red;
    std::optional<double> counts_blue;
    std::optional<double> counts_red;
    double pulses = 0.0;
    double dark_rate = 5.0;
    double window_ns = 80.0;
    // histogram only
    double bin_ns = 1.0;
};

std::vector<ClickRecord> read_clicks_file(const std::string& path)
{
    auto in = open_input(path);
    return read_clicks_csv(in);
}

int cmd_estimate(const RunConfig& cfg, const EstimateArgs& a, std::ostream& out)
{
    const DetectionChain chain{1.0, a.dark_rate, a.window_ns * 1e-9};
    AsymmetryResult r;
    if (a.counts_blue || a.counts_red) {
        if (!(a.counts_blue && a.counts_red)) throw UsageError("give both --counts-blue and --counts-red");
        r = estimate_occupancy(*a.counts_blue, *a.counts_red, a.pulses, chain);
    } else {
        if (a.blue.empty() || a.red.empty()) throw UsageError("give --blue and --red click files");
        const auto blue = read_clicks_file(a.blue);
        const auto red = read_clicks_file(a.red);
        r = estimate_occupancy(blue, red, a.pulses, chain);
    }
    emit_json(cfg, out, asymmetry_to_json(r));
    return exit_ok;
}

int cmd_histogram(const RunConfig& cfg, const EstimateArgs& a, std::ostream& out)
{
    const auto blue = read_clicks_file(a.blue);
    const auto red = read_clicks_file(a.red);
    const auto h = histogram(blue, red, a.bin_ns * 1e-9, a.window_ns * 1e-9, a.pulses);
    if (cfg.output_format() == OutputFormat::csv) {
        emit(cfg, out, [&](std::ostream& os) { write_histogram_csv(os, h); });
        return exit_ok;
    }
    Table t{{"bin_start_ns", "rate_hz_blue", "rate_hz_red"}, {}};
    for (std::size_t b = 0; b < h.bin_start.size(); ++b) t.rows.push_back({h.bin_start[b] * 1e9, h.rate_blue[b], h.rate_red[b]});
    emit(cfg, out, [&](std::ostream& os) { write_table(os, t, OutputFormat::json); });
    return exit_ok;
}

int cmd_taper(const RunConfig& cfg, std::ostream& out)
{
    const auto schedule = generate_schedule(cfg.device);
    if (cfg.output_format() == OutputFormat::csv) {
        emit(cfg, out, [&](std::ostream& os) { write_taper_csv(os, schedule); });
        return exit_ok;
    }
    Table t{{"cell_index", "d_nm", "h_nm"}, {}};
    for (int n = 0; n <= schedule.n_cells; ++n) {
        const auto k = static_cast<std::size_t>(n);
        t.rows.push_back({static_cast<double>(n), schedule.d.values[k], schedule.h.values[k]});
    }
    emit(cfg, out, [&](std::ostream& os) { write_table(os, t, OutputFormat::json); });
    return exit_ok;
}

struct FitArgs {
    std::string in;
    std::string branch = "red";
    bool fix_intercept = false;
    std::optional<double> n_th0;
    double n_base = 0.0;
};

SpectrumTrace read_trace_file(const std::string& path)
{
    auto in = open_input(path);
    return read_trace_csv(in);
}

int cmd_fit_lorentzian(const RunConfig& cfg, const FitArgs& a, std::ostream& out)
{
    const double to_hz = 1.0 / constants::two_pi;
    const auto fit = rescale(fit_lorentzian(read_trace_file(a.in)), {to_hz, to_hz, to_hz, 1.0});
    emit_json(cfg, out, fit_to_json(fit));
    return fit_exit(fit);
}

int cmd_fit_fano(const RunConfig& cfg, const FitArgs& a, std::ostream& out)
{
    const double to_hz = 1.0 / constants::two_pi;
    const auto fit = rescale(fit_fano(read_trace_file(a.in)), {to_hz, to_hz, 1.0, 1.0, 1.0});
    emit_json(cfg, out, fit_to_json(fit));
    return fit_exit(fit);
}

int cmd_fit_g0(const RunConfig& cfg, const FitArgs& a, std::ostream& out)
{
    const Device d = resolve_device(cfg.device);
    const Table t = read_table_file(a.in);
    const auto c_nc = require_column(t, "n_c");
    const auto c_gamma = require_column(t, "gamma_hz");
    const auto c_sigma = find_column(t, "sigma_hz");
    std::vector<LinewidthPoint> points;
    for (const auto& row : t.rows) {
        points.push_back({row[c_nc], angular_from_hz(row[c_gamma]), c_sigma ? angular_from_hz(row[*c_sigma]) : 0.0});
    }
    const auto branch = a.branch == "blue" ? Branch::blue : Branch::red;
    const double to_hz = 1.0 / constants::two_pi;
    const auto fit = rescale(
        fit_g0_from_linewidths(points, d.optical().kappa(), d.mechanical().gamma_0(), branch, a.fix_intercept),
        {to_hz, to_hz, to_hz});
    emit_json(cfg, out, fit_to_json(fit));
    return fit_exit(fit);
}

int cmd_fit_heating(const RunConfig& cfg, const FitArgs& a, std::ostream& out)
{
    const Device d = resolve_device(cfg.device);
    const Table t = read_table_file(a.in);
    const auto c_nc = require_column(t, "n_c");
    const auto c_nm = require_column(t, "n_m");
    const auto c_sigma = find_column(t, "sigma");
    std::vector<OccupancyPoint> points;
    for (const auto& row : t.rows) points.push_back({row[c_nc], row[c_nm], c_sigma ? row[*c_sigma] : 0.0});
    const auto fit = fit_heating_params(points, d, a.n_th0);
    emit_json(cfg, out, fit_to_json(fit));
    return fit_exit(fit);
}

int cmd_fit_kernel(const RunConfig& cfg, const FitArgs& a, std::ostream& out)
{
    const Table t = read_table_file(a.in);
    const auto c_rate = require_column(t, "rep_rate_hz");
    const auto c_nm = require_column(t, "n_m");
    std::vector<RateOccupancy> points;
    for (const auto& row : t.rows) points.push_back({row[c_rate], row[c_nm]});
    emit_json(cfg, out, kernel_to_json(fit_heating_kernel(points, a.n_base)));
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cavity optomechanics simulation and analysis toolkit"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    app.add_option("--format", cfg.format, "Output format for tables")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--out", cfg.output, "Output file (default stdout)");
    app.add_option("--config", cfg.config, "File of `key = value` lines; flags take precedence");

    // device
    DeviceArgs dev;
    auto* device = app.add_subcommand("device", "List, show or export device presets");
    device->require_subcommand(1);
    auto* device_list = device->add_subcommand("list", "Preset names");
    auto* device_show = device->add_subcommand("show", "Preset JSON with derived quantities");
    device_show->add_option("name", dev.name, "Preset name or device JSON")->required();
    auto* device_export = device->add_subcommand("export", "Write presets as JSON");
    device_export->add_option("path", dev.path, "Directory, or file when --name is given")->required();
    device_export->add_option("--name", dev.only, "Export a single preset");

    // cool-curve
    CoolArgs cool;
    auto* cool_curve = app.add_subcommand("cool-curve", "Red-sideband cooling curve with bath heating");
    cool_curve->add_option("--device", cfg.device, "Preset name or device JSON");
    cool_curve->add_option("--nc-min", cool.nc_min)->capture_default_str();
    cool_curve->add_option("--nc-max", cool.nc_max)->capture_default_str();
    cool_curve->add_option("--points", cool.points)->capture_default_str();
    cool_curve->add_option("--spacing", cool.spacing)->check(CLI::IsMember({"log", "linear"}))->capture_default_str();
    cool_curve->add_option("--heating", cool.heating, "published | zero | heating JSON")->capture_default_str();

    // omit / omit-map
    OmitArgs omit_args;
    auto* omit = app.add_subcommand("omit", "Probe reflection trace");
    auto* omit_map_cmd = app.add_subcommand("omit-map", "Probe |r| over a detuning sweep (long CSV)");
    for (auto* sub : {omit, omit_map_cmd}) {
        sub->add_option("--device", cfg.device, "Preset name or device JSON");
        sub->add_option("--nc", omit_args.n_c, "Intracavity photons")->capture_default_str();
        sub->add_option("--detuning-hz", omit_args.detuning_hz, "Pump detuning (default -omega_m)");
        sub->add_option("--span-hz", omit_args.span_hz, "Probe span (default 3 kappa)");
        sub->add_option("--center-hz", omit_args.center_hz, "Probe center relative to the pump");
        sub->add_option("--points", omit_args.points)->capture_default_str();
    }
    omit->add_option("--model", omit_args.model)->check(CLI::IsMember({"rwa", "full"}))->capture_default_str();
    omit_map_cmd->add_option("--detuning-span-hz", omit_args.detuning_span_hz, "Detuning sweep width (default 2 kappa)");
    omit_map_cmd->add_option("--detunings", omit_args.detunings)->capture_default_str();

    // pulse-sim
    PulseArgs pulse;
    auto* pulse_sim = app.add_subcommand("pulse-sim", "Time-tagged click simulation of a pulse train");
    pulse_sim->add_option("--device", cfg.device, "Preset name or device JSON");
    pulse_sim->add_option("--rep-rate", pulse.rep_rate, "Hz")->capture_default_str();
    pulse_sim->add_option("--tau-ns", pulse.tau_ns)->capture_default_str();
    pulse_sim->add_option("--peak-power", pulse.peak_power, "On-chip W")->capture_default_str();
    pulse_sim->add_option("--nc", pulse.n_c, "Photon number (overrides --peak-power)");
    pulse_sim->add_option("--pulses", pulse.pulses)->capture_default_str();
    pulse_sim->add_option("--seed", cfg.seed)->capture_default_str();
    pulse_sim->add_option("--kernel", pulse.kernel, "Heating kernel JSON");
    pulse_sim->add_option("--n-base", pulse.n_base, "Occupancy without a kernel")->capture_default_str();
    pulse_sim->add_option("--sideband", pulse.sideband)->check(CLI::IsMember({"red", "blue"}))->capture_default_str();
    pulse_sim->add_option("--eta", pulse.eta)->capture_default_str();
    pulse_sim->add_option("--dark-rate", pulse.dark_rate, "Hz")->capture_default_str();
    pulse_sim->add_option("--window-ns", pulse.window_ns, "Detection gate (default tau)");
    pulse_sim->add_option("--threads", pulse.threads, "0 = OpenMP default")->capture_default_str();

    // estimate / histogram
    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Sideband-asymmetry occupancy from two runs");
    auto* histogram_cmd = app.add_subcommand("histogram", "Binned click rates of two runs");
    for (auto* sub : {estimate, histogram_cmd}) {
        sub->add_option("--blue", est.blue, "Blue-run clicks CSV");
        sub->add_option("--red", est.red, "Red-run clicks CSV");
        sub->add_option("--pulses", est.pulses, "Pulses per run")->required();
        sub->add_option("--window-ns", est.window_ns)->capture_default_str();
    }
    estimate->add_option("--counts-blue", est.counts_blue);
    estimate->add_option("--counts-red", est.counts_red);
    estimate->add_option("--dark-rate", est.dark_rate, "Hz")->capture_default_str();
    histogram_cmd->add_option("--bin-ns", est.bin_ns)->capture_default_str();

    // taper
    auto* taper = app.add_subcommand("taper", "Defect taper schedule");
    taper->add_option("--device", cfg.device, "Design preset");

    // fit
    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit measured data");
    fit->require_subcommand(1);
    auto* fit_lor = fit->add_subcommand("lorentzian", "Trace CSV -> {center, fwhm, area, offset}");
    auto* fit_fan = fit->add_subcommand("fano", "Trace CSV -> {center, width, q, amplitude, offset}");
    auto* fit_g0 = fit->add_subcommand("g0", "n_c,gamma_hz[,sigma_hz] -> {g0, gamma_0, slope}");
    auto* fit_heat = fit->add_subcommand("heating", "n_c,n_m[,sigma] -> heating constants");
    auto* fit_kern = fit->add_subcommand("kernel", "rep_rate_hz,n_m -> heating kernel JSON");
    for (auto* sub : {fit_lor, fit_fan, fit_g0, fit_heat, fit_kern}) {
        sub->add_option("--in", fit_args.in, "Input file")->required();
    }
    for (auto* sub : {fit_g0, fit_heat}) sub->add_option("--device", cfg.device, "Preset name or device JSON");
    fit_g0->add_option("--branch", fit_args.branch)->check(CLI::IsMember({"red", "blue"}))->capture_default_str();
    fit_g0->add_flag("--fix-intercept", fit_args.fix_intercept, "Hold gamma_0 at the device value");
    fit_heat->add_option("--n-th0", fit_args.n_th0, "Fix the bath occupancy");
    fit_kern->add_option("--n-base", fit_args.n_base)->capture_default_str();

    try {
        std::vector<std::string> args = apply_config(app, raw_args);
        std::vector<const char*> argv;
        for (const auto& s : args) argv.push_back(s.c_str());
        const auto default_device = [&](CLI::App* sub, const char* name) {
            if (sub->parsed() && sub->get_option("--device")->count() == 0) cfg.device = name;
        };
        cfg.device.clear();
        app.parse(static_cast<int>(argv.size()), argv.data());

        for (auto* sub : {cool_curve, omit, omit_map_cmd}) default_device(sub, "A");
        default_device(pulse_sim, "B");
        default_device(taper, "B");
        default_device(fit_g0, "A");
        default_device(fit_heat, "A");

        if (device_list->parsed()) return cmd_device_list(cfg, out);
        if (device_show->parsed()) return cmd_device_show(cfg, dev, out);
        if (device_export->parsed()) return cmd_device_export(dev);
        if (cool_curve->parsed()) return cmd_cool_curve(cfg, cool, out);
        if (omit->parsed()) return cmd_omit(cfg, omit_args, out);
        if (omit_map_cmd->parsed()) return cmd_omit_map(cfg, omit_args, out);
        if (pulse_sim->parsed()) return cmd_pulse_sim(cfg, pulse, out);
        if (estimate->parsed()) return cmd_estimate(cfg, est, out);
        if (histogram_cmd->parsed()) return cmd_histogram(cfg, est, out);
        if (taper->parsed()) return cmd_taper(cfg, out);
        if (fit_lor->parsed()) return cmd_fit_lorentzian(cfg, fit_args, out);
        if (fit_fan->parsed()) return cmd_fit_fano(cfg, fit_args, out);
        if (fit_g0->parsed()) return cmd_fit_g0(cfg, fit_args, out);
        if (fit_heat->parsed()) return cmd_fit_heating(cfg, fit_args, out);
        if (fit_kern->parsed()) return cmd_fit_kernel(cfg, fit_args, out);
        return exit_usage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

} // namespace omx::cli
