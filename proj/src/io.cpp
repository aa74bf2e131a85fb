#include "omx/io.hpp"

#include "omx/units.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace omx {

std::string format_number(double v)
{
    // Shortest round-trip form, but plain digits for integers up to 1e16.
    char buf[64];
    const double mag = std::abs(v);
    const bool fixed = mag >= 1.0 && mag < 1e16 && v == std::trunc(v);
    const auto res = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                           : std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw FormatError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

// Reads the header and all non-empty data lines of a CSV stream.
std::vector<std::vector<std::string>> read_csv(std::istream& in, std::vector<std::string>& header)
{
    std::string line;
    header.clear();
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw FormatError("CSV input is empty");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw FormatError("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(header.size()));
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

void expect_header(const std::vector<std::string>& got, std::initializer_list<std::string_view> want)
{
    if (got.size() != want.size() || !std::equal(got.begin(), got.end(), want.begin())) {
        std::string w;
        for (auto s : want) w += (w.empty() ? "" : ",") + std::string(s);
        throw FormatError("unexpected CSV header; want '" + w + "'");
    }
}

double number_field(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw FormatError(std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

Json number_or_null(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

Json device_to_json(const Device& device)
{
    Json j;
    j["label"] = device.label();
    j["omega_c_hz"] = hz_from_angular(device.optical().omega_c());
    j["kappa_hz"] = hz_from_angular(device.optical().kappa());
    j["kappa_e_hz"] = hz_from_angular(device.optical().kappa_e());
    j["g0_hz"] = hz_from_angular(device.g0());
    j["omega_m_hz"] = hz_from_angular(device.mechanical().omega_m());
    j["gamma0_hz"] = hz_from_angular(device.mechanical().gamma_0());
    if (device.g0_alt()) j["g0_alt_hz"] = hz_from_angular(*device.g0_alt());
    return j;
}

Device device_from_json(const nlohmann::json& j)
{
    std::optional<double> alt;
    if (j.contains("g0_alt_hz") && !j.at("g0_alt_hz").is_null()) alt = angular_from_hz(number_field(j, "g0_alt_hz"));
    return Device(OpticalMode::from_hz(number_field(j, "omega_c_hz"), number_field(j, "kappa_hz"),
                                       number_field(j, "kappa_e_hz")),
                  MechanicalMode::from_hz(number_field(j, "omega_m_hz"), number_field(j, "gamma0_hz")),
                  angular_from_hz(number_field(j, "g0_hz")), j.value("label", std::string{}), alt);
}

Json heating_to_json(const HeatingParams& h)
{
    Json j;
    j["n_th0"] = h.n_th0;
    j["alpha_sat"] = h.alpha_sat;
    j["beta_sat"] = h.beta_sat;
    j["alpha_lin"] = h.alpha_lin;
    return j;
}

HeatingParams heating_from_json(const nlohmann::json& j)
{
    HeatingParams h{number_field(j, "n_th0"), number_field(j, "alpha_sat"), number_field(j, "beta_sat"),
                    number_field(j, "alpha_lin")};
    h.validate();
    return h;
}

Json kernel_to_json(const HeatingKernel& k)
{
    Json j;
    j["delta"] = k.delta;
    j["tau_th_s"] = k.tau_th;
    j["n_base"] = k.n_base;
    return j;
}

HeatingKernel kernel_from_json(const nlohmann::json& j)
{
    HeatingKernel k{number_field(j, "delta"), number_field(j, "tau_th_s"), j.value("n_base", 0.0)};
    k.validate();
    return k;
}

Json design_to_json(const DesignParams& d)
{
    Json j;
    j["label"] = d.label;
    j["a_nm"] = d.a;
    j["w_nm"] = d.w;
    j["r_nm"] = d.r;
    j["d0_nm"] = d.d0;
    j["h0_nm"] = d.h0;
    j["dN_nm"] = d.dN;
    j["hN_nm"] = d.hN;
    j["u_y_nm"] = d.u_y;
    j["fillet_nm"] = d.fillet;
    j["delta_x"] = d.delta_x;
    j["M"] = d.m_exp;
    j["n_cells"] = d.n_cells;
    return j;
}

Json asymmetry_to_json(const AsymmetryResult& r)
{
    Json j;
    j["n_m"] = r.n_m;
    j["stderr"] = r.std_error;
    j["counts_blue"] = r.counts_blue;
    j["counts_red"] = r.counts_red;
    j["dark_estimate"] = r.dark_estimate;
    j["clamped"] = r.clamped;
    return j;
}

Json fit_to_json(const FitResult& fit)
{
    Json j;
    for (std::size_t k = 0; k < fit.names.size(); ++k) {
        Json p;
        p["value"] = number_or_null(fit.values[static_cast<Eigen::Index>(k)]);
        p["stderr"] = number_or_null(fit.stderr_of(fit.names[k]));
        j[fit.names[k]] = p;
    }
    Json diag;
    diag["converged"] = fit.converged;
    diag["iterations"] = fit.iterations;
    diag["residual_norm"] = number_or_null(fit.residual_norm);
    if (!fit.message.empty()) diag["message"] = fit.message;
    if (!fit.frozen.empty()) diag["frozen"] = fit.frozen;
    j["_fit"] = diag;
    return j;
}

void write_table(std::ostream& out, const Table& table, OutputFormat format)
{
    if (format == OutputFormat::csv) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
        out << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
            out << '\n';
        }
        return;
    }
    // JSON rows are written by hand so numbers use the same shortest form as CSV.
    out << "[\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << "  {";
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const double v = table.rows[r][c];
            out << (c ? ", " : "") << '"' << table.columns[c] << "\": " << (std::isfinite(v) ? format_number(v) : "null");
        }
        out << '}' << (r + 1 < table.rows.size() ? "," : "") << '\n';
    }
    out << "]\n";
}

Table read_table_csv(std::istream& in)
{
    Table t;
    const auto rows = read_csv(in, t.columns);
    for (const auto& fields : rows) {
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_number(f));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table read_table_json(std::istream& in)
{
    const auto j = Json::parse(in);
    if (!j.is_array()) throw FormatError("table JSON must be an array of row objects");
    Table t;
    for (const auto& row : j) {
        if (t.columns.empty()) {
            for (const auto& [key, _] : row.items()) t.columns.push_back(key);
        }
        std::vector<double> values;
        for (const auto& c : t.columns) {
            const auto& v = row.at(c);
            values.push_back(v.is_null() ? std::nan("") : v.get<double>());
        }
        t.rows.push_back(std::move(values));
    }
    return t;
}

void write_trace_csv(std::ostream& out, const SpectrumTrace& trace)
{
    out << (trace.is_complex() ? "freq_hz,re,im\n" : "freq_hz,value\n");
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << format_number(hz_from_angular(trace.freq()[k])) << ',' << format_number(trace.values()[k].real());
        if (trace.is_complex()) out << ',' << format_number(trace.values()[k].imag());
        out << '\n';
    }
}

SpectrumTrace read_trace_csv(std::istream& in, TraceKind kind)
{
    std::vector<std::string> header;
    const auto rows = read_csv(in, header);
    const bool complex_trace = header.size() == 3;
    if (complex_trace) {
        expect_header(header, {"freq_hz", "re", "im"});
    } else {
        expect_header(header, {"freq_hz", "value"});
    }
    std::vector<double> freq;
    std::vector<std::complex<double>> values;
    for (const auto& r : rows) {
        freq.push_back(angular_from_hz(parse_number(r[0])));
        values.emplace_back(parse_number(r[1]), complex_trace ? parse_number(r[2]) : 0.0);
    }
    if (complex_trace) return SpectrumTrace::complex(kind, std::move(freq), std::move(values));
    std::vector<double> re(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) re[k] = values[k].real();
    return SpectrumTrace::real(kind, std::move(freq), re);
}

std::string_view to_string(ClickLabel label)
{
    switch (label) {
    case ClickLabel::red: return "red";
    case ClickLabel::blue: return "blue";
    case ClickLabel::dark: return "dark";
    }
    return "dark";
}

ClickLabel parse_click_label(std::string_view text)
{
    if (text == "red") return ClickLabel::red;
    if (text == "blue") return ClickLabel::blue;
    if (text == "dark") return ClickLabel::dark;
    throw FormatError("unknown click label '" + std::string(text) + "'");
}

void write_clicks_csv(std::ostream& out, std::span<const ClickRecord> clicks)
{
    out << "pulse_index,t_ns,label\n";
    for (const auto& c : clicks) {
        out << c.pulse_index << ',' << format_number(c.t * 1e9) << ',' << to_string(c.label) << '\n';
    }
}

std::vector<ClickRecord> read_clicks_csv(std::istream& in)
{
    std::vector<std::string> header;
    const auto rows = read_csv(in, header);
    expect_header(header, {"pulse_index", "t_ns", "label"});
    std::vector<ClickRecord> clicks;
    clicks.reserve(rows.size());
    for (const auto& r : rows) {
        std::uint64_t index = 0;
        const auto res = std::from_chars(r[0].data(), r[0].data() + r[0].size(), index);
        if (res.ec != std::errc{} || res.ptr != r[0].data() + r[0].size()) {
            throw FormatError("bad pulse index '" + r[0] + "'");
        }
        clicks.push_back({index, parse_number(r[1]) / 1e9, parse_click_label(r[2])});
    }
    return clicks;
}

void write_histogram_csv(std::ostream& out, const Histogram& h)
{
    out << "bin_start_ns,rate_hz_blue,rate_hz_red\n";
    for (std::size_t b = 0; b < h.bin_start.size(); ++b) {
        out << format_number(h.bin_start[b] * 1e9) << ',' << format_number(h.rate_blue[b]) << ','
            << format_number(h.rate_red[b]) << '\n';
    }
}

void write_taper_csv(std::ostream& out, const TaperSchedule& schedule)
{
    out << "cell_index,d_nm,h_nm\n";
    for (int n = 0; n <= schedule.n_cells; ++n) {
        const auto k = static_cast<std::size_t>(n);
        out << n << ',' << format_number(schedule.d.values[k]) << ',' << format_number(schedule.h.values[k]) << '\n';
    }
}

std::vector<TaperRow> read_taper_csv(std::istream& in)
{
    std::vector<std::string> header;
    const auto rows = read_csv(in, header);
    expect_header(header, {"cell_index", "d_nm", "h_nm"});
    std::vector<TaperRow> out;
    for (const auto& r : rows) {
        out.push_back({static_cast<int>(parse_number(r[0])), parse_number(r[1]), parse_number(r[2])});
    }
    return out;
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return nlohmann::json::parse(in);
}

} // namespace omx
