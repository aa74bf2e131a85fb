#pragma once

#include "omx/geometry.hpp"
#include "omx/least_squares.hpp"
#include "omx/om_core.hpp"
#include "omx/pulsed.hpp"
#include "omx/spectra.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// File formats. Frequencies on disk are cyclic Hz, times in ns, lengths in nm;
// conversion to the internal angular / SI units happens here and only here.
namespace omx {

using Json = nlohmann::ordered_json;

// Shortest decimal that parses back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text);

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -- JSON objects ----------------------------------------------------------

Json device_to_json(const Device& device);
Device device_from_json(const nlohmann::json& j);

Json heating_to_json(const HeatingParams& h);
HeatingParams heating_from_json(const nlohmann::json& j);

Json kernel_to_json(const HeatingKernel& k);
HeatingKernel kernel_from_json(const nlohmann::json& j);

Json design_to_json(const DesignParams& d);

Json asymmetry_to_json(const AsymmetryResult& r);

// {name: {value, stderr}, ...} plus solver diagnostics under "_fit".
Json fit_to_json(const FitResult& fit);

// -- numeric tables --------------------------------------------------------

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

enum class OutputFormat { csv, json };

void write_table(std::ostream& out, const Table& table, OutputFormat format);
Table read_table_csv(std::istream& in);
// Array of row objects as written by write_table(json).
Table read_table_json(std::istream& in);

// -- spectra ---------------------------------------------------------------

// `freq_hz,re,im` for complex traces, `freq_hz,value` for real ones.
void write_trace_csv(std::ostream& out, const SpectrumTrace& trace);
SpectrumTrace read_trace_csv(std::istream& in, TraceKind kind = TraceKind::generic);

// -- clicks ----------------------------------------------------------------

std::string_view to_string(ClickLabel label);
ClickLabel parse_click_label(std::string_view text);

// `pulse_index,t_ns,label`
void write_clicks_csv(std::ostream& out, std::span<const ClickRecord> clicks);
std::vector<ClickRecord> read_clicks_csv(std::istream& in);

// `bin_start_ns,rate_hz_blue,rate_hz_red`
void write_histogram_csv(std::ostream& out, const Histogram& h);

// -- taper -----------------------------------------------------------------

// `cell_index,d_nm,h_nm`
void write_taper_csv(std::ostream& out, const TaperSchedule& schedule);

struct TaperRow {
    int cell_index;
    double d_nm;
    double h_nm;
};
std::vector<TaperRow> read_taper_csv(std::istream& in);

// -- misc ------------------------------------------------------------------

nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace omx
