#pragma once

// Plain-text trace formats. CSV files use '.' decimals, LF line endings and
// shortest round-trip number formatting, so the same data always produces
// the same bytes.
//
//   S-parameters   f_hz,re,im,mag_db
//   real trace     <x>,<y>[,y_err]      e.g. x_hz,counts
//   bias map       bias_v,x_hz,counts   (long format, bias-major)
//
// JSON trace object:
//   {"type":"trace","meta":{...},"x":[...],"y":[...],"y_err":[...]}
//   {"type":"sparam","meta":{...},"f_hz":[...],"re":[...],"im":[...]}

#include <filesystem>
#include <string>
#include <string_view>

#include "sawlab/qd.hpp"
#include "sawlab/trace.hpp"

namespace sawlab::io {

// Shortest decimal that parses back to exactly `v`.
std::string format_number(double v);

std::string sparam_to_csv(const SParamTrace& t);
SParamTrace sparam_from_csv(std::string_view text, const std::string& source = "<csv>");

std::string trace_to_csv(const Trace& t, const std::string& x_column, const std::string& y_column);
// Reads the first two columns as (x, y) and a third as y_err. Also accepts
// the S-parameter format, taking f_hz and |S|^2.
Trace trace_from_csv(std::string_view text, const std::string& source = "<csv>");

std::string map_to_csv(const qd::BiasMap& map);
// Plateau annotations for a map: intervals, offsets and the row -> plateau
// assignment (null for dark rows).
std::string map_plateaus_json(const qd::BiasMap& map);

std::string trace_to_json(const Trace& t);
std::string sparam_to_json(const SParamTrace& t);
Trace trace_from_json(std::string_view text, const std::string& source = "<json>");
SParamTrace sparam_from_json(std::string_view text, const std::string& source = "<json>");

std::string read_file(const std::filesystem::path& path);
// Writes bytes verbatim (binary mode, no newline translation).
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sawlab::io
