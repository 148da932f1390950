#include "sawlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "sawlab/errors.hpp"

namespace sawlab::io {

namespace {

using json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, const std::string& where) {
  double v = 0.0;
  const char* first = field.data();
  if (!field.empty() && field.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw FormatError(where + ": not a number: '" + std::string(field) + "'");
  }
  return v;
}

Table parse_csv(std::string_view text, const std::string& source) {
  Table t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (t.header.empty()) {
      for (auto f : fields) t.header.emplace_back(f);
      continue;
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != t.header.size()) {
      throw FormatError(where + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, where));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw FormatError(source + ": empty file");
  return t;
}

std::vector<double> column(const Table& t, std::size_t c) {
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back(r[c]);
  return out;
}

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json array_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

json meta_json(const AxisMeta& m) {
  return json{{"x_label", m.x_label},
              {"x_unit", m.x_unit},
              {"y_label", m.y_label},
              {"y_unit", m.y_unit},
              {"provenance", m.provenance}};
}

AxisMeta meta_from(const json& j) {
  AxisMeta m;
  if (!j.is_object()) return m;
  m.x_label = j.value("x_label", m.x_label);
  m.x_unit = j.value("x_unit", m.x_unit);
  m.y_label = j.value("y_label", m.y_label);
  m.y_unit = j.value("y_unit", m.y_unit);
  m.provenance = j.value("provenance", m.provenance);
  return m;
}

std::vector<double> numbers_from(const json& j, const char* key, const std::string& source) {
  if (!j.contains(key) || !j[key].is_array()) throw FormatError(source + ": missing array '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_string()) {
      out.push_back(parse_number(v.get<std::string>(), source + ": " + key));
    } else {
      throw FormatError(source + ": non-numeric entry in '" + key + "'");
    }
  }
  return out;
}

json parse_json(std::string_view text, const std::string& source, const char* type) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (!j.is_object() || j.value("type", "") != type) {
    throw FormatError(source + ": expected a JSON object with \"type\": \"" + type + "\"");
  }
  return j;
}

template <typename F>
auto rethrow_domain(const std::string& source, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw FormatError(source + ": " + e.what());
  }
}

}  // namespace

std::string format_number(double v) {
  // Shortest round-trip text; plain notation for moderate magnitudes.
  char buf[400];
  const double a = std::abs(v);
  const bool plain = a == 0.0 || (a >= 1e-4 && a < 1e15);
  const auto [ptr, ec] = plain ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                               : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string sparam_to_csv(const SParamTrace& t) {
  std::string out = "f_hz,re,im,mag_db\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto s = t.s()[i];
    out += format_number(t.f()[i]);
    out += ',';
    out += format_number(s.real());
    out += ',';
    out += format_number(s.imag());
    out += ',';
    out += format_number(20.0 * std::log10(std::abs(s)));
    out += '\n';
  }
  return out;
}

SParamTrace sparam_from_csv(std::string_view text, const std::string& source) {
  const auto t = parse_csv(text, source);
  if (t.header.size() < 3 || t.header[0] != "f_hz" || t.header[1] != "re" || t.header[2] != "im") {
    throw FormatError(source + ": expected header f_hz,re,im[,mag_db]");
  }
  std::vector<std::complex<double>> s;
  for (const auto& r : t.rows) s.emplace_back(r[1], r[2]);
  return rethrow_domain(source, [&] {
    return SParamTrace(column(t, 0), std::move(s), AxisMeta{"frequency", "Hz", "S", "", ""});
  });
}

std::string trace_to_csv(const Trace& t, const std::string& x_column, const std::string& y_column) {
  const auto& err = t.y_err();
  std::string out = x_column + "," + y_column + (err ? ",y_err\n" : "\n");
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += format_number(t.x()[i]);
    out += ',';
    out += format_number(t.y()[i]);
    if (err) {
      out += ',';
      out += format_number((*err)[i]);
    }
    out += '\n';
  }
  return out;
}

Trace trace_from_csv(std::string_view text, const std::string& source) {
  const auto t = parse_csv(text, source);
  if (t.header.size() >= 3 && t.header[0] == "f_hz" && t.header[1] == "re" && t.header[2] == "im") {
    return sparam_from_csv(text, source).power();
  }
  if (t.header.size() < 2 || t.header.size() > 3) {
    throw FormatError(source + ": expected two or three columns (x, y[, y_err])");
  }
  AxisMeta meta{t.header[0], "", t.header[1], "", ""};
  return rethrow_domain(source, [&] {
    if (t.header.size() == 3) return Trace(column(t, 0), column(t, 1), column(t, 2), meta);
    return Trace(column(t, 0), column(t, 1), meta);
  });
}

std::string map_to_csv(const qd::BiasMap& map) {
  std::string out = "bias_v,x_hz,counts\n";
  for (std::size_t r = 0; r < map.bias.size(); ++r) {
    const auto b = format_number(map.bias[r]);
    for (std::size_t c = 0; c < map.frequency.size(); ++c) {
      out += b;
      out += ',';
      out += format_number(map.frequency[c]);
      out += ',';
      out += format_number(map.counts[r][c]);
      out += '\n';
    }
  }
  return out;
}

std::string map_plateaus_json(const qd::BiasMap& map) {
  json plateaus = json::array();
  for (const auto& p : map.plateaus) {
    plateaus.push_back({{"v_min", p.v_min}, {"v_max", p.v_max}, {"offset_hz", p.frequency_offset}});
  }
  json rows = json::array();
  for (const auto& rp : map.row_plateau) rows.push_back(rp ? json(*rp) : json(nullptr));
  json j{{"type", "plateaus"},
         {"stark_slope_hz_per_v", map.stark_slope},
         {"plateaus", plateaus},
         {"bias_v", array_json(map.bias)},
         {"row_plateau", rows}};
  return j.dump(2) + "\n";
}

std::string trace_to_json(const Trace& t) {
  json j{{"type", "trace"}, {"meta", meta_json(t.meta())}, {"x", array_json(t.x())}, {"y", array_json(t.y())}};
  if (t.y_err()) j["y_err"] = array_json(*t.y_err());
  return j.dump(2) + "\n";
}

std::string sparam_to_json(const SParamTrace& t) {
  std::vector<double> re, im;
  for (auto s : t.s()) {
    re.push_back(s.real());
    im.push_back(s.imag());
  }
  json j{{"type", "sparam"},
         {"meta", meta_json(t.meta())},
         {"f_hz", array_json(t.f())},
         {"re", array_json(re)},
         {"im", array_json(im)}};
  return j.dump(2) + "\n";
}

Trace trace_from_json(std::string_view text, const std::string& source) {
  const auto j = parse_json(text, source, "trace");
  auto x = numbers_from(j, "x", source);
  auto y = numbers_from(j, "y", source);
  const auto meta = meta_from(j.value("meta", json::object()));
  return rethrow_domain(source, [&] {
    if (j.contains("y_err")) return Trace(std::move(x), std::move(y), numbers_from(j, "y_err", source), meta);
    return Trace(std::move(x), std::move(y), meta);
  });
}

SParamTrace sparam_from_json(std::string_view text, const std::string& source) {
  const auto j = parse_json(text, source, "sparam");
  const auto f = numbers_from(j, "f_hz", source);
  const auto re = numbers_from(j, "re", source);
  const auto im = numbers_from(j, "im", source);
  if (re.size() != f.size() || im.size() != f.size()) throw FormatError(source + ": ragged arrays");
  std::vector<std::complex<double>> s;
  for (std::size_t i = 0; i < f.size(); ++i) s.emplace_back(re[i], im[i]);
  return rethrow_domain(source, [&] { return SParamTrace(f, std::move(s), meta_from(j.value("meta", json::object()))); });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace sawlab::io
