#include "sawlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "sawlab/errors.hpp"

namespace sawlab {

namespace {

std::string located(const std::string& source, const YAML::Mark& mark, const std::string& path,
                    const std::string& msg) {
  std::ostringstream os;
  os << source;
  if (mark.line >= 0) os << ':' << mark.line + 1 << ':' << mark.column + 1;
  os << ": " << path << ": " << msg;
  return os.str();
}

[[noreturn]] void fail(const std::string& source, const YAML::Mark& mark, const std::string& path,
                       const std::string& msg) {
  throw ConfigError(located(source, mark, path, msg), mark.line >= 0 ? mark.line + 1 : 0,
                    mark.column >= 0 ? mark.column + 1 : 0);
}

bool given(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

// Walks one mapping, records the keys it consumed and rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (given(node_) && !node_.IsMap()) fail(source_, node_.Mark(), path_, "expected a mapping");
  }

  bool present() const { return given(node_); }
  const YAML::Mark mark() const { return node_.Mark(); }
  const std::string& path() const { return path_; }
  const std::string& source() const { return source_; }

  YAML::Node take(const std::string& key) {
    known_.insert(key);
    if (!present()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& n = node_;
    return n[key];
  }

  // Stores value / per_si, e.g. per_si = 1e9 for a key given in nm.
  void number(const std::string& key, double& out, double per_si = 1.0) {
    const auto n = take(key);
    if (!given(n)) return;
    out = scalar<double>(n, key, "expected a number") / per_si;
    if (!std::isfinite(out)) fail(source_, n.Mark(), qualify(key), "must be finite");
  }

  void count(const std::string& key, std::size_t& out, std::size_t min_value) {
    const auto n = take(key);
    if (!given(n)) return;
    const auto v = scalar<long long>(n, key, "expected an integer");
    if (v < static_cast<long long>(min_value)) {
      fail(source_, n.Mark(), qualify(key), "must be >= " + std::to_string(min_value));
    }
    out = static_cast<std::size_t>(v);
  }

  void integer(const std::string& key, int& out, int min_value) {
    std::size_t v = static_cast<std::size_t>(out);
    count(key, v, static_cast<std::size_t>(min_value));
    out = static_cast<int>(v);
  }

  void u64(const std::string& key, std::uint64_t& out) {
    const auto n = take(key);
    if (!given(n)) return;
    if (n.IsScalar() && !n.Scalar().empty() && n.Scalar().front() == '-') {
      fail(source_, n.Mark(), qualify(key), "must be a non-negative integer");
    }
    out = scalar<std::uint64_t>(n, key, "expected a non-negative integer");
  }

  Section child(const std::string& key) { return Section(take(key), qualify(key), source_); }

  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.count(key)) fail(source_, kv.first.Mark(), qualify(key), "unknown key");
    }
  }

  [[noreturn]] void error(const std::string& msg) const { fail(source_, mark(), path_, msg); }
  [[noreturn]] void error_at(const YAML::Node& n, const std::string& key, const std::string& msg) const {
    fail(source_, n.Mark(), qualify(key), msg);
  }

  std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  T scalar(const YAML::Node& n, const std::string& key, const char* msg) const {
    if (!n.IsScalar()) fail(source_, n.Mark(), qualify(key), msg);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(source_, n.Mark(), qualify(key), std::string(msg) + ", got '" + n.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> known_;
};

// Runs a validate() call and reports failures at the section's position.
template <typename F>
void check(const Section& s, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    if (e.line() != 0) throw;
    s.error(e.what());
  } catch (const DomainError& e) {
    s.error(e.what());
  }
}

void require(const Section& s, bool ok, const std::string& msg) {
  if (!ok) s.error(msg);
}

std::vector<YAML::Node> sequence(Section& parent, const std::string& key, bool& present) {
  const auto n = parent.take(key);
  present = given(n);
  std::vector<YAML::Node> out;
  if (!present) return out;
  if (!n.IsSequence()) parent.error_at(n, key, "expected a list");
  for (const auto& item : n) out.push_back(item);
  return out;
}

void read_material(Section s, MaterialParams& m) {
  s.number("saw_velocity", m.saw_velocity);
  s.number("k2_bulk", m.k2_bulk);
  s.number("sigma_m", m.sigma_m);
  s.finish();
  check(s, [&] { m.validate(); });
}

void read_layer(Section s, LayerStack& l) {
  s.number("depth_nm", l.depth, 1e9);
  s.number("thickness_nm", l.thickness, 1e9);
  s.number("sigma_xx", l.sigma_xx);
  s.finish();
  check(s, [&] { l.validate(); });
}

void read_layer_sweep(Section s, LayerSweepConfig& c) {
  s.number("sigma_min", c.sigma_min);
  s.number("sigma_max", c.sigma_max);
  s.count("sigma_points", c.sigma_points, 2);
  s.number("frequency", c.frequency);
  s.number("depth_min_nm", c.depth_min, 1e9);
  s.number("depth_max_nm", c.depth_max, 1e9);
  s.count("depth_points", c.depth_points, 2);
  s.finish();
  require(s, c.sigma_min > 0 && c.sigma_max > c.sigma_min, "need 0 < sigma_min < sigma_max");
  require(s, c.depth_min > 0 && c.depth_max > c.depth_min, "need 0 < depth_min_nm < depth_max_nm");
  require(s, c.frequency > 0, "frequency must be > 0");
}

void read_mirror(Section s, acoustic::MirrorSpec& m) {
  s.integer("n_lines", m.n_lines, 1);
  s.number("reflectivity_per_line", m.reflectivity_per_line);
  s.number("stopband_center", m.stopband_center);
  s.number("stopband_width", m.stopband_width);
  s.finish();
  check(s, [&] { m.validate(); });
}

void read_resonator(Section s, ResonatorConfig& r) {
  double xr = r.params.crosstalk.real(), xi = r.params.crosstalk.imag();
  s.number("f0", r.params.f0);
  s.number("kappa_int", r.params.kappa_int);
  s.number("kappa_ext", r.params.kappa_ext);
  s.number("crosstalk_re", xr);
  s.number("crosstalk_im", xi);
  s.number("span_factor", r.span_factor);
  s.count("n_points", r.n_points, 8);
  s.finish();
  r.params.crosstalk = {xr, xi};
  check(s, [&] { r.params.validate(); });
  require(s, r.span_factor > 0, "span_factor must be > 0");
}

void read_delay_line(Section s, DelayLineConfig& d) {
  double xr = d.crosstalk.real(), xi = d.crosstalk.imag();
  s.number("center_frequency", d.idt.center_frequency);
  s.integer("n_pairs", d.idt.n_pairs, 1);
  s.number("peak_conversion", d.idt.peak_conversion);
  s.number("k2", d.idt.k2);
  bool have_gaps = false;
  const auto gaps = sequence(s, "gaps_um", have_gaps);
  if (have_gaps) {
    d.gaps.clear();
    for (const auto& g : gaps) {
      if (!g.IsScalar()) s.error_at(g, "gaps_um", "expected a number");
      try {
        d.gaps.push_back(g.as<double>() / 1e6);
      } catch (const YAML::Exception&) {
        s.error_at(g, "gaps_um", "expected a number, got '" + g.Scalar() + "'");
      }
      if (!(d.gaps.back() > 0)) s.error_at(g, "gaps_um", "gaps must be > 0");
    }
  }
  s.number("bulk_loss_hz", d.bulk_loss_hz);
  s.number("layer_loss_hz", d.layer_loss_hz);
  s.number("crosstalk_re", xr);
  s.number("crosstalk_im", xi);
  s.number("span", d.span);
  s.count("n_points", d.n_points, 8);
  s.count("trials", d.trials, 1);
  s.finish();
  d.crosstalk = {xr, xi};
  check(s, [&] { d.idt.validate(); });
  require(s, !d.gaps.empty(), "gaps_um must list at least one gap");
  require(s, d.bulk_loss_hz >= 0 && d.layer_loss_hz >= 0, "loss rates must be >= 0");
  require(s, d.span > 0, "span must be > 0");
}

void read_plateaus(Section& s, std::vector<qd::Plateau>& out) {
  bool present = false;
  const auto items = sequence(s, "plateaus", present);
  if (!present) return;
  out.clear();
  for (std::size_t i = 0; i < items.size(); ++i) {
    Section p(items[i], s.qualify("plateaus[" + std::to_string(i) + "]"), s.source());
    if (!p.present()) p.error("expected a mapping with v_min, v_max, offset");
    qd::Plateau pl{0.0, 0.0, 0.0};
    for (const char* key : {"v_min", "v_max"}) {
      if (!given(p.take(key))) p.error(std::string("missing key ") + key);
    }
    p.number("v_min", pl.v_min);
    p.number("v_max", pl.v_max);
    p.number("offset", pl.frequency_offset);
    p.finish();
    out.push_back(pl);
  }
}

void read_emitter(Section s, qd::EmitterState& e) {
  s.number("base_frequency", e.base_frequency);
  s.number("linewidth", e.linewidth_fwhm);
  s.number("stark_slope", e.stark_slope);
  s.number("brightness", e.brightness);
  read_plateaus(s, e.plateaus);
  s.finish();
  check(s, [&] { e.validate(); });
}

void read_drive(Section s, qd::ModulationDrive& d, SweepConfig& sweep) {
  s.number("frequency", d.drive_frequency);
  s.number("f0", d.mode.f0);
  s.number("kappa_int", d.mode.kappa_int);
  s.number("kappa_ext", d.mode.kappa_ext);
  s.number("delta_max", d.delta_max);
  s.number("sweep_half_width_factor", sweep.half_width_factor);
  s.count("sweep_points", sweep.n_points, 8);
  s.finish();
  check(s, [&] { d.validate(); });
  require(s, sweep.half_width_factor > 0, "sweep_half_width_factor must be > 0");
}

void read_k2_calibration(Section& root, const MaterialParams& material, layer::K2Calibration& cal) {
  bool present = false;
  const auto items = sequence(root, "k2_calibration", present);
  cal = layer::default_k2_calibration(material.k2_bulk);
  if (!present) return;
  cal.anchors.clear();
  for (std::size_t i = 0; i < items.size(); ++i) {
    Section a(items[i], "k2_calibration[" + std::to_string(i) + "]", root.source());
    if (!a.present()) a.error("expected a mapping with depth_nm, k2");
    layer::K2Anchor anchor{0.0, 0.0};
    for (const char* key : {"depth_nm", "k2"}) {
      if (!given(a.take(key))) a.error(std::string("missing key ") + key);
    }
    a.number("depth_nm", anchor.depth, 1e9);
    a.number("k2", anchor.k2);
    a.finish();
    cal.anchors.push_back(anchor);
  }
  try {
    cal.validate();
  } catch (const ConfigError& e) {
    fail(root.source(), items.empty() ? YAML::Mark::null_mark() : items.front().Mark(), "k2_calibration",
         e.what());
  }
}

}  // namespace

void DeviceConfig::validate() const {
  material.validate();
  layer.validate();
  k2_calibration.validate();
  mirror.validate();
  resonator.params.validate();
  delay_line.idt.validate();
  emitter.validate();
  drive.validate();
  if (!(filter_fwhm > 0)) throw ConfigError("filter.fwhm must be > 0");
  if (!(spectrometer.half_span > 0)) throw ConfigError("spectrometer.half_span must be > 0");
  if (!(bias_sweep.v_max > bias_sweep.v_min)) throw ConfigError("bias_sweep: need v_min < v_max");
}

DeviceConfig default_config() {
  DeviceConfig c;
  c.emitter.plateaus = {
      {-0.015, 0.000, -3.0e9},
      {0.000, 0.020, -4.0e9},
      {0.025, 0.045, -2.0e9},
  };
  c.drive.mode = acoustic::ResonatorParams{3.53388e9, 116e3, 116e3, {0.0, 0.0}};
  c.drive.drive_frequency = 3.53388e9;
  c.drive.delta_max = 1.0;
  return c;
}

DeviceConfig parse_config(const std::string& yaml_text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    fail(source_name, e.mark, "<yaml>", e.msg);
  }
  DeviceConfig c = default_config();
  Section top(root, "", source_name);
  top.u64("seed", c.seed);
  top.number("snr_db", c.snr_db);
  read_material(top.child("material"), c.material);
  read_layer(top.child("layer"), c.layer);
  read_k2_calibration(top, c.material, c.k2_calibration);
  read_layer_sweep(top.child("layer_sweep"), c.layer_sweep);
  read_mirror(top.child("mirror"), c.mirror);
  read_resonator(top.child("resonator"), c.resonator);
  read_delay_line(top.child("delay_line"), c.delay_line);
  read_emitter(top.child("emitter"), c.emitter);
  read_drive(top.child("drive"), c.drive, c.drive_sweep);
  {
    Section f = top.child("filter");
    f.number("fwhm", c.filter_fwhm);
    f.finish();
    require(f, c.filter_fwhm > 0, "fwhm must be > 0");
  }
  {
    Section sp = top.child("spectrometer");
    sp.number("half_span", c.spectrometer.half_span);
    sp.count("n_points", c.spectrometer.n_points, 8);
    sp.finish();
    require(sp, c.spectrometer.half_span > 0, "half_span must be > 0");
  }
  {
    Section b = top.child("bias_sweep");
    b.number("v_min", c.bias_sweep.v_min);
    b.number("v_max", c.bias_sweep.v_max);
    b.count("n_points", c.bias_sweep.n_points, 2);
    b.finish();
    require(b, c.bias_sweep.v_max > c.bias_sweep.v_min, "need v_min < v_max");
  }
  top.finish();
  c.source = source_name;
  return c;
}

DeviceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  auto c = parse_config(text.str(), path.string());
  c.source = path;
  return c;
}

}  // namespace sawlab
