#include "sawlab/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sawlab/cli/pipelines.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/io.hpp"

#ifndef SAWLAB_VERSION
#define SAWLAB_VERSION "unknown"
#endif

namespace sawlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool noiseless = false;
};

// Files are collected in memory and written together once the command ends.
class Outputs {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Context {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_path;
  DeviceConfig cfg;
  std::uint64_t seed = 0;
  Snr snr;
  fs::path out_dir;
  Outputs outputs;
  std::ostream& out;
  std::ostream& err;
};

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_outputs(const Context& ctx, int exit_code) {
  json m;
  m["command"] = ctx.command;
  m["arguments"] = ctx.arguments;
  m["config_path"] = ctx.config_path;
  m["seed"] = ctx.seed;
  m["noise"] = ctx.snr ? json(*ctx.snr) : json("off");
  m["tool_version"] = SAWLAB_VERSION;
  m["timestamp"] = timestamp();
  m["exit_code"] = exit_code;
  json names = json::array();
  for (const auto& [name, content] : ctx.outputs.files()) {
    io::write_file(ctx.out_dir / name, content);
    names.push_back(name);
  }
  m["outputs"] = std::move(names);
  io::write_file(ctx.out_dir / "manifest.json", m.dump(2) + "\n");
}

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "sawlab-out";
}

std::string gap_label(double gap_m) { return io::format_number(std::round(gap_m * 1e12) / 1e6); }

std::string param_line(const estimate::FitResult& r, const std::string& name) {
  std::ostringstream s;
  s << std::left << std::setw(12) << name << std::right << std::setw(16) << std::setprecision(8) << r.value(name)
    << "  +- " << std::setprecision(3) << r.sigma(name) << "\n";
  return s.str();
}

json stark_json(const estimate::StarkSlopeFit& s) {
  json j = json::parse(s.fit.to_json());
  json plateaus = json::array();
  for (const auto& p : s.plateaus) {
    plateaus.push_back({{"plateau", p.plateau},
                        {"rows_used", p.rows_used},
                        {"slope_hz_per_v", p.slope_hz_per_v},
                        {"slope_sigma", p.slope_sigma},
                        {"intercept_hz", p.intercept_hz}});
  }
  j["plateaus"] = std::move(plateaus);
  j["discontinuities_v"] = s.discontinuities;
  return j;
}

void check_drive_frequency(const DeviceConfig& cfg, double f) {
  const double f0 = cfg.drive.mode.f0;
  if (!(std::abs(f - f0) <= acoustic::kResonatorBandFraction * f0)) {
    std::ostringstream s;
    s << "--drive-freq " << f << " Hz lies outside the simulated band " << f0 * (1 - acoustic::kResonatorBandFraction)
      << " .. " << f0 * (1 + acoustic::kResonatorBandFraction) << " Hz";
    throw UsageError(s.str());
  }
}

// ---------------------------------------------------------------- commands

struct LayerSweepOptions {
  std::optional<double> sigma_min, sigma_max;
  std::optional<std::size_t> points;
};

int cmd_layer_sweep(Context& ctx, const LayerSweepOptions& o) {
  auto& s = ctx.cfg.layer_sweep;
  if (o.sigma_min) s.sigma_min = *o.sigma_min;
  if (o.sigma_max) s.sigma_max = *o.sigma_max;
  if (o.points) s.sigma_points = *o.points;
  if (!(s.sigma_min > 0.0 && s.sigma_max > s.sigma_min)) {
    throw UsageError("sigma range must satisfy 0 < sigma-min < sigma-max");
  }
  if (s.sigma_points < 2) throw UsageError("--points must be >= 2");
  const auto rows = layer_sweep(ctx.cfg);
  ctx.outputs.add("layer_sweep.csv", layer_sweep_csv(rows));
  ctx.outputs.add("depth_sweep.csv", depth_sweep_csv(depth_sweep(ctx.cfg)));
  const auto c = layer_coeffs(ctx.cfg);
  ctx.out << "alpha^2 at depth " << ctx.cfg.layer.depth * 1e9 << " nm: " << c.alpha2 << "\n"
          << "loss at sigma_xx = " << ctx.cfg.layer.sigma_xx << " S/m: "
          << layer::attenuation_rate_hz(ctx.cfg.layer.sigma_xx, c, s.frequency) << " Hz\n";
  return kExitOk;
}

struct DelayLineCliOptions {
  std::vector<double> gaps_um;
  bool fit = false;
  bool compare = false;
  std::optional<std::size_t> trials;
};

int cmd_delay_line(Context& ctx, const DelayLineCliOptions& o) {
  auto& dl = ctx.cfg.delay_line;
  if (!o.gaps_um.empty()) {
    dl.gaps.clear();
    for (double g : o.gaps_um) {
      if (!(g > 0.0)) throw UsageError("--gaps entries must be > 0 um");
      dl.gaps.push_back(g / 1e6);
    }
    std::sort(dl.gaps.begin(), dl.gaps.end());
  }
  if (dl.gaps.empty()) throw UsageError("at least one gap is required");
  std::set<double> distinct(dl.gaps.begin(), dl.gaps.end());
  if (o.fit && distinct.size() < 2) {
    throw UsageError("--fit needs at least two distinct gaps; one gap leaves the loss slope rank deficient");
  }

  if (o.compare) {
    const double layer_loss = dl.layer_loss_hz > 0.0 ? dl.layer_loss_hz : doped_layer_loss_hz(ctx.cfg);
    if (distinct.size() < 2) throw UsageError("--compare needs at least two distinct gaps");
    const auto cmp = compare_substrates(ctx.cfg, layer_loss, o.trials.value_or(dl.trials), ctx.seed, ctx.snr);
    ctx.outputs.add("peaks_bulk.csv", peak_table_csv(cmp.bulk));
    ctx.outputs.add("peaks_doped.csv", peak_table_csv(cmp.doped));
    ctx.outputs.add("compare.json", comparison_json(cmp));
    ctx.out << "doped-layer loss: " << layer_loss << " Hz\n"
            << "slope agreement at " << cmp.k << " sigma: " << cmp.agree << "/" << cmp.trials << " trials ("
            << 100.0 * cmp.agree_fraction() << " %)\n";
    return kExitOk;
  }

  DelayLineOptions opt;
  opt.layer_loss_hz = dl.layer_loss_hz;
  const auto run = run_delay_line(ctx.cfg, opt, ctx.seed, ctx.snr);
  for (std::size_t i = 0; i < run.gaps.size(); ++i) {
    ctx.outputs.add("s21_gap_" + gap_label(run.gaps[i]) + "um.csv", io::sparam_to_csv(run.s21[i]));
  }
  ctx.outputs.add("peaks.csv", peak_table_csv(run));
  if (distinct.size() >= 2) {
    const auto fit = estimate::fit_loss_per_length(run.gaps, run.peak_db, run.err_db);
    ctx.outputs.add("loss_fit.json", fit.to_json());
    ctx.out << param_line(fit, "slope_db_per_mm") << param_line(fit, "intercept_db");
  }
  return kExitOk;
}

int cmd_resonator(Context& ctx) {
  ResonatorRun run;
  run.s11 = resonator_trace(ctx.cfg, ctx.seed, ctx.snr);
  ctx.outputs.add("s11.csv", io::sparam_to_csv(run.s11));
  run.fit = estimate::fit_s11(run.s11);
  ctx.outputs.add("s11_fit.json", run.fit.to_json());
  for (const char* q : {"q_int", "q_ext", "q_loaded"}) ctx.out << param_line(run.fit, q);
  if (!run.fit.converged) {
    ctx.err << "error: S11 fit did not converge; s11_fit.json holds the best-so-far estimate\n";
    return kExitModel;
  }
  return kExitOk;
}

struct QdOptions {
  std::optional<double> bias;
  std::optional<double> drive_freq;
  bool drive_off = false;
  bool sweep_drive = false;
};

int cmd_qd_spectrum(Context& ctx, const QdOptions& o) {
  if (o.drive_freq) check_drive_frequency(ctx.cfg, *o.drive_freq);
  if (o.sweep_drive) {
    if (o.drive_off) throw UsageError("--sweep-drive cannot be combined with --drive-off");
    const double bias = o.bias.value_or(default_sweep_bias(ctx.cfg));
    const auto run = run_drive_sweep(ctx.cfg, bias, ctx.seed, ctx.snr);
    ctx.outputs.add("drive_sweep.csv", drive_sweep_csv(run));
    ctx.outputs.add("drive_sweep_fit.json", run.fit.to_json());
    ctx.out << param_line(run.fit, "center") << param_line(run.fit, "fwhm") << param_line(run.fit, "q_acoustic");
    if (!run.fit.converged) {
      ctx.err << "error: delta^2 fit did not converge\n";
      return kExitModel;
    }
    return kExitOk;
  }

  const auto drive = o.drive_off ? std::nullopt : drive_at(ctx.cfg, o.drive_freq);
  if (o.bias) {
    const auto run = run_spectrum(ctx.cfg, *o.bias, drive, ctx.seed, ctx.snr);
    ctx.outputs.add("spectrum.csv", io::trace_to_csv(run.spectrum, "x_hz", "counts"));
    if (run.dark) {
      ctx.err << "warning: bias " << *o.bias << " V lies outside every charge plateau; spectrum is all zero\n";
      return kExitOk;
    }
    if (run.padding_warning) ctx.err << "warning: spectrum support reaches within 5 filter widths of the scan edge\n";
    if (!run.fit) {
      ctx.err << "error: spectrum fit failed: " << run.fit_error << "\n";
      return kExitModel;
    }
    ctx.outputs.add("spectrum_fit.json", run.fit->to_json());
    for (const auto& p : run.fit->params) ctx.out << param_line(*run.fit, p.name);
    return run.fit->converged ? kExitOk : kExitModel;
  }

  const auto run = run_bias_map(ctx.cfg, drive, ctx.seed, ctx.snr, true);
  ctx.outputs.add("pl_map.csv", io::map_to_csv(run.map));
  ctx.outputs.add("plateaus.json", io::map_plateaus_json(run.map));
  if (!run.stark_fitted) {
    ctx.err << "warning: Stark slope not fitted: " << run.stark_error << "\n";
    return kExitOk;
  }
  ctx.outputs.add("stark_fit.json", stark_json(run.stark).dump(2) + "\n");
  for (const auto& p : run.stark.fit.params) ctx.out << param_line(run.stark.fit, p.name);
  return kExitOk;
}

int reproduce(Context& ctx, const std::string& id) {
  auto& cfg = ctx.cfg;
  if (id == "figS2a" || id == "figS2b") {
    if (id == "figS2a") {
      ctx.outputs.add("layer_sweep.csv", layer_sweep_csv(layer_sweep(cfg)));
    } else {
      ctx.outputs.add("depth_sweep.csv", depth_sweep_csv(depth_sweep(cfg)));
    }
    return kExitOk;
  }
  if (id == "fig2a" || id == "fig2b") {
    // One 400 um delay line on each substrate.
    const double gap = 400e-6;
    const double k2_doped = layer::k2_effective(cfg.layer.depth, cfg.k2_calibration);
    const double loss_doped = doped_layer_loss_hz(cfg);
    const auto grid = delay_line_grid(cfg);
    json summary;
    const struct {
      const char* name;
      std::optional<double> k2;
      double layer_loss;
    } substrates[] = {{"bulk", std::nullopt, 0.0}, {"doped", k2_doped, loss_doped}};
    std::uint64_t stream = 0;
    for (const auto& sub : substrates) {
      const auto spec = delay_line_spec(cfg, gap, sub.layer_loss, cfg.delay_line.crosstalk, sub.k2);
      const bool reflection = id == "fig2a";
      auto model = reflection ? acoustic::s11_delay_line_trace(grid, spec)
                              : acoustic::s21_delay_line_trace(grid, spec, cfg.material);
      double level = 0.0;
      for (auto s : model.s()) level = std::max(level, std::abs(s));
      const double scale = ctx.snr ? estimate::noise_scale_for_snr(level, *ctx.snr) : 0.0;
      const auto trace = estimate::synthesize(
          model, {estimate::NoiseKind::gaussian_additive, scale, estimate::derive_seed(ctx.seed, stream++)});
      double extreme = reflection ? 1e300 : 0.0;
      for (auto s : trace.s()) extreme = reflection ? std::min(extreme, std::norm(s)) : std::max(extreme, std::norm(s));
      const std::string base = std::string(reflection ? "s11_" : "s21_") + sub.name;
      ctx.outputs.add(base + ".csv", io::sparam_to_csv(trace));
      summary[sub.name] = {{reflection ? "min_db" : "peak_db", 10.0 * std::log10(extreme)},
                           {"k2", sub.k2.value_or(cfg.delay_line.idt.k2)},
                           {"layer_loss_hz", sub.layer_loss}};
    }
    ctx.outputs.add("summary.json", summary.dump(2) + "\n");
    return kExitOk;
  }
  if (id == "fig2c") {
    const auto cmp = compare_substrates(cfg, doped_layer_loss_hz(cfg), cfg.delay_line.trials, ctx.seed, ctx.snr);
    ctx.outputs.add("peaks_bulk.csv", peak_table_csv(cmp.bulk));
    ctx.outputs.add("peaks_doped.csv", peak_table_csv(cmp.doped));
    ctx.outputs.add("compare.json", comparison_json(cmp));
    ctx.out << "slope agreement at 2 sigma: " << cmp.agree << "/" << cmp.trials << "\n";
    return kExitOk;
  }
  if (id == "fig2d") return cmd_resonator(ctx);
  if (id == "fig3a" || id == "fig3c") {
    const bool driven = id == "fig3c";
    const auto run = run_bias_map(cfg, driven ? drive_at(cfg, std::nullopt) : std::nullopt, ctx.seed, ctx.snr, driven);
    ctx.outputs.add("pl_map.csv", io::map_to_csv(run.map));
    ctx.outputs.add("plateaus.json", io::map_plateaus_json(run.map));
    if (driven) {
      if (!run.stark_fitted) {
        ctx.err << "error: Stark slope fit failed: " << run.stark_error << "\n";
        return kExitModel;
      }
      ctx.outputs.add("stark_fit.json", stark_json(run.stark).dump(2) + "\n");
    }
    return kExitOk;
  }
  if (id == "fig3d") {
    QdOptions o;
    o.sweep_drive = true;
    return cmd_qd_spectrum(ctx, o);
  }
  throw UsageError("unknown figure id " + id);
}

struct FitOptions {
  std::string input;
  std::string model;
};

int cmd_fit(Context& ctx, const FitOptions& o) {
  const auto text = io::read_file(o.input);
  const bool is_json = fs::path(o.input).extension() == ".json";
  estimate::FitResult r;
  if (o.model == "s11") {
    r = estimate::fit_s11(is_json ? io::sparam_from_json(text, o.input) : io::sparam_from_csv(text, o.input));
  } else {
    const Trace t = is_json ? io::trace_from_json(text, o.input) : io::trace_from_csv(text, o.input);
    r = o.model == "lorentzian" ? estimate::fit_lorentzian(t) : estimate::fit_s11_power(t);
  }
  ctx.outputs.add("fit.json", r.to_json());
  for (const auto& p : r.params) ctx.out << param_line(r, p.name);
  if (!r.converged) {
    ctx.err << "error: fit did not converge; fit.json holds the best-so-far estimate\n";
    return kExitModel;
  }
  return kExitOk;
}

void add_common(CLI::App* sub, CommonOptions& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config_path, "YAML device description");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  sub->add_option("--out", c.out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./sawlab-out)");
  sub->add_option("--seed", c.seed, "noise seed (default: config seed)");
  sub->add_flag("--noiseless", c.noiseless, "disable synthetic noise");
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig2a", "fig2b", "fig2c", "fig2d", "fig3a",
                                            "fig3c", "fig3d", "figS2a", "figS2b"};
  return ids;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SAW / quantum-dot device simulator and fitter", "sawlab"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", SAWLAB_VERSION);

  CommonOptions common;
  LayerSweepOptions layer_opt;
  DelayLineCliOptions dl_opt;
  QdOptions qd_opt;
  FitOptions fit_opt;
  std::string figure;

  auto* layer_cmd = app.add_subcommand("layer-sweep", "conductivity and depth sweeps of the doped-layer model");
  add_common(layer_cmd, common, true);
  layer_cmd->add_option("--sigma-min", layer_opt.sigma_min, "lowest conductivity, S/m");
  layer_cmd->add_option("--sigma-max", layer_opt.sigma_max, "highest conductivity, S/m");
  layer_cmd->add_option("--points", layer_opt.points, "number of log-spaced conductivities");

  auto* dl_cmd = app.add_subcommand("delay-line", "delay-line transmission versus gap and loss-per-length fit");
  add_common(dl_cmd, common, true);
  dl_cmd->add_option("--gaps", dl_opt.gaps_um, "gaps in um, comma separated")->delimiter(',');
  dl_cmd->add_flag("--fit", dl_opt.fit, "require the loss-per-length fit");
  dl_cmd->add_flag("--compare", dl_opt.compare, "Monte-Carlo slope comparison with and without the doped layer");
  dl_cmd->add_option("--trials", dl_opt.trials, "Monte-Carlo trials for --compare");

  auto* res_cmd = app.add_subcommand("resonator", "synthesize and fit a one-port resonator S11");
  add_common(res_cmd, common, true);

  auto* qd_cmd = app.add_subcommand("qd-spectrum", "filtered emission spectra, bias maps and drive sweeps");
  add_common(qd_cmd, common, true);
  qd_cmd->add_option("--bias", qd_opt.bias, "single spectrum at this gate bias, V");
  qd_cmd->add_option("--drive-freq", qd_opt.drive_freq, "SAW drive frequency, Hz");
  auto* on = qd_cmd->add_flag("--drive-on", "SAW drive on (default)");
  auto* off = qd_cmd->add_flag("--drive-off", qd_opt.drive_off, "SAW drive off");
  on->excludes(off);
  qd_cmd->add_flag("--sweep-drive", qd_opt.sweep_drive, "sweep the drive frequency and fit delta^2");

  auto* rep_cmd = app.add_subcommand("reproduce", "write the data behind one figure");
  add_common(rep_cmd, common, false);
  rep_cmd->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember(figure_ids()));

  auto* fit_cmd = app.add_subcommand("fit", "fit a trace file");
  add_common(fit_cmd, common, false);
  fit_cmd->add_option("--input", fit_opt.input, "trace file (.csv or .json)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--model", fit_opt.model, "lorentzian | s11 | s11-power")
      ->required()
      ->check(CLI::IsMember({"lorentzian", "s11", "s11-power"}));

  std::vector<const char*> argv{"sawlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    err << "run 'sawlab --help' for usage\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Context ctx{sub->get_name(), args, {}, {}, 0, {}, {}, {}, out, err};
  try {
    if (common.config_path.empty()) {
      ctx.cfg = default_config();
      ctx.config_path = "<built-in>";
    } else {
      ctx.cfg = load_config(common.config_path);
      ctx.config_path = common.config_path;
    }
    ctx.seed = common.seed.value_or(ctx.cfg.seed);
    if (!common.noiseless) ctx.snr = ctx.cfg.snr_db;
    ctx.out_dir = resolve_out_dir(common.out_dir);

    int code = kExitOk;
    try {
      if (sub == layer_cmd) code = cmd_layer_sweep(ctx, layer_opt);
      else if (sub == dl_cmd) code = cmd_delay_line(ctx, dl_opt);
      else if (sub == res_cmd) code = cmd_resonator(ctx);
      else if (sub == qd_cmd) code = cmd_qd_spectrum(ctx, qd_opt);
      else if (sub == rep_cmd) code = reproduce(ctx, figure);
      else code = cmd_fit(ctx, fit_opt);
    } catch (const FitError& e) {
      err << "error: " << e.what() << "\n";
      code = kExitModel;
    } catch (const DomainError& e) {
      err << "error: " << e.what() << "\n";
      code = kExitModel;
    }
    try {
      write_outputs(ctx, code);
    } catch (const std::exception& e) {
      err << "error: cannot write outputs to " << ctx.out_dir.string() << ": " << e.what() << "\n";
      return kExitUsage;
    }
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitModel;
  }
  return kExitUsage;
}

}  // namespace sawlab::cli
