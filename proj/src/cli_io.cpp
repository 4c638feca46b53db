#include "gpwave/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gpwave/dynamics.hpp"
#include "gpwave/plot.hpp"

#ifndef GPWAVE_VERSION
#define GPWAVE_VERSION "unknown"
#endif

namespace gpwave {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const std::set<std::string> kRequired{"t"};

ojson family_defaults(double amplitude, double width, double drift) {
  return ojson{{"name", "gaussian"}, {"amplitude", amplitude}, {"width", width}, {"drift", drift}};
}

std::string describe(const ojson& v) {
  std::string d = v.dump();
  return d.size() > 40 ? d.substr(0, 37) + "..." : d;
}

[[noreturn]] void type_mismatch(const std::string& key, const std::string& expected, const ojson& v) {
  throw ConfigError(ErrorCode::ConfigTypeMismatch, key,
                    "config key '" + key + "': expected " + expected + ", got " + describe(v));
}

const std::vector<std::string>* allowed_strings(const std::string& key) {
  static const std::vector<std::string> engines{"gp", "hydro", "both"};
  static const std::vector<std::string> modes{"ueps", "veps"};
  static const std::vector<std::string> families{"gaussian", "ring", "random-bandlimited",
                                                 "soliton-perturbation"};
  if (key == "engine") return &engines;
  if (key == "mode") return &modes;
  if (key == "family.name") return &families;
  return nullptr;
}

ojson normalize(const std::string& key, const ojson& v, const ojson& def) {
  if (def.is_number_unsigned()) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      type_mismatch(key, "a non-negative integer", v);
    return v.get<std::uint64_t>();
  }
  if (def.is_number_integer()) {
    if (!v.is_number_integer()) type_mismatch(key, "an integer", v);
    return v.get<std::int64_t>();
  }
  if (def.is_number_float()) {
    if (!v.is_number()) type_mismatch(key, "a number", v);
    const double d = v.get<double>();
    if (!std::isfinite(d)) type_mismatch(key, "a finite number", v);
    return d;
  }
  if (def.is_string()) {
    if (!v.is_string()) type_mismatch(key, "a string", v);
    if (const auto* allowed = allowed_strings(key)) {
      const std::string s = v.get<std::string>();
      if (std::find(allowed->begin(), allowed->end(), s) == allowed->end()) {
        std::string list;
        for (const auto& a : *allowed) list += (list.empty() ? "" : "|") + a;
        type_mismatch(key, "one of " + list, v);
      }
    }
    return v;
  }
  if (def.is_array()) {
    ojson arr = v.is_number() ? ojson::array({v}) : v;
    if (!arr.is_array()) type_mismatch(key, "an array of numbers", v);
    ojson out = ojson::array();
    for (const auto& e : arr) {
      if (!e.is_number()) type_mismatch(key, "an array of numbers", v);
      out.push_back(e.get<double>());
    }
    if (out.empty()) type_mismatch(key, "a non-empty array", v);
    if (key == "t_window" && out.size() != 2) type_mismatch(key, "two numbers [lo, hi]", v);
    if (key == "eps")
      for (const auto& e : out)
        if (!(e.get<double>() > 0)) type_mismatch(key, "positive values", v);
    return out;
  }
  if (def.is_object()) {
    if (!v.is_object()) type_mismatch(key, "an object", v);
    for (const auto& [k, _] : v.items())
      if (!def.contains(k))
        throw ConfigError(ErrorCode::ConfigUnknownKey, key + "." + k,
                          "unknown config key '" + key + "." + k + "'");
    ojson out = ojson::object();
    for (const auto& [k, d] : def.items())
      out[k] = v.contains(k) ? normalize(key + "." + k, v.at(k), d) : d;
    return out;
  }
  return v;
}

std::string tag_eps(double eps) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "eps = %g", eps);
  return buf;
}

void merge_into(ExperimentReport& dst, const ExperimentReport& src, const std::string& tag) {
  for (const Series& s : src.series) {
    Series* d = nullptr;
    for (Series& e : dst.series)
      if (e.name == s.name) d = &e;
    if (!d) d = &dst.add_series(s.name);
    for (std::size_t i = 0; i < s.x.size(); ++i) d->add(s.param[i], s.x[i], s.y[i]);
  }
  for (const auto& [name, f] : src.fits) dst.fits.push_back({name + "@" + tag, f});
  for (const auto& [name, v] : src.constants) dst.constants.push_back({name + "@" + tag, v});
  for (Verdict v : src.verdicts) {
    if (v.quantity.find("eps = ") == std::string::npos) v.quantity += " (" + tag + ")";
    dst.verdicts.push_back(v);
  }
  dst.parameters[src.id + "@" + tag] = src.parameters;
}

ExperimentReport run_simulate(const RunConfig& c, const fs::path& root) {
  const GridSpec gs = c.grid();
  const GridPtr g = gs.make();
  const DataFamily fam = c.family();
  const std::vector<double> eps_list = c.eps();
  const std::string engine = c.get<std::string>("engine");
  const double t_max = c.get<double>("t_max"), dt_cfg = c.get<double>("dt");
  const int samples = std::max(1, c.get<int>("samples"));

  ExperimentReport rep;
  rep.id = "simulate";
  rep.parameters["grid"] = gs.to_json();
  rep.parameters["family"] = fam.to_json();
  rep.parameters["eps"] = eps_list;
  rep.parameters["t_max"] = t_max;
  rep.parameters["engine"] = engine;

  auto solver = [&](double eps) {
    SolverConfig sc;
    sc.dt = dt_cfg > 0 ? dt_cfg : default_dt(*g, eps);
    sc.t_max = t_max;
    sc.log_every = std::max(1, step_count(t_max, sc.dt) / samples);
    return sc;
  };
  auto drift = [](const std::vector<double>& e) {
    double worst = 0;
    for (double v : e) worst = std::max(worst, std::abs(v - e.front()));
    return e.front() != 0.0 ? worst / std::abs(e.front()) : worst;
  };

  if (engine == "gp" || engine == "both") {
    std::vector<GpTrajectory> runs = parallel_map<GpTrajectory>(int(eps_list.size()), [&](int i) {
      return evolve_gp(generate_psi(fam, g, eps_list[i]), eps_list[i], solver(eps_list[i]));
    });
    Series& se = rep.add_series("energy");
    Series& sm = rep.add_series("min_modulus");
    Series& sq = rep.add_series("mass");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const double eps = eps_list[i];
      std::vector<double> energies;
      for (const StepLog& l : runs[i].logs) {
        se.add(eps, l.time, l.energy);
        sm.add(eps, l.time, l.min_modulus);
        sq.add(eps, l.time, l.mass);
        energies.push_back(l.energy);
      }
      // the 1e-8 pin belongs to the conservation run; arbitrary runs only report it
      rep.verdicts.push_back(check_range("2", "GP relative energy drift (" + tag_eps(eps) + ")",
                                         drift(energies), 0.0, 1e-8, true));
      rep.verdicts.push_back(check_range("2", "GP run reaches t_max, " + std::string(to_string(runs[i].reason)) +
                                                  " (" + tag_eps(eps) + ")",
                                         runs[i].times.back() / t_max, 1.0 - 1e-12, kInfinity));
      if (!root.empty()) {
        char stem[48];
        std::snprintf(stem, sizeof stem, "gp-eps%g", eps);
        write_trajectory(root.string(), stem, runs[i]);
      }
    }
  }
  if (engine == "hydro") {
    std::vector<HydroTrajectory> runs = parallel_map<HydroTrajectory>(int(eps_list.size()), [&](int i) {
      return evolve_hydro(generate(fam, g, eps_list[i]), solver(eps_list[i]));
    });
    Series& se = rep.add_series("hydro_energy");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const double eps = eps_list[i];
      std::vector<double> energies;
      for (std::size_t k = 0; k < runs[i].snapshots.size(); ++k) {
        energies.push_back(hydro_energy(runs[i].snapshots[k]));
        se.add(eps, runs[i].times[k], energies.back());
      }
      rep.verdicts.push_back(check_range("2", "hydro relative energy drift (" + tag_eps(eps) + ")",
                                         drift(energies), 0.0, 1e-8, true));
      rep.verdicts.push_back(check_range("2", "hydro run reaches t_max, " + std::string(to_string(runs[i].reason)) +
                                                  " (" + tag_eps(eps) + ")",
                                         runs[i].times.back() / t_max, 1.0 - 1e-12, kInfinity));
      if (!root.empty()) {
        fs::create_directories(root / "snapshots");
        char name[64];
        std::snprintf(name, sizeof name, "hydro-eps%g-a.gpwf", eps);
        write_snapshot((root / "snapshots" / name).string(), runs[i].final_state().a, runs[i].times.back());
      }
    }
  }
  if (engine == "both") {
    for (double eps : eps_list) {
      EngineConfig ec;
      ec.grid = gs;
      ec.eps = eps;
      ec.t_max = t_max;
      ec.samples = samples;
      merge_into(rep, compare_engines(fam, ec), tag_eps(eps));
    }
  }
  return rep;
}

ApproxConfig approx_config(const RunConfig& c) {
  ApproxConfig a;
  a.grid = c.grid();
  a.s = c.get<double>("s");
  a.dt = c.get<double>("dt");
  if (c.has("kappa")) a.kappa = c.get<double>("kappa");
  a.fit_eps = c.get<double>("fit_eps");
  a.fit_t = c.get<double>("fit_t");
  const auto w = c.get<std::vector<double>>("t_window");
  a.t_window = {w[0], w[1]};
  return a;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.' || ch == '_') ? ch : '_';
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::string failure_line(const Verdict& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " = %.6g not in [%.6g, %.6g]", v.value, v.lo, v.hi);
  return "criterion " + v.criterion + ": " + v.quantity + buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "decay", "compare-wave", "compare-leps",
                                              "soliton", "lp-check", "sweep"};
  return names;
}

ojson command_defaults(const std::string& command) {
  ojson d;
  d["command"] = command;
  if (command == "simulate") {
    d["dim"] = 1;
    d["n"] = 256;
    d["box_length"] = 20.0;
    d["eps"] = {0.3};
    d["t_max"] = 1.0;
    d["dt"] = 0.0;
    d["samples"] = 10;
    d["engine"] = "gp";
    d["seed"] = std::uint64_t{0};
    d["family"] = family_defaults(0.5, 1.0, 0.5);
  } else if (command == "decay") {
    d["dim"] = 2;
    d["n"] = 256;
    d["box_length"] = 256.0;
    d["eps"] = {0.01};
    d["mode"] = "ueps";
    d["t_max"] = 90.0;
    d["points"] = 4;
    d["ratio"] = std::numbers::sqrt2;
  } else if (command == "compare-wave" || command == "compare-leps") {
    const bool leps = command == "compare-leps";
    d["dim"] = leps ? 2 : 1;
    d["n"] = leps ? 256 : 1024;
    d["box_length"] = leps ? 80.0 : 40.0;
    d["eps"] = leps ? ojson{0.1} : ojson{0.05, 0.1, 0.2, 0.4};
    d["t"] = nullptr;
    d["s"] = 4.0;
    d["dt"] = leps ? 0.01 : 0.0;
    if (leps) d["kappa"] = 0.5;
    d["seed"] = std::uint64_t{0};
    d["family"] = leps ? family_defaults(0.003, 3.0, 0.0) : family_defaults(1.0, 1.0, 1.0);
    d["fit_eps"] = 0.1;
    d["fit_t"] = 1.0;
    d["t_window"] = leps ? ojson{2.0, 8.0} : ojson{0.25, 2.0};
  } else if (command == "soliton") {
    d["eps"] = {0.1, 0.14, 0.2, 0.28, 0.4};
    d["cells_per_unit"] = 5.0;
    d["margin"] = 40.0;
    d["horizon_factor"] = 1.5;
    d["offset_fraction"] = 0.25;
    d["samples"] = 60;
  } else if (command == "lp-check") {
    d["dim"] = 2;
    d["n"] = 128;
    d["box_length"] = 3 * std::numbers::pi * 0.99;
    d["eps"] = {0.2};
    d["seed"] = std::uint64_t{1};
    d["s"] = 1.0;
    d["functions"] = 20;
  } else if (command == "sweep") {
    d["dim"] = 1;
    d["n"] = 512;
    d["box_length"] = 64.0;
    d["eps"] = {0.05, 0.1, 0.2, 0.4};
    d["t_max"] = 20.0;
    d["sample_dt"] = 0.1;
    d["dt"] = 0.0;
    d["s"] = 4.0;
    d["norm_bound"] = 2.0;
    d["seed"] = std::uint64_t{0};
    d["family"] = family_defaults(1.0, 1.0, 1.0);
  } else {
    std::string list;
    for (const auto& n : command_names()) list += (list.empty() ? "" : "|") + n;
    throw ConfigError(ErrorCode::ConfigTypeMismatch, "command",
                      "config key 'command': expected one of " + list + ", got \"" + command + "\"");
  }
  return d;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridSpec RunConfig::grid() const {
  return GridSpec{get<int>("dim"), get<int>("n"), get<double>("box_length")};
}

DataFamily RunConfig::family() const {
  DataFamily f;
  if (has("family")) {
    const ojson& j = values.at("family");
    f.name = j.at("name").get<std::string>();
    f.amplitude = j.at("amplitude").get<double>();
    f.width = j.at("width").get<double>();
    f.drift = j.at("drift").get<double>();
  }
  if (has("seed")) f.seed = get<std::uint64_t>("seed");
  if (has("s")) f.norm_s = get<double>("s");
  return f;
}

RunConfig parse_config(const ojson& doc, const ojson& overrides) {
  if (!doc.is_object()) type_mismatch("<root>", "a JSON object", doc);
  if (!overrides.is_object()) type_mismatch("<overrides>", "a JSON object", overrides);
  ojson merged = doc;
  for (const auto& [k, v] : overrides.items()) {
    if (k == "family" && v.is_object() && merged.contains(k) && merged[k].is_object())
      for (const auto& [fk, fv] : v.items()) merged[k][fk] = fv;
    else
      merged[k] = v;
  }

  RunConfig cfg;
  if (merged.contains("output_dir")) {
    if (!merged["output_dir"].is_string()) type_mismatch("output_dir", "a string", merged["output_dir"]);
    cfg.output_dir = merged["output_dir"].get<std::string>();
    merged.erase("output_dir");
  }
  if (!merged.contains("command"))
    throw ConfigError(ErrorCode::ConfigMissingField, "command", "config is missing required key 'command'");
  if (!merged["command"].is_string()) type_mismatch("command", "a string", merged["command"]);
  cfg.command = merged["command"].get<std::string>();
  const ojson defaults = command_defaults(cfg.command);

  for (const auto& [k, _] : merged.items())
    if (!defaults.contains(k))
      throw ConfigError(ErrorCode::ConfigUnknownKey, k,
                        "unknown config key '" + k + "' for command " + cfg.command);
  cfg.values = ojson::object();
  for (const auto& [k, d] : defaults.items()) {
    if (merged.contains(k)) {
      ojson type = d;
      if (d.is_null()) type = ojson::array();  // required keys are number arrays
      cfg.values[k] = k == "command" ? merged[k] : normalize(k, merged[k], type);
    } else if (d.is_null() || kRequired.count(k)) {
      throw ConfigError(ErrorCode::ConfigMissingField, k,
                        "config for " + cfg.command + " is missing required key '" + k + "'");
    } else {
      cfg.values[k] = d;
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path, const ojson& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, overrides);
}

RunConfig config_from_manifest(const std::string& path, const ojson& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + path);
  ojson m;
  try {
    m = ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "manifest " + path + " is not valid JSON: " + e.what());
  }
  if (!m.contains("config")) throw ConfigError(ErrorCode::ConfigMissingField, "config", "manifest has no 'config'");
  ojson o = overrides;
  if (!o.contains("output_dir")) o["output_dir"] = fs::path(path).parent_path().parent_path().string();
  RunConfig cfg = parse_config(m["config"], o);
  if (m.contains("hash") && overrides.empty() && m["hash"] != cfg.hash())
    throw Error(ErrorCode::InvalidArgument, "manifest hash does not match its config");
  return cfg;
}

std::string code_version() { return GPWAVE_VERSION; }

ExperimentReport run_experiment(const RunConfig& c, const fs::path& root) {
  const std::string& cmd = c.command;
  if (cmd == "simulate") return run_simulate(c, root);
  if (cmd == "decay") {
    ExperimentReport rep;
    rep.id = "decay";
    for (double eps : c.eps()) {
      DecayConfig d;
      d.grid = c.grid();
      d.eps = eps;
      d.slowed = c.get<std::string>("mode") == "ueps";
      d.t_end = c.get<double>("t_max");
      d.points = c.get<int>("points");
      d.ratio = c.get<double>("ratio");
      ExperimentReport one = decay_exponent(d);
      if (c.eps().size() == 1) return one;
      merge_into(rep, one, tag_eps(eps));
    }
    return rep;
  }
  if (cmd == "compare-wave")
    return error_vs_wave(c.family(), c.eps(), c.get<std::vector<double>>("t"), approx_config(c));
  if (cmd == "compare-leps")
    return error_vs_leps(c.family(), c.eps(), c.get<std::vector<double>>("t"), approx_config(c));
  if (cmd == "soliton") {
    SolitonConfig s;
    s.cells_per_unit = c.get<double>("cells_per_unit");
    s.margin = c.get<double>("margin");
    s.horizon_factor = c.get<double>("horizon_factor");
    s.offset_fraction = c.get<double>("offset_fraction");
    s.samples = c.get<int>("samples");
    return soliton_shift(c.eps(), s);
  }
  if (cmd == "lp-check") {
    LpConfig l;
    l.grid = c.grid();
    l.seed = c.get<std::uint64_t>("seed");
    l.functions = c.get<int>("functions");
    l.s = c.get<double>("s");
    l.eps = c.eps().front();
    return lp_suite(l);
  }
  if (cmd == "sweep") {
    SweepConfig s;
    s.grid = c.grid();
    s.t_max = c.get<double>("t_max");
    s.sample_dt = c.get<double>("sample_dt");
    s.dt = c.get<double>("dt");
    s.norm_bound = c.get<double>("norm_bound");
    return sweep_theorem1(c.family(), c.eps(), s);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown command " + cmd);
}

RunOutcome run_command(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.dir = fs::path(config.output_dir) / (config.command + "-" + config.hash());
  fs::remove_all(out.dir / "plots");
  fs::remove_all(out.dir / "snapshots");
  fs::create_directories(out.dir / "plots");
  fs::create_directories(out.dir / "snapshots");

  ojson files = ojson::array();
  ojson report_json;
  for (const char* stale : {"series.csv", "report.json"}) fs::remove(out.dir / stale);
  try {
    ExperimentReport rep = run_experiment(config, out.dir);
    for (const Verdict& v : rep.verdicts)
      if (!v.informational && !v.pass) out.failures.push_back(failure_line(v));
    out.status = out.failures.empty() ? 0 : 1;

    write_text(out.dir / "series.csv", rep.to_csv());
    report_json = rep.to_json();
    report_json["failures"] = out.failures;
    write_text(out.dir / "report.json", report_json.dump(2) + "\n");

    for (const Series& s : rep.series) {
      bool plottable = false;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        plottable = plottable || (std::isfinite(s.x[i]) && std::isfinite(s.y[i]));
      if (!plottable) continue;
      const std::string rel = "plots/" + sanitize(s.name) + ".svg";
      emit_plot(s, choose_plot_kind(s), (out.dir / rel).string());
    }
    for (const auto& [name, fit] : rep.fits) {
      if (fit.xs.empty()) continue;
      Series s;
      s.name = "fit " + name;
      for (std::size_t i = 0; i < fit.xs.size(); ++i) s.add(0.0, fit.xs[i], fit.ys[i]);
      const std::string rel = "plots/fit-" + sanitize(name) + ".svg";
      emit_plot(s, PlotKind::LogLog, (out.dir / rel).string(), &fit);
    }
  } catch (const Error& e) {
    out.status = 2;
    out.failures = {std::string(to_string(e.code())) + ": " + e.what()};
    report_json = ojson::object();
    report_json["id"] = config.command;
    report_json["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    report_json["failures"] = out.failures;
    write_text(out.dir / "report.json", report_json.dump(2) + "\n");
  }
  std::vector<std::string> written;
  for (const auto& entry : fs::recursive_directory_iterator(out.dir))
    if (entry.is_regular_file()) {
      const std::string rel = fs::relative(entry.path(), out.dir).generic_string();
      if (rel != "manifest.json") written.push_back(rel);
    }
  std::sort(written.begin(), written.end());
  for (const auto& w : written) files.push_back(w);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ojson manifest;
  manifest["command"] = config.command;
  manifest["hash"] = config.hash();
  manifest["config"] = config.values;
  manifest["code_version"] = code_version();
  manifest["status"] = out.status;
  manifest["files"] = files;
  manifest["wall_time_s"] = wall;
  write_text(out.dir / "manifest.json", manifest.dump(2) + "\n");
  return out;
}

}  // namespace gpwave
