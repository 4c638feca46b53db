// gpwave: run one experiment and write its report directory.
//
//   gpwave simulate --eps 0.3 --tmax 1
//   gpwave --config run.json --eps 0.1 --eps 0.2
//   gpwave --manifest out/sweep-0123456789abcdef/manifest.json --out rerun

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpwave/cli_io.hpp"

using nlohmann::ordered_json;

namespace {

void print_failures_json(const std::vector<std::string>& failures) {
  std::cerr << ordered_json{{"failures", failures}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical Gross-Pitaevskii numerical laboratory"};
  std::string command, config_path, manifest_path, out_dir, engine;
  std::optional<int> dim, n;
  std::optional<double> box, tmax, dt, s;
  std::optional<std::uint64_t> seed;
  std::vector<double> eps, times;
  bool print_config = false;

  std::string names;
  for (const auto& c : gpwave::command_names()) names += (names.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + names);
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--manifest", manifest_path, "Rerun the config stored in a manifest.json")
      ->check(CLI::ExistingFile);
  app.add_option("--dim", dim, "Spatial dimension");
  app.add_option("--n", n, "Grid points per axis (power of two)");
  app.add_option("--box", box, "Box length");
  app.add_option("--eps", eps, "Scaling parameter; repeat for a scan")->take_all();
  app.add_option("--t", times, "Comparison times; repeat for a grid")->take_all();
  app.add_option("--tmax", tmax, "Final time");
  app.add_option("--dt", dt, "Time step (0 = automatic)");
  app.add_option("--s", s, "Sobolev index");
  app.add_option("--seed", seed, "Seed of the data family");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--engine", engine, "Nonlinear engine for simulate")
      ->check(CLI::IsMember({"gp", "hydro", "both"}));
  app.add_flag("--print-config", print_config, "Print the canonical config and hash, then exit");
  app.allow_extras(false);
  CLI11_PARSE(app, argc, argv);

  ordered_json over = ordered_json::object();
  if (!command.empty()) over["command"] = command;
  if (dim) over["dim"] = *dim;
  if (n) over["n"] = *n;
  if (box) over["box_length"] = *box;
  if (!eps.empty()) over["eps"] = eps;
  if (!times.empty()) over["t"] = times;
  if (tmax) over["t_max"] = *tmax;
  if (dt) over["dt"] = *dt;
  if (s) over["s"] = *s;
  if (seed) over["seed"] = *seed;
  if (!out_dir.empty()) over["output_dir"] = out_dir;
  if (!engine.empty()) over["engine"] = engine;

  gpwave::RunConfig cfg;
  try {
    if (!manifest_path.empty())
      cfg = gpwave::config_from_manifest(manifest_path, over);
    else if (!config_path.empty())
      cfg = gpwave::parse_config_file(config_path, over);
    else
      cfg = gpwave::parse_config(ordered_json::object(), over);
  } catch (const gpwave::Error& e) {
    std::cerr << "gpwave: " << e.what() << "\n";
    print_failures_json({std::string(gpwave::to_string(e.code())) + ": " + e.what()});
    return 2;
  }

  if (print_config) {
    std::cout << cfg.values.dump(2) << "\nhash " << cfg.hash() << "\n";
    return 0;
  }

  gpwave::RunOutcome out;
  try {
    out = gpwave::run_command(cfg);
  } catch (const std::exception& e) {
    std::cerr << "gpwave: " << e.what() << "\n";
    print_failures_json({e.what()});
    return 2;
  }
  std::cout << (out.status == 0 ? "PASS " : "FAIL ") << out.dir.string() << "\n";
  for (const auto& f : out.failures) std::cout << "  " << f << "\n";
  if (out.status != 0) print_failures_json(out.failures);
  return out.status;
}
