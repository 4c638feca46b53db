#include "doctest.h"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gpwave/cli_io.hpp"
#include "gpwave/plot.hpp"

using namespace gpwave;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ConfigError config_error(const ojson& doc, const ojson& over = ojson::object()) {
  try {
    parse_config(doc, over);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("config accepted");
  return ConfigError(ErrorCode::InvalidArgument, "", "");
}

// Minimal XML well-formedness: balanced tags and quoted attributes.
bool balanced_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?') continue;
    std::size_t quotes = 0;
    for (char c : tag) quotes += c == '"';
    if (quotes % 2) return false;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
  }
  return stack.empty();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("gpwave-cli-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
  for (const std::string& cmd : command_names()) {
    if (cmd == "compare-wave" || cmd == "compare-leps") continue;
    RunConfig c = parse_config({{"command", cmd}});
    CHECK(c.command == cmd);
    CHECK(c.values == command_defaults(cmd));
  }
  RunConfig s = parse_config({{"command", "simulate"}});
  CHECK(s.get<int>("n") == 256);
  CHECK(s.eps() == std::vector<double>{0.3});
  CHECK(s.family().name == "gaussian");
  CHECK(s.output_dir == "out");
}

TEST_CASE("config errors name the offending key") {
  ConfigError e = config_error({{"command", "simulate"}, {"epz", 0.1}});
  CHECK(e.code() == ErrorCode::ConfigUnknownKey);
  CHECK(e.key() == "epz");
  CHECK(std::string(e.what()).find("epz") != std::string::npos);

  e = config_error({{"command", "simulate"}, {"family", {{"widht", 2.0}}}});
  CHECK(e.code() == ErrorCode::ConfigUnknownKey);
  CHECK(e.key() == "family.widht");

  e = config_error({{"command", "decay"}, {"engine", "gp"}});
  CHECK(e.code() == ErrorCode::ConfigUnknownKey);
  CHECK(e.key() == "engine");

  e = config_error({{"command", "simulate"}, {"n", "big"}});
  CHECK(e.code() == ErrorCode::ConfigTypeMismatch);
  CHECK(e.key() == "n");
  e = config_error({{"command", "simulate"}, {"n", 64.5}});
  CHECK(e.key() == "n");
  e = config_error({{"command", "simulate"}, {"eps", {0.1, "x"}}});
  CHECK(e.key() == "eps");
  e = config_error({{"command", "simulate"}, {"eps", {0.1, -0.2}}});
  CHECK(e.key() == "eps");
  e = config_error({{"command", "simulate"}, {"engine", "euler"}});
  CHECK(e.key() == "engine");
  e = config_error({{"command", "simulate"}, {"seed", -1}});
  CHECK(e.key() == "seed");
  e = config_error({{"command", "simulate"}, {"family", {{"name", "square"}}}});
  CHECK(e.key() == "family.name");
  e = config_error({{"command", "compare-wave"}, {"t", {1.0}}, {"t_window", {1.0}}});
  CHECK(e.key() == "t_window");
  e = config_error({{"command", "dance"}});
  CHECK(e.code() == ErrorCode::ConfigTypeMismatch);
  CHECK(e.key() == "command");

  e = config_error(ojson::object());
  CHECK(e.code() == ErrorCode::ConfigMissingField);
  CHECK(e.key() == "command");
  e = config_error({{"command", "compare-wave"}});
  CHECK(e.code() == ErrorCode::ConfigMissingField);
  CHECK(e.key() == "t");
}

TEST_CASE("flags override file values and normalize") {
  ojson file = {{"command", "simulate"}, {"n", 128}, {"eps", {0.1, 0.2}},
                {"family", {{"amplitude", 0.2}, {"width", 2.0}}}, {"output_dir", "a"}};
  ojson flags = {{"eps", 0.4}, {"box_length", 30}, {"family", {{"width", 3}}}, {"output_dir", "b"}};
  RunConfig c = parse_config(file, flags);
  CHECK(c.get<int>("n") == 128);
  CHECK(c.eps() == std::vector<double>{0.4});
  CHECK(c.values["box_length"].is_number_float());
  CHECK(c.get<double>("box_length") == 30.0);
  CHECK(c.family().amplitude == 0.2);
  CHECK(c.family().width == 3.0);
  CHECK(c.output_dir == "b");
  // the output directory is not part of the canonical form
  CHECK(c.canonical().find("output_dir") == std::string::npos);

  RunConfig i = parse_config({{"command", "simulate"}, {"box_length", 20}});
  RunConfig f = parse_config({{"command", "simulate"}, {"box_length", 20.0}});
  CHECK(i.hash() == f.hash());
}

TEST_CASE("canonical form round-trips and hashes with FNV-1a") {
  RunConfig c = parse_config({{"command", "compare-leps"}, {"t", {2, 4, 8}}, {"seed", 3}});
  RunConfig again = parse_config(c.values);
  CHECK(again.canonical() == c.canonical());
  CHECK(again.hash() == c.hash());
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(c.canonical())));
  CHECK(c.hash() == hex);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  RunConfig other = parse_config({{"command", "compare-leps"}, {"t", {2, 4, 8}}, {"seed", 4}});
  CHECK(other.hash() != c.hash());

  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "run.json");
    out << c.values.dump(2);
  }
  CHECK(parse_config_file((dir / "run.json").string()).hash() == c.hash());
  {
    std::ofstream out(dir / "broken.json");
    out << "{\"command\": ";
  }
  CHECK_THROWS_AS(parse_config_file((dir / "broken.json").string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("plots") {
  Series empty;
  empty.name = "none";
  CHECK_THROWS_AS(render_svg(empty, PlotKind::Linear), Error);

  Series two;
  two.name = "two <points>";
  two.add(0.0, 0.0, 1.0);
  two.add(0.0, 1.0, -1.0);
  const std::string svg = render_svg(two, PlotKind::Linear);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(balanced_xml(svg));
  CHECK(svg.find("two &lt;points&gt;") != std::string::npos);
  CHECK(choose_plot_kind(two) == PlotKind::Linear);

  Series sq;
  sq.name = "square";
  std::vector<double> xs, ys;
  for (int k = 1; k <= 6; ++k) {
    sq.add(1.0, k, double(k) * k);
    xs.push_back(k);
    ys.push_back(double(k) * k);
  }
  CHECK(choose_plot_kind(sq) == PlotKind::LogLog);
  PowerFit fit = fit_powerlaw(xs, ys);
  const std::string a = render_svg(sq, PlotKind::LogLog, &fit);
  CHECK(a.find("slope 2.00") != std::string::npos);
  CHECK(balanced_xml(a));
  CHECK(a == render_svg(sq, PlotKind::LogLog, &fit));

  Series neg;
  neg.name = "neg";
  neg.add(0, 1, -1);
  CHECK_THROWS_AS(render_svg(neg, PlotKind::LogLog), Error);

  const fs::path dir = scratch("plot");
  fs::create_directories(dir);
  emit_plot(sq, PlotKind::LogLog, (dir / "sq.svg").string(), &fit);
  CHECK(slurp(dir / "sq.svg") == a);
  fs::remove_all(dir);
}

TEST_CASE("simulate on the constant state passes and reruns byte-identically") {
  const fs::path out = scratch("sim");
  RunConfig c = parse_config({{"command", "simulate"}, {"family", {{"amplitude", 0.0}}}},
                             {{"output_dir", out.string()}});
  RunOutcome r = run_command(c);
  CHECK(r.status == 0);
  CHECK(r.failures.empty());
  CHECK(r.dir == out / ("simulate-" + c.hash()));
  for (const char* f : {"manifest.json", "series.csv", "report.json", "plots/energy.svg",
                        "snapshots/gp-eps0.3-0000.gpwf"})
    CHECK(fs::exists(r.dir / f));
  CHECK(slurp(r.dir / "series.csv").rfind("series,param,x,y\n", 0) == 0);
  const ojson manifest = ojson::parse(slurp(r.dir / "manifest.json"));
  CHECK(manifest["hash"] == c.hash());
  CHECK(manifest["config"] == c.values);
  CHECK(manifest.contains("wall_time_s"));
  CHECK(slurp(r.dir / "report.json").find("wall") == std::string::npos);

  const std::string csv = slurp(r.dir / "series.csv");
  const std::string svg = slurp(r.dir / "plots/energy.svg");
  RunOutcome again = run_command(c);
  CHECK(again.status == 0);
  CHECK(slurp(again.dir / "series.csv") == csv);
  CHECK(slurp(again.dir / "plots/energy.svg") == svg);

  const fs::path other = scratch("sim-rerun");
  RunConfig m = config_from_manifest((r.dir / "manifest.json").string(), {{"output_dir", other.string()}});
  CHECK(m.hash() == c.hash());
  RunOutcome rerun = run_command(m);
  CHECK(slurp(rerun.dir / "series.csv") == csv);
  CHECK(slurp(rerun.dir / "plots/energy.svg") == svg);
  CHECK(config_from_manifest((r.dir / "manifest.json").string()).output_dir == out.string());
  fs::remove_all(out);
  fs::remove_all(other);
}

TEST_CASE("decay command: 1-D U_eps does not disperse") {
  const fs::path out = scratch("decay");
  RunConfig c = parse_config({{"command", "decay"}, {"dim", 1}, {"n", 1024}, {"box_length", 1024},
                              {"t_max", 256}, {"output_dir", out.string()}});
  RunOutcome r = run_command(c);
  CHECK(r.status == 0);
  const ojson rep = ojson::parse(slurp(r.dir / "report.json"));
  CHECK(std::abs(rep["fits"]["decay"]["exponent"].get<double>()) < 0.1);
  CHECK(fs::exists(r.dir / "plots/fit-decay.svg"));

  // large eps makes U_eps Schrodinger-like: the dim-1 verdict fails
  RunConfig bad = parse_config(c.values, {{"eps", 100}, {"t_max", 0.5}, {"output_dir", out.string()}});
  RunOutcome f = run_command(bad);
  CHECK(f.status == 1);
  REQUIRE(f.failures.size() == 1);
  CHECK(f.failures[0].find("criterion 6") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("errors produce status 2 and a machine-readable report") {
  const fs::path out = scratch("err");
  RunConfig c = parse_config({{"command", "compare-wave"}, {"t", {1.0}}, {"eps", 0.4},
                              {"n", 256}, {"family", {{"amplitude", 10.0}}}},
                             {{"output_dir", out.string()}});
  RunOutcome r = run_command(c);
  CHECK(r.status == 2);
  const ojson rep = ojson::parse(slurp(r.dir / "report.json"));
  CHECK(rep["error"]["code"] == "HorizonViolation");
  CHECK(rep["failures"].size() == 1);
  CHECK(fs::exists(r.dir / "manifest.json"));
  fs::remove_all(out);
}
