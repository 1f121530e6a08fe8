#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "artifacts.hpp"
#include "config.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "report.hpp"
#include "support.hpp"

using namespace nlslab;
using namespace nlslab::test;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nlslab_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string lines_without_output(const std::string& canonical) {
  std::istringstream in(canonical);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("output.", 0) == 0) continue;
    const auto eq = line.find(" = ");
    out += line.substr(0, eq) + "=" + line.substr(eq + 3) + "\n";
  }
  return out;
}

std::string render(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Random assignments for keys whose admissible values are easy to sample.
std::string random_config(Gen& g) {
  std::ostringstream s;
  s << "# generated\n";
  s << "kind = " << g.pick(experiment_kind_names()) << "\n";
  if (g.integer(0, 1)) s << "seed = " << g.bits() << "\n";
  if (g.integer(0, 1)) s << "grid.dim = " << g.integer(1, 3) << "\n";
  if (g.integer(0, 1)) s << "grid.n = " << (1 << g.integer(2, 8)) << "\n";
  if (g.integer(0, 1)) s << "grid.length = " << g.integer(1, 200) << "\n";
  if (g.integer(0, 1)) s << "model.symbol = " << g.pick(std::vector<std::string>{"schrodinger", "biharmonic", "fractional"}) << "\n";
  if (g.integer(0, 1)) s << "model.alpha = " << render(g.uniform(0.55, 0.95)) << "\n";
  if (g.integer(0, 1)) s << "model.power = " << g.pick(std::vector<int>{3, 5}) << "\n";
  if (g.integer(0, 1)) s << "solver.dealias_ratio = " << render(g.uniform(0.1, 1.0)) << "\n";
  if (g.integer(0, 1)) {
    const double dt = g.pick(std::vector<double>{0.001, 0.002, 0.005, 0.01, 0.02});
    s << "solver.dt = " << dt << "\nsolver.t_end = " << render(dt * g.integer(1, 5000)) << "\n";
  }
  if (g.integer(0, 1)) s << "solver.shell_tol = " << render(std::exp(g.uniform(-20.0, -1.0))) << "\n";
  if (g.integer(0, 1)) s << "data.amplitude  =  " << render(g.uniform(0.0, 3.0)) << "   # trailing\n";
  if (g.integer(0, 1)) s << "data.center = " << render(g.normal()) << ", " << render(g.normal()) << "," << render(g.normal()) << "\n";
  if (g.integer(0, 1)) s << "observe.pc = " << g.pick(std::vector<std::string>{"true", "false"}) << "\n";
  if (g.integer(0, 1)) s << "fit.t_max = " << g.pick(std::vector<std::string>{"inf", "3.5", "10"}) << "\n";
  if (g.integer(0, 1)) s << "output.dir = /tmp/x" << g.integer(0, 99) << "\n";
  if (g.integer(0, 1)) s << "\n\n";
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("minimal config fills every default") {
    const auto c = parse_config("kind = linear-decay\n");
    CHECK(c.values().size() == config_schema().size());
    for (const auto& k : config_schema()) CHECK(c.values().count(k.key) == 1);
    CHECK(c == default_config(ExperimentKind::linear_decay));
    CHECK(config_hash(c) == config_hash(parse_config("kind = linear-decay\n")));
    CHECK(c.kind() == ExperimentKind::linear_decay);
    CHECK(c.real("solver.dt") == 0.01);
    CHECK(std::isinf(c.reals("linear.p")[0]));
    CHECK(c.grid().dim() == 3);
    CHECK(c.model().sign == 1);
    CHECK(c.solver().boundary_mass_tol == 1e-3);
  }
  SUBCASE("property: parse of serialize is the identity") {
    Gen gen(71);
    for (int k = 0; k < 300; ++k) {
      const std::string text = random_config(gen);
      CAPTURE(text);
      ExperimentConfig c;
      try {
        c = parse_config(text);
      } catch (const ConfigError& e) {
        std::string why;
        for (const auto& v : e.violations()) why += v + "; ";
        FAIL("generator produced an invalid config: " << why);
      }
      const auto canonical = serialize_config(c);
      const auto again = parse_config(canonical);
      CHECK(again == c);
      CHECK(serialize_config(again) == canonical);
      CHECK(config_hash(again) == config_hash(c));
      CHECK(config_hash(c) == fnv1a(lines_without_output(canonical)));
    }
  }
  SUBCASE("violations are collected") {
    try {
      parse_config("solver.dt = 0\ngrid.n = 7\nbogus = 1\ndata.amplitude = x\nsolver.dt = 0.1\n");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      const auto& v = e.violations();
      CHECK(v.size() >= 5);
      std::string all;
      for (const auto& s : v) all += s + "\n";
      CHECK(all.find("solver.dt") != std::string::npos);
      CHECK(all.find("(0, 1)") != std::string::npos);
      CHECK(all.find("grid.n") != std::string::npos);
      CHECK(all.find("power of two") != std::string::npos);
      CHECK(all.find("bogus") != std::string::npos);
      CHECK(all.find("data.amplitude") != std::string::npos);
      CHECK(all.find("duplicate") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("solver.dt = 0.03\nsolver.t_end = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = teleport\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just some words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("data.kind = file\n"), ConfigError);
    CHECK_NOTHROW(parse_config("# only a comment\n\n"));
  }
  SUBCASE("hash and run id") {
    auto a = parse_config("kind = duhamel\n");
    auto b = a;
    b.set("output.dir", "/elsewhere");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(run_id(a) == run_id(b));
    b.set("seed", "5");
    CHECK(config_hash(a) != config_hash(b));
    CHECK(std::regex_match(run_id(a), std::regex("duhamel-[0-9a-f]{12}")));
    CHECK_THROWS_AS(b.set("grid.dim", "4"), ConfigError);
    CHECK_THROWS_AS(b.set("nope", "1"), ConfigError);
    b.set("solver.dt", "5e-3");
    CHECK(b.real("solver.dt") == 0.005);
  }
  SUBCASE("kind names") {
    CHECK(experiment_kind_names().size() == 11);
    for (const auto& n : experiment_kind_names()) CHECK(to_string(kind_from_string(n)) == n);
    CHECK_THROWS_AS(kind_from_string("linear_decay"), InvalidArgument);
  }
}

TEST_CASE("artifacts") {
  CHECK(fmt12(0.1) == "0.1");
  CHECK(fmt12(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt12(123456789012345.0) == "1.23456789012e+14");

  CsvTable t{{"a", "b"}, {{"plain", "with,comma"}, {"say \"hi\"", "two\nlines"}}};
  CHECK(t.str() == "a,b\r\nplain,\"with,comma\"\r\n\"say \"\"hi\"\"\",\"two\nlines\"\r\n");

  std::map<std::string, ObservableSeries> series;
  series["linf"] = {"linf", {0.0, 1.0, 2.0, 3.0}, {1.0, 0.5, 0.6, 0.2}};
  series["mass"] = {"mass", {0.0, 2.0}, {7.0, 7.0}};
  const auto tab = trajectory_table(series, 1.5);
  CHECK(tab.header == std::vector<std::string>{"t", "linf", "l2", "l3", "l4", "l5", "l6", "h_half_dot", "h1", "mass",
                                               "energy", "A_env", "V_pc", "horizon_flag"});
  REQUIRE(tab.rows.size() == 4);
  CHECK(tab.rows[1][9] == "");
  CHECK(tab.rows[2][9] == "7");
  CHECK(tab.rows[1][11] == "0.5");
  CHECK(tab.rows[2][11] == fmt12(0.6 * std::pow(2.0, 1.5)));
  CHECK(tab.rows[3][11] == fmt12(0.6 * std::pow(2.0, 1.5)));
  CHECK(tab.rows[1].back() == "0");
  CHECK(tab.rows[2].back() == "1");
  CHECK(tab.rows[3].back() == "1");
  CHECK(trajectory_table({}, 1.0).rows.empty());

  TempDir dir;
  const auto file = (dir.path / "x.txt").string();
  write_file_atomic(file, "first");
  write_file_atomic(file, "second");
  CHECK(read_file(file) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS(read_file((dir.path / "missing").string()));

  const auto svg = loglog_svg("t", {{"line", {1, 2, 4}, {1, 0.5, 0.25}, std::nullopt}}, 3.0);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("running experiments") {
  TempDir dir;
  const std::string base = "kind = linear-decay\ngrid.dim = 1\ngrid.n = 256\ngrid.length = 64\nlinear.t_end = 4\n"
                           "solver.shell_tol = 1e-3\noutput.dir = " + dir.path.string() + "\n";
  const auto cfg = parse_config(base);
  const auto res = run_experiment(cfg);
  CHECK(res.status == "pass");
  CHECK(res.exit_code == kExitPass);
  CHECK(res.run_id == run_id(cfg));
  CHECK(fs::path(res.directory) == dir.path / res.run_id);
  for (const char* f : {"manifest.json", "config.txt", "trajectory.csv", "fits.json", "decay.svg"})
    CHECK(fs::exists(fs::path(res.directory) / f));
  CHECK(parse_config(read_file((fs::path(res.directory) / "config.txt").string())) == cfg);

  const auto csv = read_file((fs::path(res.directory) / "trajectory.csv").string());
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 101);

  const auto manifest = nlohmann::json::parse(read_file((fs::path(res.directory) / "manifest.json").string()));
  CHECK(manifest["run_id"] == res.run_id);
  CHECK(manifest["status"] == "pass");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest.contains("started"));
  CHECK(manifest.contains("finished"));
  CHECK(manifest["verdicts"].size() == 3);

  SUBCASE("determinism") {
    TempDir other;
    auto c2 = cfg;
    c2.set("output.dir", other.path.string());
    const auto again = run_experiment(c2);
    CHECK(again.run_id == res.run_id);
    CHECK(read_file((fs::path(again.directory) / "trajectory.csv").string()) == csv);
    CHECK(read_file((fs::path(again.directory) / "fits.json").string()) ==
          read_file((fs::path(res.directory) / "fits.json").string()));
  }
  SUBCASE("acceptance failure exit code") {
    auto bad = cfg;
    bad.set("fit.t_min", "0.04");
    bad.set("fit.t_max", "0.4");
    const auto r = run_experiment(bad);
    CHECK(r.status == "fail");
    CHECK(r.exit_code == kExitAcceptance);
  }
  SUBCASE("numerical abort exit code") {
    auto cfg2 = parse_config("kind = nonlinear-decay\ngrid.dim = 1\ngrid.n = 64\ngrid.length = 16\nsolver.t_end = 0.1\n"
                             "data.amplitude = 1e200\noutput.dir = " + dir.path.string() + "\n");
    const auto r = run_experiment(cfg2);
    CHECK(r.status == "numerical-abort");
    CHECK(r.exit_code == kExitNumerical);
    CHECK(fs::exists(fs::path(r.directory) / "manifest.json"));
  }
  SUBCASE("report") {
    const auto empty = build_report({});
    CHECK(empty.included.empty());
    CHECK(empty.missing.empty());
    CHECK_FALSE(empty.markdown.empty());

    const auto one = build_report({(dir.path / "*").string()});
    CHECK(one.included == std::vector<std::string>{res.run_id});
    CHECK(one.markdown.find("linear dispersive decay") != std::string::npos);
    CHECK(one.markdown.find("| linf") != std::string::npos);

    fs::create_directories(dir.path / "broken");
    std::ofstream(dir.path / "broken" / "manifest.json") << "{ not json";
    const auto partial = build_report({(dir.path / "*").string(), (dir.path / "nothing-here").string()});
    CHECK(partial.included.size() == 1);
    CHECK(partial.missing.size() >= 1);
  }
}
