#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlslab/nlslab.h"

namespace {

constexpr int kExitConfig = 3;

const std::vector<std::string> kKinds = {
    "linear-decay", "nonlinear-decay", "scattering-rate", "spacetime-tail", "duhamel",          "pc-energy",
    "l6-decay",     "morawetz",        "ensemble",        "amplitude-sweep", "convergence-gate",
};

struct RunArgs {
  std::string config;
  int jobs = 1;
  std::string seed;
  std::string out;
};

// The kind a config file names explicitly, or "" when it relies on the command.
std::string declared_kind(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line.substr(0, eq)) == "kind") return trim(line.substr(eq + 1));
  }
  return {};
}

double number(const nlohmann::json& v, const char* key) {
  if (!v.contains(key)) return NAN;
  const auto& x = v[key];
  if (x.is_number()) return x.get<double>();
  if (x.is_string()) return std::strtod(x.get<std::string>().c_str(), nullptr);
  return NAN;
}

int config_error(const std::string& message) {
  std::cerr << "config error:\n" << message;
  if (!message.empty() && message.back() != '\n') std::cerr << '\n';
  return kExitConfig;
}

int run_kind(const std::string& kind, const RunArgs& args) {
  std::ifstream in(args.config, std::ios::binary);
  if (!in) return config_error("cannot read " + args.config);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const auto declared = declared_kind(text);
  if (!declared.empty() && declared != kind)
    return config_error("config declares kind " + declared + " but the command is " + kind);

  nlslab_config* cfg = nullptr;
  if (nlslab_config_parse(text.c_str(), &cfg) != NLSLAB_OK) return config_error(nlslab_last_error());
  auto set = [&](const char* key, const std::string& value) {
    return nlslab_config_set(cfg, key, value.c_str()) == NLSLAB_OK;
  };
  if (!set("kind", kind) || (!args.seed.empty() && !set("seed", args.seed)) ||
      (!args.out.empty() && !set("output.dir", args.out))) {
    const std::string message = nlslab_last_error();
    nlslab_config_destroy(cfg);
    return config_error(message);
  }

  nlslab_run* run = nullptr;
  const auto status = nlslab_run_experiment(cfg, args.jobs, &run);
  nlslab_config_destroy(cfg);
  if (status == NLSLAB_E_CONFIG) return config_error(nlslab_last_error());
  if (status != NLSLAB_OK) {
    std::cerr << nlslab_status_name(status) << ": " << nlslab_last_error() << '\n';
    return status == NLSLAB_E_NUMERICAL ? 4 : 2;
  }

  std::cout << "run " << nlslab_run_id(run) << "\n";
  std::cout << "directory " << nlslab_run_directory(run) << "\n";
  const auto manifest = nlohmann::json::parse(nlslab_run_manifest(run), nullptr, false);
  if (!manifest.is_discarded() && manifest.contains("verdicts")) {
    for (const auto& v : manifest["verdicts"]) {
      const bool info = v.value("informational", false);
      const char* tag = info ? "INFO" : (v.value("pass", false) ? "PASS" : "FAIL");
      std::printf("  %-4s %-32s %.6g", tag, v.value("name", std::string()).c_str(), number(v, "measured"));
      if (!info) std::printf("  [%.6g, %.6g]", number(v, "lo"), number(v, "hi"));
      std::printf("\n");
    }
  }
  if (*nlslab_run_error(run)) std::cerr << "error: " << nlslab_run_error(run) << '\n';
  std::cout << "status " << nlslab_run_status(run) << "\n";
  const int code = nlslab_run_exit_code(run);
  nlslab_run_destroy(run);
  return code;
}

int run_report(const std::vector<std::string>& patterns, const std::string& out) {
  std::vector<const char*> raw;
  for (const auto& p : patterns) raw.push_back(p.c_str());
  nlslab_report* report = nullptr;
  if (nlslab_report_build(raw.data(), raw.size(), &report) != NLSLAB_OK) {
    std::cerr << nlslab_last_error() << '\n';
    return 2;
  }
  const std::string markdown = nlslab_report_markdown(report);
  nlslab_report_destroy(report);
  if (out.empty()) {
    std::cout << markdown;
    return 0;
  }
  std::ofstream file(out, std::ios::binary);
  file << markdown;
  if (!file) {
    std::cerr << "cannot write " << out << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for defocusing nonlinear Schrodinger decay and scattering"};
  app.set_version_flag("--version", std::string(nlslab_version()));
  app.require_subcommand(1);

  RunArgs args;
  std::string chosen;
  for (const auto& kind : kKinds) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", args.config, "key = value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", args.jobs, "concurrent workers")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "master seed (overrides the config)");
    sub->add_option("--out", args.out, "output root (overrides output.dir)");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  std::vector<std::string> patterns;
  std::string report_out;
  auto* report = app.add_subcommand("report", "summarize finished runs as markdown");
  report->add_option("--runs", patterns, "run directory glob")->required();
  report->add_option("--out", report_out, "write the report here instead of stdout");
  report->callback([&chosen] { chosen = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (chosen == "report") return run_report(patterns, report_out);
  return run_kind(chosen, args);
}
