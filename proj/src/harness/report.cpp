#include "report.hpp"

#include <glob.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "artifacts.hpp"
#include "json.hpp"

namespace nlslab {

namespace {

std::vector<std::string> expand(const std::string& pattern) {
  std::vector<std::string> out;
  glob_t g{};
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  return out;
}

std::string cell(const nlohmann::json& v) {
  if (v.is_number()) return fmt12(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

ReportDocument build_report(const std::vector<std::string>& patterns) {
  namespace fs = std::filesystem;
  ReportDocument doc;
  std::vector<std::string> paths;
  for (const auto& p : patterns) {
    auto hits = expand(p);
    if (hits.empty()) doc.missing.push_back(p);
    paths.insert(paths.end(), hits.begin(), hits.end());
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

  std::map<std::string, std::vector<nlohmann::json>> groups;
  std::vector<nlohmann::json> runs;
  for (const auto& path : paths) {
    fs::path manifest = fs::path(path);
    if (fs::is_directory(manifest)) manifest /= "manifest.json";
    try {
      auto j = nlohmann::json::parse(read_file(manifest.string()));
      doc.included.push_back(j.at("run_id").get<std::string>());
      for (const auto& r : j.value("rows", nlohmann::json::array())) {
        auto row = r;
        row["run_id"] = j.at("run_id");
        groups[r.at("group").get<std::string>()].push_back(row);
      }
      runs.push_back(j);
    } catch (const std::exception&) {
      doc.missing.push_back(path);
    }
  }

  std::ostringstream md;
  md << "# nlslab report\n\n";
  if (runs.empty()) md << "No runs.\n";
  if (!runs.empty()) {
    md << "## Runs\n\n| run | kind | status | validity horizon |\n|---|---|---|---|\n";
    for (const auto& j : runs)
      md << "| " << cell(j.at("run_id")) << " | " << cell(j.at("kind")) << " | " << cell(j.at("status")) << " | "
         << cell(j.value("validity_horizon", nlohmann::json(0.0))) << " |\n";
    md << "\n";
  }
  for (const auto& [group, rows] : groups) {
    md << "## " << group << "\n\n";
    md << "| run | quantity | claimed rate | measured exponent | window | constant | verdict |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      const auto& w = r.at("window");
      md << "| " << cell(r.at("run_id")) << " | " << cell(r.at("quantity")) << " | " << cell(r.at("claimed")) << " | "
         << cell(r.at("measured")) << " | [" << cell(w.at(0)) << ", " << cell(w.at(1)) << "] | " << cell(r.at("constant"))
         << " | " << cell(r.at("verdict")) << " |\n";
    }
    md << "\n";
  }
  if (!doc.missing.empty()) {
    md << "## Missing\n\n";
    for (const auto& m : doc.missing) md << "- " << m << "\n";
  }
  doc.markdown = md.str();
  return doc;
}

}  // namespace nlslab
