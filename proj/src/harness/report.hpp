#pragma once

#include <string>
#include <vector>

namespace nlslab {

struct ReportDocument {
  std::string markdown;
  std::vector<std::string> included;  // run ids
  std::vector<std::string> missing;   // matched paths without a readable manifest
};

// Expands the glob to run directories (or manifest files) and renders one
// table per result group: claimed rate, measured exponent, window, constant
// and verdict. Unreadable runs are listed, not fatal.
ReportDocument build_report(const std::vector<std::string>& patterns);

}  // namespace nlslab
