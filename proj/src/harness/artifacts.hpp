#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "series.hpp"
#include "solver.hpp"

namespace nlslab {

// %.12g, the printed precision of every artifact.
std::string fmt12(double v);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// RFC 4180 table; fields containing commas, quotes or newlines are quoted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string str() const;
};

// Columns t, linf, l2, l3, l4, l5, l6, h_half_dot, h1, mass, energy, A_env,
// V_pc, horizon_flag; one row per sample of the linf series. Values a
// trajectory did not record at a row's time are left empty; horizon_flag is 1
// past the validity horizon.
CsvTable trajectory_table(const std::map<std::string, ObservableSeries>& series, double horizon);

struct PlotLine {
  std::string label;
  std::vector<double> t;
  std::vector<double> v;
  std::optional<DecayFit> fit;
};

// Static log-log chart; each fit is drawn over its window and its slope is
// printed in the legend. Non-positive samples are skipped.
std::string loglog_svg(const std::string& title, const std::vector<PlotLine>& lines, double horizon = -1.0);

std::string utc_timestamp();

}  // namespace nlslab
