#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "config.hpp"
#include "solver.hpp"
#include "json.hpp"

namespace nlslab {

struct Verdict {
  std::string name;
  double measured = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
  bool informational = false;
  std::string note;
};

// One line of the summary report.
struct ResultRow {
  std::string group;
  std::string quantity;
  std::string claimed;
  double measured = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double constant = 0.0;
  std::string verdict;
};

// Holds the most recent trajectory so experiments that share grid, model,
// solver, data and observer settings simulate once. Safe to share between
// threads.
class TrajectoryCache {
 public:
  std::shared_ptr<const Trajectory> find(const std::string& key) const;
  void store(const std::string& key, std::shared_ptr<const Trajectory> trajectory);
  std::size_t hits() const;

 private:
  mutable std::mutex mutex_;
  std::string key_;
  std::shared_ptr<const Trajectory> trajectory_;
  mutable std::size_t hits_ = 0;
};

struct RunOptions {
  int jobs = 1;
  std::shared_ptr<TrajectoryCache> cache;
};

struct RunResult {
  std::string run_id;
  std::string directory;
  std::string status;  // pass, fail, info, error, numerical-abort
  std::vector<Verdict> verdicts;
  std::map<std::string, double> metrics;
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;
  std::string error;
  double validity_horizon = 0.0;
  int exit_code = 0;
  nlohmann::json manifest;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitAcceptance = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitNumerical = 4;

std::string code_version();

// Runs the configured experiment, writing every artifact under
// output.dir/<run id>/ and the manifest last. Numerical aborts and domain
// failures are reported through the result rather than thrown.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace nlslab
