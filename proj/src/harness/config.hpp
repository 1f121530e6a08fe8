#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grid.hpp"
#include "model.hpp"
#include "solver.hpp"

namespace nlslab {

enum class ExperimentKind {
  linear_decay,
  nonlinear_decay,
  scattering_rate,
  spacetime_tail,
  duhamel,
  pc_energy,
  l6_decay,
  morawetz,
  ensemble,
  amplitude_sweep,
  convergence_gate,
};

std::string to_string(ExperimentKind kind);
ExperimentKind kind_from_string(const std::string& name);  // throws InvalidArgument
const std::vector<std::string>& experiment_kind_names();

// Every documented key with its canonical value; defaults are filled in by
// parse_config so two configs are equal exactly when their maps are.
class ExperimentConfig {
 public:
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  ExperimentKind kind() const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  // Validates and canonicalizes; throws ConfigError listing every violation.
  void set(const std::string& key, const std::string& value);

  Grid grid() const;
  ModelSpec model() const;
  SolverConfig solver() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

 private:
  friend ExperimentConfig parse_config(const std::string&);
  friend ExperimentConfig default_config(ExperimentKind);
  std::map<std::string, std::string> values_;
};

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string admissible;  // human-readable range
};

const std::vector<ConfigKey>& config_schema();

ExperimentConfig default_config(ExperimentKind kind);

// "key = value" lines; '#' starts a comment. Unknown keys, duplicates,
// malformed values and out-of-range values are all collected into one
// ConfigError.
ExperimentConfig parse_config(const std::string& text);

// Canonical text: every key in sorted order.
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a over the canonical text without the output.* keys.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string run_id(const ExperimentConfig& config);

}  // namespace nlslab
