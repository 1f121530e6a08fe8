#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "error.hpp"

namespace nlslab {

namespace {

const std::vector<std::string> kKindNames = {
    "linear-decay", "nonlinear-decay", "scattering-rate", "spacetime-tail", "duhamel",          "pc-energy",
    "l6-decay",     "morawetz",        "ensemble",        "amplitude-sweep", "convergence-gate",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_real(const std::string& s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = t.data() + t.size();
  auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != end || std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(const std::string& s) {
  const std::string t = trim(s);
  long long v = 0;
  const char* end = t.data() + t.size();
  auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Returns the canonical value or an error message.
using Canon = std::function<std::string(const std::string& value, std::string& error)>;

struct KeySpec {
  ConfigKey doc;
  Canon canon;
};

Canon real_in(double lo, double hi, bool lo_open, bool hi_open) {
  return [=](const std::string& v, std::string& err) -> std::string {
    auto x = parse_real(v);
    if (!x) {
      err = "is not a number";
      return {};
    }
    const bool ok = (lo_open ? *x > lo : *x >= lo) && (hi_open ? *x < hi : *x <= hi);
    if (!ok) {
      err = "is out of range";
      return {};
    }
    return format_real(*x);
  };
}

Canon int_in(long long lo, long long hi, bool pow2 = false) {
  return [=](const std::string& v, std::string& err) -> std::string {
    auto x = parse_int(v);
    if (!x) {
      err = "is not an integer";
      return {};
    }
    if (*x < lo || *x > hi || (pow2 && (*x & (*x - 1)) != 0)) {
      err = "is out of range";
      return {};
    }
    return std::to_string(*x);
  };
}

Canon u64_any() {
  return [](const std::string& v, std::string& err) -> std::string {
    const std::string t = trim(v);
    std::uint64_t x = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      err = "is not an unsigned 64-bit integer";
      return {};
    }
    return std::to_string(x);
  };
}

Canon one_of(std::vector<std::string> options) {
  return [options](const std::string& v, std::string& err) -> std::string {
    const std::string t = trim(v);
    if (std::find(options.begin(), options.end(), t) == options.end()) {
      err = "is not one of the admissible values";
      return {};
    }
    return t;
  };
}

Canon boolean() {
  return [](const std::string& v, std::string& err) -> std::string {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return "true";
    if (t == "false" || t == "0" || t == "no") return "false";
    err = "is not a boolean";
    return {};
  };
}

Canon text_any() {
  return [](const std::string& v, std::string&) { return trim(v); };
}

Canon real_list(double lo, double hi, std::size_t min_len, std::size_t max_len, bool lo_open = false) {
  return [=](const std::string& v, std::string& err) -> std::string {
    const auto items = split_list(v);
    if (items.size() < min_len || items.size() > max_len) {
      err = "has the wrong number of entries";
      return {};
    }
    std::string out;
    for (const auto& it : items) {
      auto x = parse_real(it);
      if (!x || (lo_open ? !(*x > lo) : !(*x >= lo)) || !(*x <= hi)) {
        err = "has an entry that is not a number in range";
        return {};
      }
      if (!out.empty()) out += ",";
      out += format_real(*x);
    }
    return out;
  };
}

const double kInf = std::numeric_limits<double>::infinity();

const std::vector<KeySpec>& specs() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    auto add = [&](std::string key, std::string def, std::string range, Canon c) {
      t.push_back({{std::move(key), std::move(def), std::move(range)}, std::move(c)});
    };
    std::string kinds;
    for (const auto& k : kKindNames) kinds += (kinds.empty() ? "" : "|") + k;
    add("kind", "linear-decay", kinds, one_of(kKindNames));
    add("seed", "0", "unsigned 64-bit integer", u64_any());
    add("output.dir", "runs", "directory path", text_any());
    add("output.snapshots", "false", "boolean", boolean());

    add("grid.dim", "3", "1..3", int_in(1, 3));
    add("grid.n", "64", "power of two in 4..1024", int_in(4, 1024, true));
    add("grid.length", "64", "(0, inf)", real_in(0.0, kInf, true, true));

    add("model.symbol", "schrodinger", "schrodinger|biharmonic|fractional",
        one_of({"schrodinger", "biharmonic", "fractional"}));
    add("model.alpha", "0.75", "(0.5, 1)", real_in(0.5, 1.0, true, true));
    add("model.power", "3", "3|5", one_of({"3", "5"}));
    add("model.sign", "1", "0|1", one_of({"0", "1"}));

    add("solver.dt", "0.01", "(0, 1)", real_in(0.0, 1.0, true, true));
    add("solver.t_end", "5", "(0, inf), a multiple of solver.dt", real_in(0.0, kInf, true, true));
    add("solver.dealias_ratio", format_real(2.0 / 3.0), "(0, 1]", real_in(0.0, 1.0, true, false));
    add("solver.snapshot_stride", "10", "1..10^9", int_in(1, 1000000000));
    add("solver.shell_fraction", "0.1", "(0, 0.5)", real_in(0.0, 0.5, true, true));
    add("solver.shell_tol", "0.001", "(0, 1)", real_in(0.0, 1.0, true, true));

    add("data.kind", "gaussian", "gaussian|plane-modulated|file", one_of({"gaussian", "plane-modulated", "file"}));
    add("data.amplitude", "0.2", "[0, inf)", real_in(0.0, kInf, false, true));
    add("data.width", "1", "(0, inf)", real_in(0.0, kInf, true, true));
    add("data.center", "0,0,0", "three reals", real_list(-kInf, kInf, 3, 3));
    add("data.mode", "0,0,0", "three integers", real_list(-1e6, 1e6, 3, 3));
    add("data.path", "", "snapshot file path", text_any());

    add("observe.stride", "1", "1..10^9", int_in(1, 1000000000));
    add("observe.pc", "false", "boolean", boolean());
    add("observe.pc_stride", "1", "1..10^9", int_in(1, 1000000000));

    add("fit.t_min", "2", "[0, inf)", real_in(0.0, kInf, false, true));
    add("fit.t_max", "inf", "(0, inf]", real_in(0.0, kInf, true, false));

    add("linear.sample_dt", "0.04", "(0, inf)", real_in(0.0, kInf, true, true));
    add("linear.t_end", "8", "(0, inf)", real_in(0.0, kInf, true, true));
    add("linear.p", "inf,6,2", "reals in [1, inf]", real_list(1.0, kInf, 1, 16));

    add("scattering.gap_tol", "0.01", "(0, inf)", real_in(0.0, kInf, true, true));
    add("scattering.fit_t_min", "0", "[0, inf); 0 means T/4", real_in(0.0, kInf, false, true));

    add("tail.count", "20", "8..1000", int_in(8, 1000));
    add("tail.s_min", "1", "(0, inf)", real_in(0.0, kInf, true, true));
    add("tail.s_max_fraction", "0.5", "(0, 1)", real_in(0.0, 1.0, true, true));

    add("duhamel.probes", "1,2", "times in (0, inf)", real_list(0.0, kInf, 1, 64, true));
    add("duhamel.m_c", "1", "(0, inf)", real_in(0.0, kInf, true, true));
    add("duhamel.m_interior", "0.25,0.375", "fractions of t in (0, 0.5]", real_list(0.0, 0.5, 2, 16, true));
    add("duhamel.residual_tol", "inf", "(0, inf]", real_in(0.0, kInf, true, false));

    add("pc.check_t_min", "0.1", "(0, inf)", real_in(0.0, kInf, true, true));

    add("ensemble.samples", "64", "1..100000", int_in(1, 100000));
    add("ensemble.partition_h", "1", "(0, inf)", real_in(0.0, kInf, true, true));
    add("ensemble.lambdas", "1,2,4,8,16", "multiples of the median", real_list(0.0, kInf, 1, 64, true));
    add("ensemble.unit_gaussians", "false", "boolean", boolean());
    add("ensemble.probe_stride", "1", "1..10^9", int_in(1, 1000000000));
    add("ensemble.weighted_points", "400", "0 or 2..100000", int_in(0, 100000));
    add("ensemble.weighted_p", "3,6,12", "reals in (2, inf)", real_list(2.0, 1e6, 1, 16, true));
    add("ensemble.eps1", "0.2", "(0, 1)", real_in(0.0, 1.0, true, true));
    add("ensemble.eps2", "0.1", "(0, 1)", real_in(0.0, 1.0, true, true));
    add("ensemble.moment_samples", "100000", "10^4..10^8", int_in(10000, 100000000));
    add("ensemble.moment_rho", "2,4,8,16", "reals in [2, 20]", real_list(2.0, 20.0, 1, 16));
    add("ensemble.moment_terms", "8", "1..1000", int_in(1, 1000));

    add("sweep.amplitudes", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1", "reals in (0, inf)",
        real_list(0.0, kInf, 1, 64, true));

    add("gate.dt", "0.02", "(0, 1)", real_in(0.0, 1.0, true, true));
    add("gate.t_end", "1", "(0, inf), a multiple of gate.dt", real_in(0.0, kInf, true, true));
    std::sort(t.begin(), t.end(), [](const KeySpec& a, const KeySpec& b) { return a.doc.key < b.doc.key; });
    return t;
  }();
  return table;
}

const KeySpec* find_spec(const std::string& key) {
  const auto& t = specs();
  auto it = std::lower_bound(t.begin(), t.end(), key, [](const KeySpec& s, const std::string& k) { return s.doc.key < k; });
  return it != t.end() && it->doc.key == key ? &*it : nullptr;
}

bool multiple_of(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

void cross_check(const std::map<std::string, std::string>& v, std::vector<std::string>& bad) {
  auto real = [&](const char* k) { return *parse_real(v.at(k)); };
  if (!multiple_of(real("solver.t_end"), real("solver.dt")))
    bad.push_back("solver.t_end must be an integer multiple of solver.dt");
  if (!multiple_of(real("gate.t_end"), real("gate.dt"))) bad.push_back("gate.t_end must be an integer multiple of gate.dt");
  if (v.at("data.kind") == "file" && v.at("data.path").empty()) bad.push_back("data.path is required when data.kind = file");
  if (real("ensemble.eps1") <= real("ensemble.eps2")) bad.push_back("ensemble.eps1 must exceed ensemble.eps2");
  if (v.at("ensemble.weighted_points") == "1") bad.push_back("ensemble.weighted_points must be 0 or at least 2");
  if (v.at("kind") == "ensemble" && !multiple_of(real("grid.length"), real("ensemble.partition_h")))
    bad.push_back("grid.length must be a multiple of ensemble.partition_h");
  for (const auto& m : split_list(v.at("data.mode"))) {
    const double x = *parse_real(m);
    if (x != std::round(x)) {
      bad.push_back("data.mode entries must be integers");
      break;
    }
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

ExperimentKind kind_from_string(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ExperimentKind>(i);
  throw InvalidArgument("unknown experiment kind '" + name + "'");
}

const std::vector<std::string>& experiment_kind_names() { return kKindNames; }

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> docs = [] {
    std::vector<ConfigKey> d;
    for (const auto& s : specs()) d.push_back(s.doc);
    return d;
  }();
  return docs;
}

ExperimentKind ExperimentConfig::kind() const { return kind_from_string(values_.at("kind")); }

double ExperimentConfig::real(const std::string& key) const { return *parse_real(values_.at(key)); }

long long ExperimentConfig::integer(const std::string& key) const { return *parse_int(values_.at(key)); }

std::uint64_t ExperimentConfig::unsigned_integer(const std::string& key) const {
  const auto& s = values_.at(key);
  std::uint64_t x = 0;
  std::from_chars(s.data(), s.data() + s.size(), x);
  return x;
}

bool ExperimentConfig::flag(const std::string& key) const { return values_.at(key) == "true"; }

const std::string& ExperimentConfig::text(const std::string& key) const { return values_.at(key); }

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_list(values_.at(key))) out.push_back(*parse_real(s));
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (!spec) throw ConfigError({"unknown key '" + key + "'"});
  std::string err;
  std::string canon = spec->canon(value, err);
  if (!err.empty())
    throw ConfigError({key + " = '" + trim(value) + "' " + err + "; admissible: " + spec->doc.admissible});
  auto next = values_;
  next[key] = canon;
  std::vector<std::string> bad;
  cross_check(next, bad);
  if (!bad.empty()) throw ConfigError(std::move(bad));
  values_ = std::move(next);
}

Grid ExperimentConfig::grid() const {
  return make_grid(static_cast<int>(integer("grid.dim")), static_cast<int>(integer("grid.n")), real("grid.length"));
}

ModelSpec ExperimentConfig::model() const {
  ModelSpec m;
  m.symbol = symbol_from_string(text("model.symbol"));
  m.alpha = real("model.alpha");
  m.power = static_cast<int>(integer("model.power"));
  m.sign = static_cast<int>(integer("model.sign"));
  return m;
}

SolverConfig ExperimentConfig::solver() const {
  SolverConfig c;
  c.dt = real("solver.dt");
  c.t_end = real("solver.t_end");
  c.dealias_ratio = real("solver.dealias_ratio");
  c.snapshot_stride = static_cast<int>(integer("solver.snapshot_stride"));
  c.boundary_shell_fraction = real("solver.shell_fraction");
  c.boundary_mass_tol = real("solver.shell_tol");
  return c;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  for (const auto& s : specs()) c.values_[s.doc.key] = s.doc.default_value;
  c.values_["kind"] = to_string(kind);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  for (const auto& s : specs()) c.values_[s.doc.key] = s.doc.default_value;
  std::vector<std::string> bad;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeySpec* spec = find_spec(key);
    if (!spec) {
      bad.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    if (seen.count(key)) {
      bad.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first on line " +
                    std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = lineno;
    std::string err;
    std::string canon = spec->canon(value, err);
    if (!err.empty()) {
      bad.push_back("line " + std::to_string(lineno) + ": " + key + " = '" + value + "' " + err +
                    "; admissible: " + spec->doc.admissible);
      continue;
    }
    c.values_[key] = canon;
  }
  if (bad.empty()) cross_check(c.values_, bad);
  if (!bad.empty()) throw ConfigError(std::move(bad));
  return c;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.values()) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& [k, v] : config.values()) {
    if (k.rfind("output.", 0) == 0) continue;
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::string run_id(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return config.text("kind") + "-" + std::string(buf, 12);
}

}  // namespace nlslab
