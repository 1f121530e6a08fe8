#include "nlslab/nlslab.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "norms.hpp"
#include "report.hpp"
#include "series.hpp"
#include "snapshot_io.hpp"
#include "solver.hpp"

struct nlslab_grid {
  nlslab::Grid grid;
};

struct nlslab_field {
  nlslab::ComplexField field;
};

struct nlslab_trajectory {
  nlslab::Trajectory trajectory;
  std::size_t steps = 0;
};

struct nlslab_config {
  nlslab::ExperimentConfig config;
  mutable std::string scratch;
};

struct nlslab_run {
  nlslab::RunResult result;
  std::string manifest;
};

struct nlslab_report {
  nlslab::ReportDocument document;
};

namespace {

thread_local std::string g_last_error;

nlslab_status fail(nlslab_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

nlslab_status succeed() {
  g_last_error.clear();
  return NLSLAB_OK;
}

// Maps the exception in flight to a status code.
nlslab_status translate() {
  try {
    throw;
  } catch (const nlslab::ConfigError& e) {
    std::string text;
    for (const auto& v : e.violations()) text += v + "\n";
    if (text.empty()) text = e.what();
    return fail(NLSLAB_E_CONFIG, text);
  } catch (const nlslab::InvalidArgument& e) {
    return fail(NLSLAB_E_INVALID_ARGUMENT, e.what());
  } catch (const nlslab::DomainError& e) {
    return fail(NLSLAB_E_DOMAIN, e.what());
  } catch (const nlslab::NumericalAbort& e) {
    return fail(NLSLAB_E_NUMERICAL, e.what());
  } catch (const nlslab::IoError& e) {
    return fail(NLSLAB_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NLSLAB_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NLSLAB_E_INTERNAL, e.what());
  } catch (...) {
    return fail(NLSLAB_E_INTERNAL, "unknown error");
  }
}

template <class Fn>
nlslab_status guarded(Fn&& fn) {
  try {
    fn();
    return succeed();
  } catch (...) {
    return translate();
  }
}

nlslab::ModelSpec to_model(const nlslab_model* m) {
  nlslab::ModelSpec spec;
  if (!m) return spec;
  switch (m->symbol) {
    case NLSLAB_SCHRODINGER: spec.symbol = nlslab::SymbolKind::schrodinger; break;
    case NLSLAB_BIHARMONIC: spec.symbol = nlslab::SymbolKind::biharmonic; break;
    case NLSLAB_FRACTIONAL: spec.symbol = nlslab::SymbolKind::fractional; break;
    default: throw nlslab::InvalidArgument("unknown symbol " + std::to_string(m->symbol));
  }
  spec.alpha = m->alpha;
  spec.power = m->power;
  spec.sign = m->sign;
  spec.validate();
  return spec;
}

nlslab::SolverConfig to_solver(const nlslab_solver_config* c) {
  nlslab::SolverConfig config;
  if (!c) return config;
  config.dt = c->dt;
  config.t_end = c->t_end;
  config.dealias_ratio = c->dealias_ratio;
  config.snapshot_stride = c->snapshot_stride;
  config.boundary_shell_fraction = c->shell_fraction;
  config.boundary_mass_tol = c->shell_tol;
  config.validate();
  return config;
}

#define NLSLAB_REQUIRE(cond, what) \
  if (!(cond)) return fail(NLSLAB_E_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* nlslab_last_error(void) { return g_last_error.c_str(); }

const char* nlslab_version(void) {
  static const std::string version = nlslab::code_version();
  return version.c_str();
}

const char* nlslab_status_name(nlslab_status status) {
  switch (status) {
    case NLSLAB_OK: return "ok";
    case NLSLAB_E_INVALID_ARGUMENT: return "invalid argument";
    case NLSLAB_E_DOMAIN: return "domain error";
    case NLSLAB_E_NUMERICAL: return "numerical abort";
    case NLSLAB_E_IO: return "i/o error";
    case NLSLAB_E_CONFIG: return "config error";
    case NLSLAB_E_BUFFER: return "buffer too small";
    case NLSLAB_E_INTERNAL: return "internal error";
  }
  return "unknown";
}

void nlslab_model_default(nlslab_model* model) {
  if (!model) return;
  model->symbol = NLSLAB_SCHRODINGER;
  model->alpha = 0.75;
  model->power = 3;
  model->sign = 1;
}

void nlslab_solver_config_default(nlslab_solver_config* config) {
  if (!config) return;
  const nlslab::SolverConfig d;
  config->dt = d.dt;
  config->t_end = d.t_end;
  config->dealias_ratio = d.dealias_ratio;
  config->snapshot_stride = d.snapshot_stride;
  config->shell_fraction = d.boundary_shell_fraction;
  config->shell_tol = d.boundary_mass_tol;
}

nlslab_status nlslab_grid_create(int dim, int points_per_axis, double box_length, nlslab_grid** out) {
  NLSLAB_REQUIRE(out, "null output handle");
  *out = nullptr;
  return guarded([&] { *out = new nlslab_grid{nlslab::make_grid(dim, points_per_axis, box_length)}; });
}

void nlslab_grid_destroy(nlslab_grid* grid) { delete grid; }

nlslab_status nlslab_grid_info(const nlslab_grid* grid, int* dim, int* points_per_axis, double* box_length,
                               size_t* size) {
  NLSLAB_REQUIRE(grid, "null grid");
  if (dim) *dim = grid->grid.dim();
  if (points_per_axis) *points_per_axis = grid->grid.points_per_axis();
  if (box_length) *box_length = grid->grid.box_length();
  if (size) *size = grid->grid.size();
  return succeed();
}

nlslab_status nlslab_field_create(const nlslab_grid* grid, const double* values, nlslab_field** out) {
  NLSLAB_REQUIRE(grid && values && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlslab::ComplexField f(grid->grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = {values[2 * i], values[2 * i + 1]};
    if (!f.all_finite()) throw nlslab::InvalidArgument("field values must be finite");
    *out = new nlslab_field{std::move(f)};
  });
}

nlslab_status nlslab_field_gaussian(const nlslab_grid* grid, double amplitude, double width, nlslab_field** out) {
  NLSLAB_REQUIRE(grid && out, "null argument");
  *out = nullptr;
  NLSLAB_REQUIRE(std::isfinite(amplitude) && width > 0.0 && std::isfinite(width), "width must be positive");
  return guarded([&] {
    nlslab::ComplexField f(grid->grid);
    nlslab::for_each_point(grid->grid, [&](std::size_t idx, const nlslab::Vec3& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      f[idx] = amplitude * std::exp(-r2 / (2.0 * width * width));
    });
    *out = new nlslab_field{std::move(f)};
  });
}

void nlslab_field_destroy(nlslab_field* field) { delete field; }

size_t nlslab_field_size(const nlslab_field* field) { return field ? field->field.size() : 0; }

nlslab_status nlslab_field_values(const nlslab_field* field, double* values, size_t capacity) {
  NLSLAB_REQUIRE(field && values, "null argument");
  const auto& f = field->field;
  if (capacity < 2 * f.size()) return fail(NLSLAB_E_BUFFER, "need " + std::to_string(2 * f.size()) + " doubles");
  for (std::size_t i = 0; i < f.size(); ++i) {
    values[2 * i] = f[i].real();
    values[2 * i + 1] = f[i].imag();
  }
  return succeed();
}

nlslab_status nlslab_field_lp_norm(const nlslab_field* field, double p, double* out) {
  NLSLAB_REQUIRE(field && out, "null argument");
  return guarded([&] { *out = nlslab::lp_norm(field->field, p); });
}

nlslab_status nlslab_field_hdot_norm(const nlslab_field* field, double s, double* out) {
  NLSLAB_REQUIRE(field && out, "null argument");
  return guarded([&] { *out = nlslab::hdot_norm(field->field, s); });
}

nlslab_status nlslab_field_hs_norm(const nlslab_field* field, double s, double* out) {
  NLSLAB_REQUIRE(field && out, "null argument");
  return guarded([&] { *out = nlslab::hs_norm(field->field, s); });
}

nlslab_status nlslab_free_evolve(const nlslab_field* field, double t, const nlslab_model* model, nlslab_field** out) {
  NLSLAB_REQUIRE(field && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new nlslab_field{nlslab::free_evolve(field->field, t, to_model(model))}; });
}

nlslab_status nlslab_evolve(const nlslab_field* initial, const nlslab_model* model,
                            const nlslab_solver_config* config, nlslab_trajectory** out) {
  NLSLAB_REQUIRE(initial && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto spec = to_model(model);
    const auto solver = to_solver(config);
    const auto observers = nlslab::standard_observers();
    auto handle = std::make_unique<nlslab_trajectory>();
    handle->trajectory = nlslab::evolve(initial->field, spec, solver, observers);
    handle->steps = solver.steps();
    *out = handle.release();
  });
}

void nlslab_trajectory_destroy(nlslab_trajectory* trajectory) { delete trajectory; }

nlslab_status nlslab_trajectory_info(const nlslab_trajectory* trajectory, double* validity_horizon,
                                     size_t* snapshots, size_t* steps) {
  NLSLAB_REQUIRE(trajectory, "null trajectory");
  if (validity_horizon) *validity_horizon = trajectory->trajectory.validity_horizon;
  if (snapshots) *snapshots = trajectory->trajectory.snapshots.size();
  if (steps) *steps = trajectory->steps;
  return succeed();
}

nlslab_status nlslab_trajectory_series(const nlslab_trajectory* trajectory, const char* name, double* times,
                                       double* values, size_t capacity, size_t* count) {
  NLSLAB_REQUIRE(trajectory && name && count, "null argument");
  const auto& tr = trajectory->trajectory;
  if (!tr.has_series(name)) return fail(NLSLAB_E_INVALID_ARGUMENT, std::string("no series named ") + name);
  const auto& s = tr.series_named(name);
  *count = s.size();
  if (!times && !values) return succeed();
  if (capacity < s.size()) return fail(NLSLAB_E_BUFFER, "need " + std::to_string(s.size()) + " entries");
  if (times) std::memcpy(times, s.times.data(), s.size() * sizeof(double));
  if (values) std::memcpy(values, s.values.data(), s.size() * sizeof(double));
  return succeed();
}

nlslab_status nlslab_trajectory_snapshot(const nlslab_trajectory* trajectory, size_t index, double* time,
                                         nlslab_field** out) {
  NLSLAB_REQUIRE(trajectory && out, "null argument");
  *out = nullptr;
  const auto& snaps = trajectory->trajectory.snapshots;
  if (index >= snaps.size()) return fail(NLSLAB_E_INVALID_ARGUMENT, "snapshot index out of range");
  return guarded([&] {
    if (time) *time = snaps[index].time;
    *out = new nlslab_field{snaps[index].field};
  });
}

nlslab_status nlslab_trajectory_save(const nlslab_trajectory* trajectory, const char* path, uint64_t seed) {
  NLSLAB_REQUIRE(trajectory && path, "null argument");
  return guarded([&] { nlslab::write_snapshots(path, trajectory->trajectory, seed); });
}

nlslab_status nlslab_fit_decay(const double* times, const double* values, size_t count, double t_min, double t_max,
                               double* exponent, double* log_constant, double* r_squared) {
  NLSLAB_REQUIRE(times && values, "null argument");
  return guarded([&] {
    nlslab::ObservableSeries s;
    s.times.assign(times, times + count);
    s.values.assign(values, values + count);
    const auto fit = nlslab::fit_decay(s, {t_min, t_max});
    if (exponent) *exponent = fit.exponent;
    if (log_constant) *log_constant = fit.log_constant;
    if (r_squared) *r_squared = fit.r_squared;
  });
}

nlslab_status nlslab_config_parse(const char* text, nlslab_config** out) {
  NLSLAB_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new nlslab_config{nlslab::parse_config(text), {}}; });
}

nlslab_status nlslab_config_default(const char* kind, nlslab_config** out) {
  NLSLAB_REQUIRE(kind && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new nlslab_config{nlslab::default_config(nlslab::kind_from_string(kind)), {}}; });
}

void nlslab_config_destroy(nlslab_config* config) { delete config; }

nlslab_status nlslab_config_set(nlslab_config* config, const char* key, const char* value) {
  NLSLAB_REQUIRE(config && key && value, "null argument");
  return guarded([&] { config->config.set(key, value); });
}

const char* nlslab_config_get(const nlslab_config* config, const char* key) {
  if (!config || !key) return nullptr;
  const auto& values = config->config.values();
  const auto it = values.find(key);
  if (it == values.end()) return nullptr;
  return it->second.c_str();
}

const char* nlslab_config_serialize(const nlslab_config* config) {
  if (!config) return nullptr;
  config->scratch = nlslab::serialize_config(config->config);
  return config->scratch.c_str();
}

const char* nlslab_config_run_id(const nlslab_config* config) {
  if (!config) return nullptr;
  config->scratch = nlslab::run_id(config->config);
  return config->scratch.c_str();
}

uint64_t nlslab_config_hash(const nlslab_config* config) { return config ? nlslab::config_hash(config->config) : 0; }

int nlslab_config_equal(const nlslab_config* a, const nlslab_config* b) {
  return a && b && a->config == b->config ? 1 : 0;
}

nlslab_status nlslab_run_experiment(const nlslab_config* config, int jobs, nlslab_run** out) {
  NLSLAB_REQUIRE(config && out, "null argument");
  NLSLAB_REQUIRE(jobs >= 1, "jobs must be at least 1");
  *out = nullptr;
  return guarded([&] {
    auto run = std::make_unique<nlslab_run>();
    run->result = nlslab::run_experiment(config->config, {jobs});
    run->manifest = run->result.manifest.dump(2);
    *out = run.release();
  });
}

void nlslab_run_destroy(nlslab_run* run) { delete run; }

int nlslab_run_exit_code(const nlslab_run* run) { return run ? run->result.exit_code : -1; }
const char* nlslab_run_status(const nlslab_run* run) { return run ? run->result.status.c_str() : nullptr; }
const char* nlslab_run_id(const nlslab_run* run) { return run ? run->result.run_id.c_str() : nullptr; }
const char* nlslab_run_directory(const nlslab_run* run) { return run ? run->result.directory.c_str() : nullptr; }
const char* nlslab_run_error(const nlslab_run* run) { return run ? run->result.error.c_str() : nullptr; }
const char* nlslab_run_manifest(const nlslab_run* run) { return run ? run->manifest.c_str() : nullptr; }

nlslab_status nlslab_report_build(const char* const* patterns, size_t count, nlslab_report** out) {
  NLSLAB_REQUIRE(out && (patterns || count == 0), "null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<std::string> list;
    for (size_t i = 0; i < count; ++i) {
      if (!patterns[i]) throw nlslab::InvalidArgument("null pattern");
      list.emplace_back(patterns[i]);
    }
    *out = new nlslab_report{nlslab::build_report(list)};
  });
}

void nlslab_report_destroy(nlslab_report* report) { delete report; }

const char* nlslab_report_markdown(const nlslab_report* report) {
  return report ? report->document.markdown.c_str() : nullptr;
}

size_t nlslab_report_missing(const nlslab_report* report) { return report ? report->document.missing.size() : 0; }

}  // extern "C"
