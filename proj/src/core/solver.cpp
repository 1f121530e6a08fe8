#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "norms.hpp"
#include "spectral.hpp"

namespace nlslab {

void SolverConfig::validate() const {
  std::vector<std::string> bad;
  if (!(dt > 0.0 && dt < 1.0)) bad.push_back("solver.dt must lie in (0, 1)");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) bad.push_back("solver.t_end must be positive");
  if (!(dealias_ratio > 0.0 && dealias_ratio <= 1.0)) bad.push_back("solver.dealias_ratio must lie in (0, 1]");
  if (snapshot_stride < 1) bad.push_back("solver.snapshot_stride must be >= 1");
  if (!(boundary_shell_fraction > 0.0 && boundary_shell_fraction < 0.5))
    bad.push_back("solver.shell_fraction must lie in (0, 0.5)");
  if (!(boundary_mass_tol > 0.0 && boundary_mass_tol < 1.0)) bad.push_back("solver.shell_tol must lie in (0, 1)");
  if (bad.empty()) {
    const double ratio = t_end / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
      bad.push_back("solver.t_end must be an integer multiple of solver.dt");
  }
  if (!bad.empty()) throw ConfigError(std::move(bad));
}

std::size_t SolverConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

ConservedPair conserved(const ComplexField& u, const SpectralField& spec, const ModelSpec& model) {
  ConservedPair out;
  const auto table = shared_dispersion_table(u.grid(), model);
  const auto& omega = *table;
  double kinetic = 0.0, mass_modes = 0.0;
  const auto c = spec.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a = std::norm(c[i]);
    kinetic += omega[i] * a;
    mass_modes += a;
  }
  const double vol = u.grid().volume();
  out.mass = vol * mass_modes;
  out.energy = 0.5 * vol * kinetic;
  if (model.sign != 0)
    out.energy += model.sign / static_cast<double>(model.power + 1) * lp_integral(u, model.power + 1);
  return out;
}

ConservedPair conserved(const ComplexField& u, const ModelSpec& model) {
  return conserved(u, to_spectral(u), model);
}

const ObservableSeries& Trajectory::series_named(const std::string& name) const {
  auto it = series.find(name);
  if (it == series.end()) throw InvalidArgument("trajectory has no series named '" + name + "'");
  return it->second;
}

const Snapshot& Trajectory::snapshot_at(double t) const {
  for (const auto& s : snapshots)
    if (std::abs(s.time - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
  std::ostringstream msg;
  msg << "no snapshot stored at t = " << t;
  throw InvalidArgument(msg.str());
}

double Trajectory::snapshot_spacing() const { return config.dt * config.snapshot_stride; }

void nonlinear_substep_in_place(std::span<Complex> u, double dt, const ModelSpec& model) {
  if (model.sign == 0) return;
  const double scale = -static_cast<double>(model.sign) * dt;
  if (model.power == 3) {
    for (auto& v : u) {
      const double phase = scale * std::norm(v);
      v *= Complex(std::cos(phase), std::sin(phase));
    }
  } else {
    const double half = 0.5 * (model.power - 1);
    for (auto& v : u) {
      const double phase = scale * std::pow(std::norm(v), half);
      v *= Complex(std::cos(phase), std::sin(phase));
    }
  }
}

ComplexField nonlinear_substep(const ComplexField& u, double dt, const ModelSpec& model) {
  ComplexField out = u;
  nonlinear_substep_in_place(out.values(), dt, model);
  return out;
}

namespace {

void require_finite(std::span<const Complex> data, double t) {
  for (const auto& v : data) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream msg;
      msg << "nonfinite values at t = " << t << "; the step is unstable, try a smaller dt";
      throw NumericalAbort(msg.str());
    }
  }
}

std::vector<double> mask_table(const Grid& grid, double ratio) {
  const auto mask = dealias_mask(grid, ratio);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i].real();
  return out;
}

std::vector<Complex> phase_table(std::span<const double> omega, double t) {
  std::vector<Complex> out(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) out[i] = Complex(std::cos(-t * omega[i]), std::sin(-t * omega[i]));
  return out;
}

}  // namespace

ComplexField strang_step(const ComplexField& u, double dt, const ModelSpec& model, const SolverConfig& config) {
  model.validate();
  const Grid& g = u.grid();
  const auto omega = dispersion_table(g, model);
  ComplexBuffer work(u.values().begin(), u.values().end());
  forward_in_place(g, work);
  apply_free_phase(work, omega, 0.5 * dt);
  backward_in_place(g, work);
  nonlinear_substep_in_place(work, dt, model);
  forward_in_place(g, work);
  if (model.sign != 0) {
    const auto mask = mask_table(g, config.dealias_ratio);
    for (std::size_t i = 0; i < work.size(); ++i) work[i] *= mask[i];
  }
  apply_free_phase(work, omega, 0.5 * dt);
  backward_in_place(g, work);
  require_finite(work, dt);
  return ComplexField(g, std::move(work));
}

Trajectory evolve(const ComplexField& u0, const ModelSpec& model, const SolverConfig& config,
                  std::span<const Observable> observers, const StepHook& hook) {
  model.validate();
  config.validate();
  if (!u0.all_finite()) throw NumericalAbort("initial data is not finite");

  const Grid& g = u0.grid();
  const std::size_t n_steps = config.steps();
  const auto omega = dispersion_table(g, model);
  const auto half = phase_table(omega, 0.5 * config.dt);
  std::vector<Complex> combined(half);  // mask * half step, applied after the nonlinear substep
  if (model.sign != 0) {
    const auto mask = mask_table(g, config.dealias_ratio);
    for (std::size_t i = 0; i < combined.size(); ++i) combined[i] *= mask[i];
  }

  Trajectory traj;
  traj.model = model;
  traj.config = config;
  traj.initial = u0;
  traj.times.reserve(n_steps + 1);
  traj.validity_horizon = config.t_end;
  for (const auto& obs : observers) traj.series[obs.name].name = obs.name;

  ComplexField physical = u0;
  SpectralField spectral = to_spectral(u0);
  ComplexBuffer work(g.size());
  bool horizon_found = false;

  if (boundary_shell_mass_fraction(u0, config.boundary_shell_fraction) > config.boundary_mass_tol) {
    traj.validity_horizon = 0.0;
    horizon_found = true;
    traj.warnings.push_back("initial data already exceeds the boundary-shell mass tolerance");
  }

  auto record = [&](std::size_t step, double t) {
    traj.times.push_back(t);
    const StepState state{t, step, physical, spectral, model};
    for (const auto& obs : observers)
      if (step % std::max<std::size_t>(1, obs.stride) == 0) traj.series[obs.name].push(t, obs.evaluate(state));
    if (hook) hook(state);
    if (step % static_cast<std::size_t>(config.snapshot_stride) == 0) traj.snapshots.push_back({t, physical});
  };
  record(0, 0.0);

  auto c = spectral.coefficients();
  auto u = physical.values();
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double t = static_cast<double>(step) * config.dt;
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = c[i] * half[i];
    backward_in_place(g, work);
    nonlinear_substep_in_place(work, config.dt, model);
    forward_in_place(g, work);
    for (std::size_t i = 0; i < work.size(); ++i) c[i] = work[i] * combined[i];
    std::copy(c.begin(), c.end(), u.begin());
    backward_in_place(g, u);
    require_finite(u, t);

    if (!horizon_found &&
        boundary_shell_mass_fraction(physical, config.boundary_shell_fraction) > config.boundary_mass_tol) {
      horizon_found = true;
      traj.validity_horizon = t;
    }
    record(step, t);
  }
  if (traj.validity_horizon < config.t_end) {
    std::ostringstream msg;
    msg << "validity horizon " << traj.validity_horizon << " is earlier than t_end " << config.t_end;
    traj.warnings.push_back(msg.str());
  }
  return traj;
}

}  // namespace nlslab
