#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "field.hpp"
#include "model.hpp"
#include "series.hpp"

namespace nlslab {

struct SolverConfig {
  double dt = 1e-2;
  double t_end = 1.0;
  double dealias_ratio = 2.0 / 3.0;
  int snapshot_stride = 1;
  double boundary_shell_fraction = 0.1;
  double boundary_mass_tol = 1e-6;

  void validate() const;
  // Number of steps; t_end must be an integer multiple of dt up to 1e-9.
  std::size_t steps() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct ConservedPair {
  double mass = 0.0;
  // 1/2 <omega(D) u, u> + sign / (p+1) * int |u|^(p+1); for the Schrodinger
  // symbol the first term is 1/2 int |grad u|^2.
  double energy = 0.0;
};

ConservedPair conserved(const ComplexField& u, const ModelSpec& model);
ConservedPair conserved(const ComplexField& u, const SpectralField& spec, const ModelSpec& model);

// State handed to observers after every step (and once at t = 0). Both views
// describe the same field.
struct StepState {
  double time = 0.0;
  std::size_t step = 0;
  const ComplexField& physical;
  const SpectralField& spectral;
  const ModelSpec& model;
};

struct Observable {
  std::string name;
  std::function<double(const StepState&)> evaluate;
  std::size_t stride = 1;  // evaluated on steps divisible by stride
};

using StepHook = std::function<void(const StepState&)>;

struct Snapshot {
  double time = 0.0;
  ComplexField field;
};

struct Trajectory {
  ModelSpec model;
  SolverConfig config;
  ComplexField initial;
  std::vector<double> times;
  std::vector<Snapshot> snapshots;  // t = 0 and every snapshot_stride steps
  std::map<std::string, ObservableSeries> series;
  // First time the boundary shell held more than boundary_mass_tol of the
  // mass, or t_end when that never happened.
  double validity_horizon = 0.0;
  std::vector<std::string> warnings;

  const Grid& grid() const noexcept { return initial.grid(); }
  bool has_series(const std::string& name) const { return series.count(name) != 0; }
  const ObservableSeries& series_named(const std::string& name) const;
  // Snapshot whose time matches t to 1e-9 * max(1, t); throws otherwise.
  const Snapshot& snapshot_at(double t) const;
  double snapshot_spacing() const;
};

// u -> u exp(-i sign |u|^(p-1) dt), exact for the frozen-modulus ODE.
void nonlinear_substep_in_place(std::span<Complex> u, double dt, const ModelSpec& model);
ComplexField nonlinear_substep(const ComplexField& u, double dt, const ModelSpec& model);

// free(dt/2) o mask o nonlinear(dt) o free(dt/2). The mask is skipped for the
// linear model, where the nonlinear substep is the identity. Throws
// NumericalAbort when the result is not finite. dt may be negative.
ComplexField strang_step(const ComplexField& u, double dt, const ModelSpec& model, const SolverConfig& config);

// Runs to t_end; observers are evaluated at t = 0 and after every step and
// the hook (when set) is called at the same times.
Trajectory evolve(const ComplexField& u0, const ModelSpec& model, const SolverConfig& config,
                  std::span<const Observable> observers = {}, const StepHook& hook = {});

}  // namespace nlslab
