#include "scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "model.hpp"
#include "norms.hpp"
#include "observables.hpp"
#include "spectral.hpp"

namespace nlslab {

namespace {

// The solver projects after every nonlinear substep, so the modes it removes
// from u0 never reach u(t) for t > 0.
ComplexField free_part(const Trajectory& trajectory, double t) {
  if (trajectory.model.sign == 0) return free_evolve(trajectory.initial, t, trajectory.model);
  const auto& g = trajectory.initial.grid();
  auto spec = apply_mask(to_spectral(trajectory.initial), dealias_mask(g, trajectory.config.dealias_ratio));
  return to_physical(free_evolve(std::move(spec), t, trajectory.model));
}

}  // namespace

ComplexField u_nl(const Trajectory& trajectory, double t) {
  if (t > trajectory.validity_horizon * (1.0 + 1e-12))
    throw DomainError("u_nl requested past the validity horizon");
  const auto& snap = trajectory.snapshot_at(t);
  return snap.field - free_part(trajectory, snap.time);
}

namespace {

SpectralField pulled_back(const Trajectory& trajectory, double t) {
  const auto& snap = trajectory.snapshot_at(t);
  return free_evolve(to_spectral(snap.field), -snap.time, trajectory.model);
}

SpectralField difference(SpectralField a, const SpectralField& b) {
  auto c = a.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return a;
}

}  // namespace

ScatteringState extract_scattering_state(const Trajectory& trajectory, const std::vector<double>& T_list,
                                         double tolerance) {
  if (T_list.empty()) throw InvalidArgument("scattering extraction needs at least one time");
  for (std::size_t i = 0; i < T_list.size(); ++i) {
    if (!(T_list[i] > 0.0)) throw InvalidArgument("extraction times must be positive");
    if (i > 0 && !(T_list[i] > T_list[i - 1])) throw InvalidArgument("extraction times must increase");
    if (T_list[i] > trajectory.validity_horizon * (1.0 + 1e-12))
      throw DomainError("extraction time lies past the validity horizon");
  }

  ScatteringState state;
  std::optional<SpectralField> accepted, accepted_half;
  double floor = 0.0;
  for (double T : T_list) {
    const auto plus_T = pulled_back(trajectory, T);
    const auto plus_half = pulled_back(trajectory, 0.5 * T);
    const double gap = hdot_norm(difference(plus_T, plus_half), 0.5);
    floor = std::max(floor, 1e-12 * hdot_norm(plus_T, 0.5));
    state.gaps.push_back({T, gap});
    if (gap <= tolerance) {
      accepted = plus_T;
      accepted_half = plus_half;
      state.extraction_time = T;
      state.cauchy_gap = gap;
    }
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < state.gaps.size(); ++i)
    decreasing = decreasing && (state.gaps[i].gap <= state.gaps[i - 1].gap || state.gaps[i].gap <= floor);

  std::ostringstream diag;
  if (!accepted) {
    diag << "no extraction time reached the gap tolerance " << tolerance;
  } else if (!decreasing) {
    diag << "Cauchy gaps do not decrease; the box is too small or the data too large";
  }
  state.diagnostic = diag.str();
  state.converged = accepted.has_value() && decreasing;
  if (accepted) {
    state.u_plus = to_physical(*accepted);
    SpectralField ex = *accepted;
    auto c = ex.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (4.0 * c[i] - (*accepted_half)[i]) / 3.0;
    state.u_plus_extrapolated = to_physical(ex);
  }
  return state;
}

ScatteringRate scattering_rate(const Trajectory& trajectory, const ScatteringState& state,
                               std::optional<FitWindow> window) {
  if (!state.converged) throw DomainError("scattering rate needs an accepted scattering state: " + state.diagnostic);
  const auto plus = to_spectral(state.u_plus_extrapolated);
  ScatteringRate out;
  out.series.name = "scattering_gap";
  double scale = hdot_norm(plus, 0.5);
  double largest = 0.0;
  for (const auto& snap : trajectory.snapshots) {
    if (!(snap.time > 0.0) || snap.time > state.extraction_time * (1.0 + 1e-12)) continue;
    const double d = hdot_norm(difference(pulled_back(trajectory, snap.time), plus), 0.5);
    out.series.push(snap.time, d);
    largest = std::max(largest, d);
  }
  out.exact = largest <= 1e-12 * std::max(scale, 1e-300) || largest == 0.0;
  if (out.exact) return out;
  FitWindow w = window.value_or(FitWindow{0.25 * state.extraction_time, 0.5 * state.extraction_time});
  out.fit = fit_decay(out.series, w, trajectory.validity_horizon);
  return out;
}

SpacetimeTail spacetime_tail(const Trajectory& trajectory, const std::vector<double>& s_list) {
  std::vector<double> t, f;
  if (trajectory.has_series("l5")) {
    const auto& l5 = trajectory.series_named("l5");
    for (std::size_t i = 0; i < l5.size(); ++i) {
      t.push_back(l5.times[i]);
      f.push_back(std::pow(l5.values[i], 5.0));
    }
  } else {
    for (const auto& snap : trajectory.snapshots) {
      t.push_back(snap.time);
      f.push_back(lp_integral(snap.field, 5.0));
    }
  }
  SpacetimeTail out;
  out.horizon = trajectory.validity_horizon;
  const double H = out.horizon;
  if (!(H > 0.0)) throw DomainError("spacetime tail needs a positive validity horizon");

  // Remainder beyond the horizon from the integrand's decay over [H/2, H].
  double remainder = 0.0;
  const bool all_zero = std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; });
  if (!all_zero) {
    ObservableSeries integrand{"l5_5th", {}, {}};
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] > 0.0) integrand.push(t[i], f[i]);
    const auto ifit = fit_decay(integrand, {0.5 * H, H}, H);
    out.integrand_exponent = ifit.exponent;
    const double q = ifit.exponent;
    remainder = q > 1.0 ? std::exp(ifit.log_constant) * std::pow(H, 1.0 - q) / (q - 1.0)
                        : std::numeric_limits<double>::infinity();
  }

  ObservableSeries fitted{"l5_tail", {}, {}};
  for (double s : s_list) {
    if (!(s > 0.0) || s >= H) throw InvalidArgument("tail start times must lie in (0, horizon)");
    const double truncated = trapezoid(t, f, s, H);
    const double total = truncated + remainder;
    const double proxy = total > 0.0 ? remainder / total : 0.0;
    out.s.push_back(s);
    out.tails.push_back(std::pow(total, 0.2));
    out.proxies.push_back(proxy);
    if (proxy >= 0.1) out.flagged = true;
    else if (total > 0.0) fitted.push(s, std::pow(total, 0.2));
  }
  if (fitted.size() >= 8) out.fit = fit_decay(fitted, {fitted.times.front(), fitted.times.back()}, H);
  return out;
}

double default_window_parameter(double t, double m1, double c) {
  return std::min(0.5 * t, c * std::pow(m1, 4.0));
}

DuhamelSplit duhamel_split(const Trajectory& trajectory, double t, double M, std::size_t node_step,
                           double residual_tol) {
  if (!(M > 0.0) || M > 0.5 * t * (1.0 + 1e-12)) throw InvalidArgument("window parameter needs 0 < M <= t/2");
  if (node_step == 0) throw InvalidArgument("node step must be positive");
  const Grid& g = trajectory.grid();
  const ModelSpec& model = trajectory.model;

  std::vector<const Snapshot*> nodes;
  for (std::size_t i = 0; i < trajectory.snapshots.size(); i += node_step) {
    const auto& snap = trajectory.snapshots[i];
    if (snap.time > t * (1.0 + 1e-12)) break;
    nodes.push_back(&snap);
  }
  if (nodes.size() < 2 || std::abs(nodes.back()->time - t) > 1e-9 * std::max(1.0, t))
    throw InvalidArgument("snapshots do not cover [0, t] with nodes at both ends for this node step");

  // Weights of the piecewise-linear interpolant integrated over each window.
  const double cuts[4] = {0.0, M, t - M, t};
  std::vector<std::array<double, 3>> weights(nodes.size(), {0.0, 0.0, 0.0});
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double a = nodes[k]->time, b = nodes[k + 1]->time, h = b - a;
    for (int w = 0; w < 3; ++w) {
      const double lo = std::max(a, cuts[w]), hi = std::min(b, cuts[w + 1]);
      if (!(hi > lo)) continue;
      // int_lo^hi (b - s)/h ds and int_lo^hi (s - a)/h ds
      weights[k][w] += ((b - lo) * (b - lo) - (b - hi) * (b - hi)) / (2.0 * h);
      weights[k + 1][w] += ((hi - a) * (hi - a) - (lo - a) * (lo - a)) / (2.0 * h);
    }
  }

  const auto omega = dispersion_table(g, model);
  std::vector<Complex> mask(g.size(), Complex(1.0, 0.0));
  if (model.sign != 0) {
    const auto m = dealias_mask(g, trajectory.config.dealias_ratio);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = m[i];
  }
  std::array<ComplexBuffer, 3> acc;
  for (auto& a : acc) a.assign(g.size(), Complex(0.0, 0.0));
  ComplexBuffer work(g.size());
  const double exponent = 0.5 * (model.power - 1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (model.sign == 0) break;
    const auto u = nodes[k]->field.values();
    for (std::size_t i = 0; i < work.size(); ++i) {
      const double mod = model.power == 3 ? std::norm(u[i]) : std::pow(std::norm(u[i]), exponent);
      work[i] = static_cast<double>(model.sign) * mod * u[i];
    }
    forward_in_place(g, work);
    const double lag = t - nodes[k]->time;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const double ph = -lag * omega[i];
      work[i] *= mask[i] * Complex(std::cos(ph), std::sin(ph));
    }
    for (int w = 0; w < 3; ++w) {
      const double wk = weights[k][w];
      if (wk == 0.0) continue;
      for (std::size_t i = 0; i < work.size(); ++i) acc[w][i] += wk * work[i];
    }
  }

  DuhamelSplit out;
  out.t = t;
  out.M = M;
  out.nodes = nodes.size();
  out.free_part = free_part(trajectory, t);
  ComplexField* targets[3] = {&out.F1, &out.F2, &out.F3};
  for (int w = 0; w < 3; ++w) {
    for (auto& v : acc[w]) v *= Complex(0.0, -1.0);
    backward_in_place(g, acc[w]);
    *targets[w] = ComplexField(g, std::move(acc[w]));
  }
  ComplexField recon = out.free_part + out.F1 + out.F2 + out.F3;
  out.residual = lp_norm(nodes.back()->field - recon, 2.0);
  if (out.residual > residual_tol) {
    std::ostringstream msg;
    msg << "Duhamel residual " << out.residual << " exceeds " << residual_tol << "; snapshot stride too coarse";
    throw DomainError(msg.str());
  }
  return out;
}

}  // namespace nlslab
