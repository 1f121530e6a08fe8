#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "field.hpp"
#include "series.hpp"
#include "solver.hpp"

namespace nlslab {

// u(t) - e^{it Delta} u0 from the stored snapshot at t (t <= horizon); u0 is
// dealias-projected when the flow is nonlinear.
ComplexField u_nl(const Trajectory& trajectory, double t);

struct CauchyGap {
  double T = 0.0;
  double gap = 0.0;  // ||u+_T - u+_{T/2}||_{Hdot^1/2}
};

struct ScatteringState {
  ComplexField u_plus;
  // (4 u+_T - u+_{T/2}) / 3, removing the leading T^-2 error of u+_T.
  ComplexField u_plus_extrapolated;
  double extraction_time = 0.0;
  double cauchy_gap = 0.0;
  std::vector<CauchyGap> gaps;
  bool converged = false;
  std::string diagnostic;
};

// u+_T := e^{-iT Delta} u(T) for every T in the list (each T and T/2 must be
// snapshot times). Accepts the largest T whose gap is below tolerance;
// converged is false, with a diagnostic, when no gap qualifies or the gaps do
// not decrease.
ScatteringState extract_scattering_state(const Trajectory& trajectory, const std::vector<double>& T_list,
                                         double tolerance);

struct ScatteringRate {
  ObservableSeries series;  // ||u(t) - e^{it Delta} u+||_{Hdot^1/2}
  std::optional<DecayFit> fit;
  bool exact = false;  // series vanishes to roundoff (linear flow)
};

// Measured against the extrapolated state. The window defaults to [T/4, T/2].
ScatteringRate scattering_rate(const Trajectory& trajectory, const ScatteringState& state,
                               std::optional<FitWindow> window = std::nullopt);

struct SpacetimeTail {
  std::vector<double> s;
  std::vector<double> tails;    // ||u||_{L^5_{t,x}(t >= s)} including the remainder estimate
  std::vector<double> proxies;  // remainder / (truncated integral + remainder)
  double integrand_exponent = 0.0;
  double horizon = 0.0;
  std::optional<DecayFit> fit;  // over s values whose proxy is below 10%
  bool flagged = false;         // some requested s had proxy >= 10%
};

// Tail integrals of ||u(t)||_5^5 truncated at the validity horizon; the part
// beyond it is estimated from a power-law fit of the integrand over
// [horizon/2, horizon].
SpacetimeTail spacetime_tail(const Trajectory& trajectory, const std::vector<double>& s_list);

struct DuhamelSplit {
  double t = 0.0;
  double M = 0.0;
  ComplexField free_part;  // e^{it Delta} P u0, P the dealias projection when mu != 0
  ComplexField F1, F2, F3;
  double residual = 0.0;   // L2 norm of u(t) - (free + F1 + F2 + F3)
  std::size_t nodes = 0;
};

// F_i = -i int over [0,M], [M,t-M], [t-M,t] of e^{i(t-s)Delta} N(u(s)) ds by
// trapezoid on the snapshots (every node_step-th one). The nonlinearity is
// projected with the solver's dealias mask, matching the discrete flow.
// Throws DomainError when the residual exceeds residual_tol.
DuhamelSplit duhamel_split(const Trajectory& trajectory, double t, double M, std::size_t node_step = 1,
                           double residual_tol = std::numeric_limits<double>::infinity());

// min(t/2, c * M1^4).
double default_window_parameter(double t, double m1, double c = 1.0);

}  // namespace nlslab
