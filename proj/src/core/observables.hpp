#pragma once

#include <string>
#include <utility>
#include <vector>

#include "field.hpp"
#include "series.hpp"
#include "solver.hpp"

namespace nlslab {

// Running supremum A(t) = sup_{tau <= t} tau^(3/2) ||u(tau)||_inf.
struct DecayEnvelope {
  std::vector<double> times;
  std::vector<double> values;
};

DecayEnvelope decay_envelope(const ObservableSeries& linf_series);

// x_a u + 2 i t d_a u, one field per active axis.
std::vector<ComplexField> j_field(const ComplexField& u, double t);
double j_norm(const ComplexField& u, double t);

// ||J(t) u||^2 + 8/(p+1) t^2 ||u||_{p+1}^{p+1}. At t = 0 this is ||x u||^2.
double pseudoconformal_V(const ComplexField& u, double t, int power);

// dV/dt = 4t/(p+1) (4 - d(p-1)) ||u||_{p+1}^{p+1} along a defocusing flow.
double pseudoconformal_rate(const ComplexField& u, double t, int power);

struct WeightedL6 {
  double lhs = 0.0;  // ||u||_6
  double rhs = 0.0;  // ||J(t) u||_2 / t
};

WeightedL6 weighted_l6_check(const ComplexField& u, double t);

struct MorawetzSummary {
  double spacetime_l4_4th = 0.0;  // int ||u(t)||_4^4 dt
  double bound = 0.0;             // mass * sup_t ||u(t)||_{Hdot^1/2}^2
};

// Uses the "l4", "h_half_dot" and "mass" series when the trajectory has them,
// the stored snapshots otherwise.
MorawetzSummary morawetz_accumulate(const Trajectory& trajectory);

// (int ||u(t)||_p^p dt)^(1/p) from a series of ||u(t)||_p (trapezoid in time).
double spacetime_norm(const ObservableSeries& lp_series, double p);

struct DataProfile {
  double l1 = 0.0;
  double h1 = 0.0;
  double x_l2 = 0.0;
  double m1 = 0.0;           // ||u0||_1 + (||u0||_H1 + 1)^2
  double m1_variance = 0.0;  // m1 + ||x u0||_2
};

DataProfile data_profile(const ComplexField& u0);

// 2/q + d/r = d/2 with q, r in [2, inf] (infinity allowed for q).
bool is_admissible_pair(double q, double r, int dim = 3);

struct PseudoconformalImage {
  ComplexField field;
  double s = 0.0;
};

// u~(x) = t^(d/2) u(t x) exp(-i t |x|^2 / 4) with s = -1/t, so that
// 1/2 ||grad u~||^2 = 1/8 ||J(t) u||^2. Values are obtained by evaluating the
// trigonometric interpolant of u on the dilated lattice. Throws DomainError
// when u has more than `tolerance` of its mass where the dilated lattice does
// not reach, or when the image has more than `tolerance` of its mass outside
// the dealias band or in the boundary shell.
PseudoconformalImage pseudoconformal_transform(const ComplexField& u_at_t, double t, double tolerance = 1e-8);

// Inverse map: recovers u at t = -1/s from its image.
ComplexField inverse_pseudoconformal_transform(const ComplexField& image, double s, double tolerance = 1e-8);

// 1/2 ||grad v||^2 + 1/4 (-s) int |v|^4, the energy of the transformed flow.
double transformed_energy(const ComplexField& image, double s);

// Fields interpolated at scaled coordinates: out(x) = u(scale * x), zero
// where scale * x leaves the box. Exposed for tests.
ComplexField resample_dilated(const ComplexField& u, double scale);

}  // namespace nlslab
