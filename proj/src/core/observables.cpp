#include "observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "error.hpp"
#include "norms.hpp"
#include "spectral.hpp"

namespace nlslab {

DecayEnvelope decay_envelope(const ObservableSeries& linf_series) {
  linf_series.validate();
  DecayEnvelope env;
  env.times = linf_series.times;
  env.values.reserve(linf_series.size());
  double running = 0.0;
  for (std::size_t i = 0; i < linf_series.size(); ++i) {
    const double t = linf_series.times[i];
    if (t < 0.0) throw InvalidArgument("decay envelope needs nonnegative times");
    running = std::max(running, std::pow(t, 1.5) * linf_series.values[i]);
    env.values.push_back(running);
  }
  return env;
}

std::vector<ComplexField> j_field(const ComplexField& u, double t) {
  const Grid& g = u.grid();
  const SpectralField spec = to_spectral(u);
  std::vector<ComplexField> out;
  for (int axis = 0; axis < g.dim(); ++axis) {
    ComplexBuffer grad(spec.coefficients().begin(), spec.coefficients().end());
    for_each_mode(g, [&](std::size_t idx, const Vec3& xi) { grad[idx] *= Complex(0.0, xi[axis]); });
    backward_in_place(g, grad);
    ComplexField ja(g, std::move(grad));
    const Complex factor(0.0, 2.0 * t);
    for_each_point(g, [&](std::size_t idx, const Vec3& x) { ja[idx] = x[axis] * u[idx] + factor * ja[idx]; });
    out.push_back(std::move(ja));
  }
  return out;
}

double j_norm(const ComplexField& u, double t) {
  double s = 0.0;
  for (const auto& ja : j_field(u, t)) s += lp_integral(ja, 2.0);
  return std::sqrt(s);
}

double pseudoconformal_V(const ComplexField& u, double t, int power) {
  const double j = j_norm(u, t);
  return j * j + 8.0 / (power + 1) * t * t * lp_integral(u, power + 1);
}

double pseudoconformal_rate(const ComplexField& u, double t, int power) {
  const int d = u.grid().dim();
  return 4.0 * t / (power + 1) * (4.0 - d * (power - 1)) * lp_integral(u, power + 1);
}

WeightedL6 weighted_l6_check(const ComplexField& u, double t) {
  if (!(t > 0.0)) throw InvalidArgument("weighted L6 check needs t > 0");
  return {lp_norm(u, 6.0), j_norm(u, t) / t};
}

double spacetime_norm(const ObservableSeries& lp_series, double p) {
  std::vector<double> powered(lp_series.values.size());
  for (std::size_t i = 0; i < powered.size(); ++i) powered[i] = std::pow(lp_series.values[i], p);
  const double integral =
      lp_series.times.empty() ? 0.0 : trapezoid(lp_series.times, powered, lp_series.times.front(), lp_series.times.back());
  return std::pow(integral, 1.0 / p);
}

MorawetzSummary morawetz_accumulate(const Trajectory& trajectory) {
  std::vector<double> t, l4_4th, hhalf;
  double mass = 0.0;
  if (trajectory.has_series("l4") && trajectory.has_series("h_half_dot")) {
    const auto& l4 = trajectory.series_named("l4");
    t = l4.times;
    for (double v : l4.values) l4_4th.push_back(v * v * v * v);
    hhalf = trajectory.series_named("h_half_dot").values;
    mass = trajectory.has_series("mass") ? trajectory.series_named("mass").values.front()
                                         : lp_integral(trajectory.initial, 2.0);
  } else {
    for (const auto& snap : trajectory.snapshots) {
      t.push_back(snap.time);
      l4_4th.push_back(lp_integral(snap.field, 4.0));
      hhalf.push_back(hdot_norm(snap.field, 0.5));
    }
    mass = lp_integral(trajectory.initial, 2.0);
  }
  MorawetzSummary out;
  if (t.size() >= 2) out.spacetime_l4_4th = trapezoid(t, l4_4th, t.front(), t.back());
  double sup = 0.0;
  for (double h : hhalf) sup = std::max(sup, h * h);
  out.bound = mass * sup;
  return out;
}

DataProfile data_profile(const ComplexField& u0) {
  DataProfile p;
  p.l1 = lp_norm(u0, 1.0);
  p.h1 = hs_norm(u0, 1.0);
  p.x_l2 = weighted_x_norm(u0);
  p.m1 = p.l1 + (p.h1 + 1.0) * (p.h1 + 1.0);
  p.m1_variance = p.m1 + p.x_l2;
  return p;
}

bool is_admissible_pair(double q, double r, int dim) {
  if (!(q >= 2.0) || !(r >= 2.0)) return false;
  const double lhs = (std::isinf(q) ? 0.0 : 2.0 / q) + (std::isinf(r) ? 0.0 : dim / r);
  return std::abs(lhs - 0.5 * dim) <= 1e-12;
}

namespace {

// E[j][m] = exp(i xi_m * scale * x_j), with the Nyquist mode split as a
// cosine so the interpolant of a band-limited field is exact. Points that
// fall outside [-L/2, L/2) get an all-zero row.
std::vector<Complex> interpolation_matrix(const Grid& g, double scale) {
  const int n = g.points_per_axis();
  const double half = 0.5 * g.box_length();
  std::vector<Complex> e(static_cast<std::size_t>(n) * n, Complex(0.0, 0.0));
  for (int j = 0; j < n; ++j) {
    const double y = scale * g.coordinate(j);
    if (y < -half - 1e-12 * half || y >= half) continue;
    for (int k = 0; k < n; ++k) {
      const double phase = g.wavenumber(k) * y;
      e[static_cast<std::size_t>(j) * n + k] =
          g.mode(k) == -n / 2 ? Complex(std::cos(phase), 0.0) : Complex(std::cos(phase), std::sin(phase));
    }
  }
  return e;
}

// Apply the per-axis matrix along every active axis of a coefficient array.
ComplexBuffer apply_separable(const Grid& g, const std::vector<Complex>& e, ComplexBuffer data) {
  const int n = g.points_per_axis();
  ComplexBuffer line_in(n), line_out(n);
  for (int axis = 0; axis < g.dim(); ++axis) {
    std::size_t stride = 1;
    for (int a = g.dim() - 1; a > axis; --a) stride *= static_cast<std::size_t>(n);
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < data.size(); base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (int k = 0; k < n; ++k) line_in[k] = data[base + off + k * stride];
        for (int j = 0; j < n; ++j) {
          Complex acc(0.0, 0.0);
          const Complex* row = &e[static_cast<std::size_t>(j) * n];
          for (int k = 0; k < n; ++k) acc += row[k] * line_in[k];
          line_out[j] = acc;
        }
        for (int j = 0; j < n; ++j) data[base + off + j * stride] = line_out[j];
      }
    }
  }
  return data;
}

double mass_outside_cube(const ComplexField& u, double half_width) {
  double outside = 0.0, total = 0.0;
  const int d = u.grid().dim();
  for_each_point(u.grid(), [&](std::size_t idx, const Vec3& x) {
    const double m = std::norm(u[idx]);
    total += m;
    bool out = false;
    for (int a = 0; a < d; ++a) out = out || std::abs(x[a]) >= half_width;
    if (out) outside += m;
  });
  return total > 0.0 ? outside / total : 0.0;
}

double mass_outside_band(const SpectralField& spec, double ratio) {
  const auto mask = dealias_mask(spec.grid(), ratio);
  double outside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double m = std::norm(spec[i]);
    total += m;
    if (mask[i].real() == 0.0) outside += m;
  }
  return total > 0.0 ? outside / total : 0.0;
}

void check_image(const ComplexField& image, double tolerance, const char* what) {
  const double band = mass_outside_band(to_spectral(image), 2.0 / 3.0);
  if (band > tolerance)
    throw DomainError(std::string(what) + ": dilation pushes " + std::to_string(band) +
                      " of the mass into the dealiased band");
  const double shell = boundary_shell_mass_fraction(image, 0.1);
  if (shell > tolerance)
    throw DomainError(std::string(what) + ": rescaled support reaches the boundary shell (" + std::to_string(shell) +
                      " of the mass)");
}

}  // namespace

ComplexField resample_dilated(const ComplexField& u, double scale) {
  const Grid& g = u.grid();
  const auto spec = to_spectral(u);
  ComplexBuffer data(spec.coefficients().begin(), spec.coefficients().end());
  return ComplexField(g, apply_separable(g, interpolation_matrix(g, scale), std::move(data)));
}

PseudoconformalImage pseudoconformal_transform(const ComplexField& u_at_t, double t, double tolerance) {
  if (!(t > 0.0)) throw InvalidArgument("pseudo-conformal transform needs t > 0");
  const Grid& g = u_at_t.grid();
  // The image samples u at t x, so for t < 1 only |y| < t L / 2 is seen.
  if (t < 1.0) {
    const double lost = mass_outside_cube(u_at_t, 0.5 * g.box_length() * t);
    if (lost > tolerance)
      throw DomainError("rescaled support does not fit in the box: " + std::to_string(lost) +
                        " of the mass lies beyond the dilated lattice");
  }
  ComplexField image = resample_dilated(u_at_t, t);
  const double amp = std::pow(t, 0.5 * g.dim());
  for_each_point(g, [&](std::size_t idx, const Vec3& x) {
    const double phase = -0.25 * t * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    image[idx] *= amp * Complex(std::cos(phase), std::sin(phase));
  });
  check_image(image, tolerance, "pseudo-conformal transform");
  return {std::move(image), -1.0 / t};
}

ComplexField inverse_pseudoconformal_transform(const ComplexField& image, double s, double tolerance) {
  if (!(s < 0.0)) throw InvalidArgument("inverse pseudo-conformal transform needs s < 0");
  const double t = -1.0 / s;
  const Grid& g = image.grid();
  // u(y) = t^(-d/2) v(y / t) exp(i |y|^2 / (4t)).
  if (t > 1.0) {
    const double lost = mass_outside_cube(image, 0.5 * g.box_length() / t);
    if (lost > tolerance)
      throw DomainError("image support does not fit the dilated lattice: " + std::to_string(lost) + " of the mass lost");
  }
  ComplexField u = resample_dilated(image, 1.0 / t);
  const double amp = std::pow(t, -0.5 * g.dim());
  for_each_point(g, [&](std::size_t idx, const Vec3& y) {
    const double phase = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (4.0 * t);
    u[idx] *= amp * Complex(std::cos(phase), std::sin(phase));
  });
  check_image(u, tolerance, "inverse pseudo-conformal transform");
  return u;
}

double transformed_energy(const ComplexField& image, double s) {
  const double grad = hdot_norm(image, 1.0);
  return 0.5 * grad * grad + 0.25 * (-s) * lp_integral(image, 4.0);
}

}  // namespace nlslab
