#include "norms.hpp"

#include <cmath>

#include "error.hpp"
#include "spectral.hpp"

namespace nlslab {

double lp_integral(const ComplexField& field, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw InvalidArgument("lp_integral needs finite p >= 1");
  double s = 0.0;
  if (p == 2.0) {
    for (const auto& v : field.values()) s += std::norm(v);
  } else if (p == 4.0) {
    for (const auto& v : field.values()) {
      const double a = std::norm(v);
      s += a * a;
    }
  } else if (p == std::floor(p) && p <= 16.0) {
    // integer powers from |u|^2 avoid a pow per site
    const int k = static_cast<int>(p);
    for (const auto& v : field.values()) {
      const double a = std::norm(v);
      double r = 1.0;
      for (int e = 0; e < k / 2; ++e) r *= a;
      if (k % 2) r *= std::sqrt(a);
      s += r;
    }
  } else {
    for (const auto& v : field.values()) s += std::pow(std::norm(v), 0.5 * p);
  }
  return s * field.grid().cell_volume();
}

double lp_norm(const ComplexField& field, double p) {
  if (std::isinf(p) && p > 0) {
    double m = 0.0;
    for (const auto& v : field.values()) m = std::max(m, std::norm(v));
    return std::sqrt(m);
  }
  if (!(p >= 1.0)) throw InvalidArgument("Lp norm needs p >= 1");
  return std::pow(lp_integral(field, p), 1.0 / p);
}

namespace {

template <class Weight>
double weighted_spectral_norm(const SpectralField& spec, Weight&& weight) {
  double s = 0.0;
  const auto c = spec.coefficients();
  for_each_mode(spec.grid(), [&](std::size_t idx, const Vec3& xi) {
    s += weight(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) * std::norm(c[idx]);
  });
  return std::sqrt(spec.grid().volume() * s);
}

}  // namespace

double hs_norm(const SpectralField& spec, double s) {
  if (s == 1.0) return weighted_spectral_norm(spec, [](double k2) { return 1.0 + k2; });
  return weighted_spectral_norm(spec, [s](double k2) { return std::pow(1.0 + k2, s); });
}

double hs_norm(const ComplexField& field, double s) { return hs_norm(to_spectral(field), s); }

double hdot_norm(const SpectralField& spec, double s) {
  if (s == 0.0) return spec.l2_norm();
  if (s == 0.5) return weighted_spectral_norm(spec, [](double k2) { return std::sqrt(k2); });
  if (s == 1.0) return weighted_spectral_norm(spec, [](double k2) { return k2; });
  return weighted_spectral_norm(spec, [s](double k2) { return k2 > 0.0 ? std::pow(k2, s) : 0.0; });
}

double hdot_norm(const ComplexField& field, double s) { return hdot_norm(to_spectral(field), s); }

double boundary_shell_mass_fraction(const ComplexField& field, double fraction) {
  const Grid& g = field.grid();
  const double edge = (1.0 - fraction) * 0.5 * g.box_length();
  const int d = g.dim();
  // Per-axis membership, precomputed once.
  std::vector<char> outer(g.points_per_axis());
  for (int j = 0; j < g.points_per_axis(); ++j) outer[j] = std::abs(g.coordinate(j)) >= edge - 1e-12 * edge;
  double shell = 0.0, total = 0.0;
  for_each_site(g, [&](std::size_t idx, const Index3& j) {
    const double m = std::norm(field[idx]);
    total += m;
    bool in_shell = false;
    for (int a = 0; a < d; ++a) in_shell = in_shell || outer[j[a]];
    if (in_shell) shell += m;
  });
  return total > 0.0 ? shell / total : 0.0;
}

double weighted_x_norm(const ComplexField& field) {
  double s = 0.0;
  for_each_point(field.grid(), [&](std::size_t idx, const Vec3& x) {
    s += (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * std::norm(field[idx]);
  });
  return std::sqrt(s * field.grid().cell_volume());
}

}  // namespace nlslab
