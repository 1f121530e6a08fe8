#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "field.hpp"
#include "grid.hpp"

namespace nlslab::test {

// Property-test generator: a seeded source of the shapes the invariants
// quantify over. Every case prints its seed on failure through CAPTURE.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }
  std::uint64_t bits() { return rng_(); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))]; }

  Grid grid(int max_dim = 3) {
    const int dim = integer(1, max_dim);
    const std::vector<int> sizes = dim == 1 ? std::vector<int>{16, 32, 64, 128} : std::vector<int>{8, 16};
    return make_grid(dim, pick(sizes), uniform(4.0, 40.0));
  }

  // White noise: every mode populated, the hardest case for roundoff checks.
  ComplexField noise(const Grid& g) {
    ComplexField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = {normal(), normal()};
    return f;
  }

  // Smooth, well-resolved random data: a few off-center Gaussian bumps with
  // random phases and a small plane-wave tilt.
  ComplexField smooth(const Grid& g, double amplitude = 1.0) {
    const int bumps = integer(1, 3);
    ComplexField f(g);
    const double L = g.box_length();
    for (int b = 0; b < bumps; ++b) {
      Vec3 c{0, 0, 0};
      for (int a = 0; a < g.dim(); ++a) c[a] = uniform(-0.1, 0.1) * L;
      const double w = uniform(0.08, 0.12) * L;
      const std::complex<double> amp = std::polar(amplitude * uniform(0.5, 1.0), uniform(0.0, 6.28));
      const int m = integer(-1, 1);
      for_each_point(g, [&](std::size_t idx, const Vec3& x) {
        double r2 = 0.0;
        for (int a = 0; a < 3; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        f[idx] += amp * std::exp(-r2 / (2 * w * w)) * std::polar(1.0, 2 * M_PI * m * x[0] / L);
      });
    }
    return f;
  }

 private:
  std::mt19937_64 rng_;
};

inline ComplexField gaussian(const Grid& g, double amplitude = 1.0, double width = 1.0) {
  ComplexField f(g);
  for_each_point(g, [&](std::size_t idx, const Vec3& x) {
    f[idx] = amplitude * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * width * width));
  });
  return f;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const ComplexField& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

// Composite Simpson on [a, b] with n (even) panels.
template <class T>
T simpson(const std::function<T(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  T s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

}  // namespace nlslab::test
