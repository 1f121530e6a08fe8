#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "error.hpp"
#include "norms.hpp"
#include "spectral.hpp"
#include "support.hpp"

using namespace nlslab;
using namespace nlslab::test;

TEST_CASE("grid construction and coordinates") {
  const auto g = make_grid(3, 8, 4.0);
  CHECK(g.size() == 512);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.coordinate(0) == doctest::Approx(-2.0));
  CHECK(g.coordinate(7) == doctest::Approx(1.5));
  CHECK(g.mode(3) == 3);
  CHECK(g.mode(4) == -4);
  CHECK(g.wavenumber(1) == doctest::Approx(2 * M_PI / 4.0));
  CHECK(g.unflatten(g.flatten({1, 2, 3})) == Index3{1, 2, 3});

  CHECK_THROWS_AS(make_grid(4, 8, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(3, 6, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(3, 8, -1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, 8, NAN), InvalidArgument);
}

TEST_CASE("field value count and finiteness") {
  const auto g = make_grid(2, 16, 3.0);
  ComplexField f(g);
  CHECK(f.size() == 256);
  CHECK(f.all_finite());
  f[5] = {NAN, 0.0};
  CHECK_FALSE(f.all_finite());
  CHECK_THROWS_AS(to_spectral(f), NumericalAbort);
}

TEST_CASE("property: forward then inverse transform reproduces the field") {
  Gen gen(11);
  for (int c = 0; c < 25; ++c) {
    const auto g = gen.grid();
    const auto f = gen.noise(g);
    const auto back = to_physical(to_spectral(f));
    CAPTURE(c);
    CHECK(max_abs_diff(back, f) <= 1e-12 * max_abs(f));
  }
}

TEST_CASE("property: Parseval with the mean-normalized transform") {
  Gen gen(12);
  for (int c = 0; c < 25; ++c) {
    const auto g = gen.grid();
    const auto f = gen.noise(g);
    const double phys = lp_norm(f, 2.0);
    const double spec = to_spectral(f).l2_norm();
    CAPTURE(c);
    CHECK(std::abs(phys - spec) <= 1e-12 * phys);
  }
}

TEST_CASE("transform normalization on constants and plane waves") {
  const auto g = make_grid(3, 8, 5.0);
  ComplexField c(g);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = {2.0, -1.0};
  const auto sc = to_spectral(c);
  CHECK(std::abs(sc[0] - Complex(2.0, -1.0)) < 1e-14);
  for (std::size_t i = 1; i < sc.size(); ++i) CHECK(std::abs(sc[i]) < 1e-14);

  ComplexField w(g);
  for_each_point(g, [&](std::size_t idx, const Vec3& x) { w[idx] = std::polar(1.0, g.fundamental() * x[0]); });
  const auto sw = to_spectral(w);
  CHECK(std::abs(sw[g.flatten({1, 0, 0})] - 1.0) < 1e-13);
}

TEST_CASE("multipliers") {
  Gen gen(13);
  const auto g = make_grid(3, 16, 2 * M_PI);
  const auto f = gen.smooth(g);
  const auto s = to_spectral(f);

  SUBCASE("identity") {
    const auto out = apply_multiplier(s, [](const Vec3&) { return Complex(1.0); });
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(out[i] == s[i]);
  }
  SUBCASE("derivative of a plane wave") {
    ComplexField w(g);
    for_each_point(g, [&](std::size_t idx, const Vec3& x) { w[idx] = std::polar(1.0, 3.0 * x[0]); });
    const auto dw = to_physical(apply_multiplier(to_spectral(w), [](const Vec3& xi) { return Complex(0.0, xi[0]); }));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(dw[i] - Complex(0.0, 3.0) * w[i]) < 1e-12);
    const auto dx = spectral_derivative(w, 0);
    CHECK(max_abs_diff(dx, dw) < 1e-12);
  }
  SUBCASE("|xi| annihilates constants") {
    ComplexField c(g);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 3.0;
    const auto out = apply_multiplier(to_spectral(c), [](const Vec3& xi) {
      return Complex(std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]));
    });
    CHECK(max_abs(to_physical(out)) < 1e-14);
  }
  SUBCASE("property: composition is the product multiplier") {
    for (int c = 0; c < 10; ++c) {
      const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
      auto m1 = [a](const Vec3& xi) { return std::polar(1.0 + xi[0] * xi[0], a * xi[1]); };
      auto m2 = [b](const Vec3& xi) { return Complex(b, xi[2]); };
      const auto two = apply_multiplier(apply_multiplier(s, m2), m1);
      const auto one = apply_multiplier(s, [&](const Vec3& xi) { return m1(xi) * m2(xi); });
      double worst = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(two[i] - one[i]));
      CHECK(worst <= 1e-15 * 64);
    }
  }
  SUBCASE("Laplacian on on-grid plane waves") {
    for (int c = 0; c < 10; ++c) {
      const Index3 m{gen.integer(-7, 7), gen.integer(-7, 7), gen.integer(-7, 7)};
      ComplexField w(g);
      Vec3 xi{};
      for (int a = 0; a < 3; ++a) xi[a] = m[a] * g.fundamental();
      const double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
      for_each_point(g, [&](std::size_t idx, const Vec3& x) {
        w[idx] = std::polar(1.0, xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]);
      });
      const auto lap = to_physical(apply_multiplier(to_spectral(w), [](const Vec3& q) {
        return Complex(-(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]));
      }));
      double worst = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, std::abs(lap[i] + k2 * w[i]));
      CHECK(worst <= 1e-10 * std::max(k2, 1.0));
    }
  }
}

TEST_CASE("dealias mask") {
  SUBCASE("ratio 1 keeps everything") {
    const auto mask = dealias_mask(make_grid(2, 16, 1.0), 1.0);
    for (std::size_t i = 0; i < mask.size(); ++i) CHECK(mask[i] == Complex(1.0));
  }
  SUBCASE("n = 8 in 1D at 2/3 keeps |m| <= 2") {
    const auto g = make_grid(1, 8, 1.0);
    const auto mask = dealias_mask(g, 2.0 / 3.0);
    for (int k = 0; k < 8; ++k) CHECK(mask[k].real() == (std::abs(g.mode(k)) <= 2 ? 1.0 : 0.0));
    CHECK(dealias_cutoff(6, 2.0 / 3.0) == 2);
  }
  SUBCASE("kept count is monotone in the ratio") {
    const auto g = make_grid(3, 16, 1.0);
    double prev = 0.0;
    for (double r = 0.05; r <= 1.0001; r += 0.05) {
      const auto mask = dealias_mask(g, std::min(r, 1.0));
      double kept = 0.0;
      for (std::size_t i = 0; i < mask.size(); ++i) kept += mask[i].real();
      CHECK(kept >= prev);
      prev = kept;
    }
  }
  CHECK_THROWS(dealias_mask(make_grid(1, 8, 1.0), 0.0));
}
