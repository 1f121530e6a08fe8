#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "diagnostics.hpp"
#include "error.hpp"
#include "model.hpp"
#include "norms.hpp"
#include "observables.hpp"
#include "series.hpp"
#include "solver.hpp"
#include "support.hpp"

using namespace nlslab;
using namespace nlslab::test;

namespace {

ModelSpec model(int sign) {
  ModelSpec m;
  m.sign = sign;
  return m;
}

// int x^k e^{-x^2} dx over R by Simpson on [-12, 12].
double moment_1d(int k) {
  std::function<double(double)> f = [k](double x) { return std::pow(x, k) * std::exp(-x * x); };
  return simpson(f, -12.0, 12.0, 4000);
}

ObservableSeries power_series(double c, double rate, double t0, double t1, int n,
                              const std::function<double(double)>& wobble = nullptr) {
  ObservableSeries s{"s", {}, {}};
  for (int i = 0; i < n; ++i) {
    const double t = t0 * std::pow(t1 / t0, double(i) / (n - 1));
    s.push(t, c * std::pow(t, -rate) * (wobble ? wobble(t) : 1.0));
  }
  return s;
}

}  // namespace

TEST_CASE("norms of a Gaussian") {
  const auto g = make_grid(3, 64, 16.0);
  const auto u = gaussian(g, 2.0);
  const double m0 = moment_1d(0);
  CHECK(lp_norm(u, 2) == doctest::Approx(2.0 * std::pow(m0, 1.5)).epsilon(1e-12));
  CHECK(lp_norm(u, 1) == doctest::Approx(2.0 * std::pow(2 * M_PI, 1.5)).epsilon(1e-12));
  CHECK(lp_norm(u, kInfinity) == 2.0);
  CHECK(lp_norm(u, 4) == doctest::Approx(2.0 * std::pow(M_PI / 2, 0.375)).epsilon(1e-12));
  // ||grad u||^2 = 4 int |x|^2 e^{-|x|^2} = 4 * 3 m2 m0^2
  const double h1 = std::sqrt(lp_integral(u, 2) + 4.0 * 3 * moment_1d(2) * m0 * m0);
  CHECK(hs_norm(u, 1.0) == doctest::Approx(h1).epsilon(1e-10));
  CHECK(hs_norm(u, 0.0) == doctest::Approx(lp_norm(u, 2)).epsilon(1e-12));
  CHECK(hdot_norm(u, 0.0) == doctest::Approx(lp_norm(u, 2)).epsilon(1e-12));
}

TEST_CASE("J(t) at t = 0 is multiplication by x") {
  const auto g = make_grid(3, 64, 16.0);
  const auto u = gaussian(g);
  const double expected = std::sqrt(3 * moment_1d(2) * moment_1d(0) * moment_1d(0));
  CHECK(expected == doctest::Approx(std::sqrt(1.5 * std::pow(M_PI, 1.5))).epsilon(1e-12));
  CHECK(j_norm(u, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(weighted_x_norm(u) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(pseudoconformal_V(u, 0.0, 3) == doctest::Approx(expected * expected).epsilon(1e-12));
}

TEST_CASE("J(t) commutes with the free flow") {
  const auto g = make_grid(3, 128, 48.0);
  const auto u0 = gaussian(g);
  const double x0 = weighted_x_norm(u0);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto u = free_evolve(u0, t, model(0));
    REQUIRE(boundary_shell_mass_fraction(u, 0.1) < 1e-6);
    CHECK(std::abs(j_norm(u, t) - x0) <= 1e-8);
  }
}

TEST_CASE("weighted L6 check") {
  SUBCASE("homogeneity") {
    Gen gen(41);
    const auto g = make_grid(3, 16, 12.0);
    const auto u = gen.smooth(g);
    const auto a = weighted_l6_check(u, 1.3);
    const auto b = weighted_l6_check(2.0 * u, 1.3);
    CHECK(b.lhs == doctest::Approx(2 * a.lhs).epsilon(1e-14));
    CHECK(b.rhs == doctest::Approx(2 * a.rhs).epsilon(1e-14));
    CHECK_THROWS_AS(weighted_l6_check(u, 0.0), InvalidArgument);
  }
  SUBCASE("free Gaussian against the closed form") {
    // |u(t,x)|^2 = a^{-3/2} e^{-|x|^2/a} with a = 1 + 4t^2, and ||J u|| = ||x u0||.
    auto lhs = [](double t) {
      const double a = 1 + 4 * t * t;
      return std::pow(std::pow(a, -4.5) * std::pow(M_PI * a / 3, 1.5), 1.0 / 6);
    };
    const double jx = std::sqrt(1.5 * std::pow(M_PI, 1.5));
    double lo = INFINITY, hi = 0.0;
    for (double t = 1.0; t <= 10.0; t += 0.25) {
      const double r = lhs(t) / (jx / t);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi / lo < 1.2);
    const auto g = make_grid(3, 128, 48.0);
    const auto u0 = gaussian(g);
    for (double t : {1.0, 2.0}) {
      const auto w = weighted_l6_check(free_evolve(u0, t, model(0)), t);
      CHECK(w.lhs == doctest::Approx(lhs(t)).epsilon(1e-10));
      CHECK(w.rhs == doctest::Approx(jx / t).epsilon(1e-8));
    }
  }
}

TEST_CASE("decay envelope") {
  Gen gen(42);
  for (int c = 0; c < 20; ++c) {
    ObservableSeries fine{"linf", {}, {}};
    double t = 0.0;
    for (int i = 0; i < 60; ++i) {
      fine.push(t, gen.uniform(0.0, 2.0));
      t += gen.uniform(0.01, 0.3);
    }
    const auto env = decay_envelope(fine);
    for (std::size_t i = 1; i < env.values.size(); ++i) CHECK(env.values[i] >= env.values[i - 1]);
    ObservableSeries coarse{"linf", {}, {}};
    for (std::size_t i = 0; i < fine.size(); i += 3) coarse.push(fine.times[i], fine.values[i]);
    const auto cenv = decay_envelope(coarse);
    for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(env.values[3 * i] >= cenv.values[i]);
    CHECK(env.values.back() >= cenv.values.back());
  }
}

TEST_CASE("fit_decay") {
  SUBCASE("exact power laws") {
    const auto a = fit_decay(power_series(3.0, 1.5, 1.0, 10.0, 20), {1.0, 10.0});
    CHECK(a.exponent == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.log_constant == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(a.samples == 20);
    CHECK(fit_decay(power_series(1.0, 2.0, 1.0, 10.0, 20), {1.0, 10.0}).exponent == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("noisy series") {
    const auto s = power_series(1.0, 1.5, 1.0, 50.0, 200, [](double t) { return 1 + 0.01 * std::sin(t); });
    CHECK(std::abs(fit_decay(s, {1.0, 50.0}).exponent - 1.5) <= 0.02);
  }
  SUBCASE("property: scaling the series never moves the exponent") {
    Gen gen(43);
    for (int c = 0; c < 30; ++c) {
      ObservableSeries s{"s", {}, {}};
      double t = gen.uniform(0.5, 2.0);
      for (int i = 0; i < 30; ++i, t *= gen.uniform(1.01, 1.2)) s.push(t, std::pow(t, -gen.uniform(0.5, 3)) * gen.uniform(0.5, 2));
      const FitWindow w{0.0, INFINITY};
      const double base = fit_decay(s, w).exponent;
      for (double k : {1e-3, 1e3}) {
        auto scaled = s;
        for (auto& v : scaled.values) v *= k;
        const auto f = fit_decay(scaled, w);
        CHECK(f.exponent == base);
        CHECK(f.r_squared >= 0.0);
        CHECK(f.r_squared <= 1.0);
      }
    }
  }
  SUBCASE("rejections") {
    auto s = power_series(1.0, 1.0, 1.0, 10.0, 20);
    CHECK_THROWS_AS(fit_decay(s, {1.0, 10.0}, 5.0), DomainError);
    CHECK_THROWS_AS(fit_decay(s, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(fit_decay(s, {3.0, 2.0}), InvalidArgument);
    s.values[4] = 0.0;
    CHECK_THROWS_AS(fit_decay(s, {1.0, 10.0}), InvalidArgument);
  }
}

TEST_CASE("pseudo-conformal transform") {
  // At t = 0.5 the image sees only |y| < L / 4 of u; h = 1/4 keeps the
  // truncated cubic term (and its ringing) below 1e-10.
  const auto g = make_grid(3, 128, 32.0);
  auto cfg = SolverConfig{};
  cfg.dt = 0.01;
  cfg.t_end = 0.5;
  cfg.snapshot_stride = 50;
  cfg.boundary_mass_tol = 1e-3;
  const auto traj = evolve(gaussian(g, 0.8), model(1), cfg);
  const auto& u = traj.snapshots.back().field;
  const double t = 0.5;
  const auto image = pseudoconformal_transform(u, t);
  CHECK(image.s == doctest::Approx(-2.0));
  CHECK(std::abs(lp_norm(image.field, 2) - lp_norm(u, 2)) <= 1e-8 * lp_norm(u, 2));
  CHECK(transformed_energy(image.field, image.s) == doctest::Approx(pseudoconformal_V(u, t, 3) / 8).epsilon(1e-6));
  const auto back = inverse_pseudoconformal_transform(image.field, image.s);
  CHECK(lp_norm(back - u, 2) <= 1e-6 * lp_norm(u, 2));
  CHECK_THROWS_AS(pseudoconformal_transform(u, 0.0), InvalidArgument);
  CHECK_THROWS_AS(pseudoconformal_transform(gaussian(g, 1.0, 4.0), 0.2), DomainError);
  CHECK_THROWS_AS(pseudoconformal_transform(gaussian(g, 1.0, 0.5), 4.0), DomainError);
  CHECK_THROWS_AS(inverse_pseudoconformal_transform(gaussian(g, 1.0, 4.0), -0.2), DomainError);
}

TEST_CASE("pseudo-conformal energy along a defocusing trajectory") {
  const auto g = make_grid(3, 32, 16.0);
  ObserverOptions o;
  o.pseudoconformal = true;
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.6;
  cfg.boundary_mass_tol = 1e-3;
  const auto traj = evolve(gaussian(g, 1.0), model(1), cfg, standard_observers(o));
  const auto& V = traj.series_named("V_pc");
  CHECK(V.values.front() == doctest::Approx(std::pow(weighted_x_norm(traj.initial), 2)).epsilon(1e-12));
  for (std::size_t k = 1; k < V.size(); ++k) CHECK(V.values[k] <= V.values[k - 1] + 1e-6 * V.values.front());
  const auto& u = traj.snapshots.back().field;
  CHECK(pseudoconformal_rate(u, 0.6, 3) == doctest::Approx(-2 * 0.6 * lp_integral(u, 4)).epsilon(1e-14));
}

TEST_CASE("interaction Morawetz accumulation") {
  SUBCASE("zero field") {
    const auto g = make_grid(3, 8, 4.0);
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 0.5;
    const auto traj = evolve(ComplexField(g), model(1), cfg, standard_observers());
    const auto m = morawetz_accumulate(traj);
    CHECK(m.spacetime_l4_4th == 0.0);
    CHECK(m.bound == 0.0);
  }
  SUBCASE("linear Gaussian against the closed form") {
    // ||u(t)||_4^4 = (pi/2)^{3/2} (1 + 4t^2)^{-3/2}, whose integral over [0, T]
    // is (pi/2)^{3/2} T / sqrt(1 + 4T^2).
    const auto g = make_grid(3, 64, 32.0);
    SolverConfig cfg;
    cfg.dt = 0.02;
    cfg.t_end = 2.0;
    cfg.boundary_mass_tol = 1e-3;
    const auto traj = evolve(gaussian(g), model(0), cfg, standard_observers());
    const double T = 2.0;
    const double exact = std::pow(M_PI / 2, 1.5) * T / std::sqrt(1 + 4 * T * T);
    const auto m = morawetz_accumulate(traj);
    CHECK(m.spacetime_l4_4th == doctest::Approx(exact).epsilon(1e-3));
    CHECK(m.spacetime_l4_4th < std::pow(M_PI / 2, 1.5) / 2);
    const auto& l4 = traj.series_named("l4");
    CHECK(spacetime_norm(l4, 4.0) == doctest::Approx(std::pow(m.spacetime_l4_4th, 0.25)).epsilon(1e-12));
  }
}

TEST_CASE("data profile and admissible pairs") {
  const auto g = make_grid(3, 64, 16.0);
  const auto p = data_profile(gaussian(g, 0.5));
  CHECK(p.m1 > 0.0);
  CHECK(p.l1 == doctest::Approx(0.5 * std::pow(2 * M_PI, 1.5)).epsilon(1e-12));
  CHECK(p.m1 == doctest::Approx(p.l1 + (p.h1 + 1) * (p.h1 + 1)));
  CHECK(is_admissible_pair(INFINITY, 2.0));
  CHECK(is_admissible_pair(2.0, 6.0));
  CHECK(is_admissible_pair(4.0, 3.0));
  CHECK(is_admissible_pair(10.0 / 3.0, 10.0 / 3.0));
  CHECK_FALSE(is_admissible_pair(3.0, 3.0));
  CHECK_FALSE(is_admissible_pair(1.0, 18.0));
}
