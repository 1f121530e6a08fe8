#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "diagnostics.hpp"
#include "error.hpp"
#include "model.hpp"
#include "norms.hpp"
#include "snapshot_io.hpp"
#include "solver.hpp"
#include "spectral.hpp"
#include "support.hpp"

using namespace nlslab;
using namespace nlslab::test;

namespace {

ModelSpec cubic(int sign = 1) {
  ModelSpec m;
  m.sign = sign;
  return m;
}

SolverConfig config(double dt, double t_end, int stride = 1) {
  SolverConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.snapshot_stride = stride;
  c.boundary_mass_tol = 1e-3;
  return c;
}

// Scalar ODE i c' = mu |c|^2 c by classical RK4 with many substeps.
Complex rk4_constant(Complex c, double t, double mu) {
  const int n = 20000;
  const double h = t / n;
  auto f = [mu](Complex z) { return Complex(0, -1) * mu * std::norm(z) * z; };
  for (int i = 0; i < n; ++i) {
    const auto k1 = f(c), k2 = f(c + 0.5 * h * k1), k3 = f(c + 0.5 * h * k2), k4 = f(c + h * k3);
    c += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nlslab_test_" + name)).string();
}

}  // namespace

TEST_CASE("solver config validation") {
  CHECK_NOTHROW(config(0.01, 1.0).validate());
  CHECK_THROWS_AS(config(1.5, 3.0).validate(), ConfigError);
  CHECK_THROWS_AS(config(0.01, 1.0, 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(0.03, 1.0).validate(), ConfigError);
  CHECK(config(0.01, 1.0).steps() == 100);
}

TEST_CASE("linear model: one step is the free propagator") {
  Gen gen(31);
  for (int c = 0; c < 10; ++c) {
    const auto g = gen.grid();
    const auto u = gen.smooth(g);
    const double dt = gen.uniform(0.001, 0.5);
    const auto a = strang_step(u, dt, cubic(0), config(dt, dt));
    const auto b = free_evolve(u, dt, cubic(0));
    CHECK(max_abs_diff(a, b) <= 1e-12 * max_abs(u));
  }
}

TEST_CASE("constant field follows the scalar ODE exactly") {
  const auto g = make_grid(3, 8, 4.0);
  const Complex c0(0.7, -0.4);
  ComplexField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = c0;
  const double dt = 0.05;
  for (int k = 0; k < 40; ++k) u = strang_step(u, dt, cubic(), config(dt, dt));
  const Complex exact = rk4_constant(c0, 40 * dt, 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(u[i] - exact) < 1e-12);
}

TEST_CASE("nonlinear substep preserves the modulus pointwise") {
  Gen gen(32);
  const auto g = make_grid(2, 16, 8.0);
  const auto u = gen.noise(g);
  const auto v = nonlinear_substep(u, 0.37, cubic());
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(v[i]) == doctest::Approx(std::abs(u[i])).epsilon(1e-15));
    CHECK(std::abs(v[i] - u[i] * std::polar(1.0, -0.37 * std::norm(u[i]))) < 1e-14);
  }
}

TEST_CASE("property: time reversal undoes a step") {
  Gen gen(33);
  for (int c = 0; c < 10; ++c) {
    const auto g = gen.grid();
    const auto u = gen.smooth(g, gen.uniform(0.1, 2.0));
    const double dt = gen.uniform(0.001, 0.1);
    auto cfg = config(dt, dt);
    cfg.dealias_ratio = 1.0;
    ModelSpec m = cubic();
    m.power = gen.pick(std::vector<int>{3, 5});
    const auto back = strang_step(strang_step(u, dt, m, cfg), -dt, m, cfg);
    CAPTURE(c);
    CHECK(lp_norm(back - u, 2) <= 1e-10 * lp_norm(u, 2));
  }
}

TEST_CASE("Strang splitting is second order") {
  const auto g = make_grid(3, 32, 16.0);
  const auto u0 = gaussian(g, 1.0);
  const double T = 0.5;
  auto terminal = [&](double dt) {
    auto c = config(dt, T, static_cast<int>(std::lround(T / dt)));
    return evolve(u0, cubic(), c).snapshots.back().field;
  };
  const auto a = terminal(0.05), b = terminal(0.025), c = terminal(0.0125), ref = terminal(0.05 / 8);
  // Against the dt/8 reference the expected ratio is 4 (63/64) / (15/16) = 4.2.
  CHECK(lp_norm(a - ref, 2) / lp_norm(b - ref, 2) == doctest::Approx(4.2).epsilon(0.05));
  CHECK(lp_norm(a - b, 2) / lp_norm(b - c, 2) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("conserved quantities") {
  const auto g = make_grid(3, 8, 3.0);
  SUBCASE("constant field") {
    ComplexField u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = Complex(0.6, 0.8) * 2.0;
    const auto c = conserved(u, cubic());
    CHECK(c.mass == doctest::Approx(4.0 * 27.0));
    CHECK(c.energy == doctest::Approx(16.0 * 27.0 / 4.0));
    ModelSpec quintic = cubic();
    quintic.power = 5;
    CHECK(conserved(u, quintic).energy == doctest::Approx(64.0 * 27.0 / 6.0));
  }
  SUBCASE("plane wave kinetic energy") {
    ComplexField u(g);
    const double xi = 2 * g.fundamental();
    for_each_point(g, [&](std::size_t i, const Vec3& x) { u[i] = std::polar(1.0, xi * x[1]); });
    CHECK(conserved(u, cubic(0)).energy == doctest::Approx(xi * xi * 27.0 / 2.0));
  }
  SUBCASE("property: defocusing energy is nonnegative") {
    Gen gen(34);
    for (int c = 0; c < 20; ++c) {
      const auto gg = gen.grid();
      CHECK(conserved(gen.noise(gg), cubic()).energy >= 0.0);
    }
  }
}

TEST_CASE("evolve: linear sup norm series matches the free oracle") {
  const auto g = make_grid(3, 32, 24.0);
  const auto u0 = gaussian(g);
  const auto obs = standard_observers();
  const auto traj = evolve(u0, cubic(0), config(0.05, 1.0, 5), obs);
  const auto& linf = traj.series_named("linf");
  REQUIRE(linf.size() == 21);
  for (std::size_t k = 0; k < linf.size(); k += 4)
    CHECK(std::abs(linf.values[k] - lp_norm(free_evolve(u0, linf.times[k], cubic(0)), kInfinity)) < 1e-10);
  for (std::size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
  CHECK(traj.validity_horizon <= 1.0);
  CHECK(traj.snapshots.size() == 5);
  CHECK(traj.snapshot_at(0.5).time == doctest::Approx(0.5));
  CHECK_THROWS(traj.snapshot_at(0.55));
}

TEST_CASE("evolve: mass drift over 10^4 steps is roundoff") {
  const auto g = make_grid(3, 32, 16.0);
  // Start from the dealiased data so the drift measures the steps, not the
  // first projection.
  const auto u0 = to_physical(apply_mask(to_spectral(gaussian(g, 0.1)), dealias_mask(g, 2.0 / 3.0)));
  auto cfg = config(1e-3, 10.0, 10000);
  const auto traj = evolve(u0, cubic(), cfg);
  const double m0 = conserved(u0, cubic()).mass;
  const double m1 = conserved(traj.snapshots.back().field, cubic()).mass;
  CHECK(std::abs(m1 - m0) / m0 <= 1e-10);
}

TEST_CASE("evolve: H1 norm stays below the conserved-quantity bound") {
  const auto g = make_grid(3, 32, 16.0);
  const auto u0 = gaussian(g, 0.8);
  const auto traj = evolve(u0, cubic(), config(0.01, 2.0, 50), standard_observers());
  const auto c = conserved(u0, cubic());
  const double bound = std::sqrt(c.mass + 2 * c.energy);
  for (double v : traj.series_named("h1").values) CHECK(v <= bound * (1 + 1e-9));
}

TEST_CASE("evolve: horizon and instability handling") {
  SUBCASE("mass reaching the boundary sets the horizon and warns") {
    const auto g = make_grid(1, 128, 16.0);
    const auto u0 = gaussian(g);
    const auto traj = evolve(u0, cubic(0), config(0.1, 10.0));
    CHECK(traj.validity_horizon < 10.0);
    CHECK(traj.validity_horizon > 0.0);
    CHECK_FALSE(traj.warnings.empty());
  }
  SUBCASE("nonfinite data aborts") {
    const auto g = make_grid(1, 16, 4.0);
    ComplexField u(g);
    u[3] = {INFINITY, 0.0};
    CHECK_THROWS_AS(strang_step(u, 0.1, cubic(), config(0.1, 0.1)), NumericalAbort);
  }
}

TEST_CASE("snapshot container round trip") {
  const auto g = make_grid(2, 8, 5.0);
  Gen gen(35);
  const auto u0 = gen.smooth(g);
  ModelSpec m = cubic();
  m.symbol = SymbolKind::fractional;
  m.alpha = 0.625;
  const auto traj = evolve(u0, m, config(0.1, 0.5, 2));
  const auto path = temp_path("snap.bin");
  write_snapshots(path, traj, 77);
  const auto file = read_snapshots(path);
  CHECK(file.header.dim == 2);
  CHECK(file.header.n == 8);
  CHECK(file.header.box_length == 5.0);
  CHECK(file.header.model == m);
  CHECK(file.header.dt == 0.1);
  CHECK(file.header.snapshot_stride == 2);
  CHECK(file.header.seed == 77);
  REQUIRE(file.snapshots.size() == traj.snapshots.size());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    CHECK(file.snapshots[k].time == traj.snapshots[k].time);
    CHECK(max_abs_diff(file.snapshots[k].field, traj.snapshots[k].field) == 0.0);
  }
  CHECK(std::filesystem::file_size(path) == 8 + 4 + 4 + 8 + 4 + 8 + 4 + 4 + 8 + 4 + 8 + 8 + 3 * (8 + 64 * 16));

  SUBCASE("truncated file") {
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
    CHECK_THROWS_AS(read_snapshots(path), IoError);
  }
  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
    f.close();
    CHECK_THROWS_AS(read_snapshots(path), IoError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_snapshots(temp_path("absent.bin")), IoError); }
  std::filesystem::remove(path);
}
