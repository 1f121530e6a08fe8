#include "initial_data.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "snapshot_io.hpp"

namespace nlslab {

ComplexField make_initial_data(const ExperimentConfig& config) {
  return make_initial_data(config, config.real("data.amplitude"));
}

ComplexField make_initial_data(const ExperimentConfig& config, double amplitude) {
  const Grid g = config.grid();
  const std::string kind = config.text("data.kind");
  if (kind == "file") {
    auto file = read_snapshots(config.text("data.path"));
    if (file.snapshots.empty()) throw IoError("snapshot container holds no snapshots");
    if (!(file.snapshots.front().field.grid() == g)) throw IoError("snapshot grid does not match grid.* settings");
    return std::move(file.snapshots.front().field);
  }
  const auto center = config.reals("data.center");
  const auto mode = config.reals("data.mode");
  const double w = config.real("data.width");
  const bool modulated = kind == "plane-modulated";
  const double k0 = 2.0 * std::numbers::pi / g.box_length();
  ComplexField u(g);
  for_each_point(g, [&](std::size_t i, const Vec3& x) {
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double dx = x[a] - center[a];
      r2 += dx * dx;
      phase += k0 * mode[a] * x[a];
    }
    const double env = amplitude * std::exp(-0.5 * r2 / (w * w));
    u[i] = modulated ? env * Complex(std::cos(phase), std::sin(phase)) : Complex(env, 0.0);
  });
  return u;
}

}  // namespace nlslab
