#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "model.hpp"
#include "observables.hpp"

namespace nlslab {

namespace {

// All cheap norms of one state, computed in one physical and one spectral
// pass and reused by every observer evaluated at the same step.
struct StepNorms {
  std::size_t step = static_cast<std::size_t>(-1);
  const void* field = nullptr;
  double time = -1.0;
  Complex probe_u, probe_c;
  double linf = 0.0;
  double lp[7] = {};  // lp[k] = int |u|^k for k = 2..6
  double h_half_dot = 0.0;
  double h1 = 0.0;
  double mass = 0.0;
  double energy = 0.0;

  void refresh(const StepState& s) {
    const Complex pu = s.physical[s.physical.size() / 2], pc = s.spectral[0];
    if (s.step == step && &s.physical == field && s.time == time && pu == probe_u && pc == probe_c) return;
    step = s.step;
    field = &s.physical;
    time = s.time;
    probe_u = pu;
    probe_c = pc;
    double m = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0, p5 = 0.0, p6 = 0.0;
    for (const auto& v : s.physical.values()) {
      const double a = std::norm(v);
      const double r = std::sqrt(a);
      m = std::max(m, a);
      p2 += a;
      p3 += a * r;
      p4 += a * a;
      p5 += a * a * r;
      p6 += a * a * a;
    }
    const double dv = s.physical.grid().cell_volume();
    linf = std::sqrt(m);
    lp[2] = p2 * dv;
    lp[3] = p3 * dv;
    lp[4] = p4 * dv;
    lp[5] = p5 * dv;
    lp[6] = p6 * dv;

    const auto table = shared_dispersion_table(s.spectral.grid(), s.model);
    const auto& omega = *table;
    const auto c = s.spectral.coefficients();
    double half = 0.0, grad = 0.0, l2 = 0.0, kin = 0.0;
    for_each_mode(s.spectral.grid(), [&](std::size_t idx, const Vec3& xi) {
      const double k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
      const double a = std::norm(c[idx]);
      half += std::sqrt(k2) * a;
      grad += k2 * a;
      l2 += a;
      kin += omega[idx] * a;
    });
    const double vol = s.spectral.grid().volume();
    h_half_dot = std::sqrt(vol * half);
    h1 = std::sqrt(vol * (l2 + grad));
    mass = vol * l2;
    energy = 0.5 * vol * kin;
    if (s.model.sign != 0) {
      const int q = s.model.power + 1;
      const double pot = q == 4 ? lp[4] : q == 6 ? lp[6] : 0.0;
      energy += s.model.sign / static_cast<double>(q) * pot;
    }
  }
};

}  // namespace

std::vector<Observable> standard_observers(const ObserverOptions& options) {
  auto cache = std::make_shared<StepNorms>();
  std::vector<Observable> out;
  const std::size_t st = options.stride;
  auto add = [&](std::string name, double (*pick)(const StepNorms&)) {
    out.push_back({std::move(name),
                   [cache, pick](const StepState& s) {
                     cache->refresh(s);
                     return pick(*cache);
                   },
                   st});
  };
  add("linf", [](const StepNorms& n) { return n.linf; });
  add("l2", [](const StepNorms& n) { return std::sqrt(n.lp[2]); });
  add("l3", [](const StepNorms& n) { return std::cbrt(n.lp[3]); });
  add("l4", [](const StepNorms& n) { return std::pow(n.lp[4], 0.25); });
  add("l5", [](const StepNorms& n) { return std::pow(n.lp[5], 0.2); });
  add("l6", [](const StepNorms& n) { return std::pow(n.lp[6], 1.0 / 6.0); });
  add("h_half_dot", [](const StepNorms& n) { return n.h_half_dot; });
  add("h1", [](const StepNorms& n) { return n.h1; });
  add("mass", [](const StepNorms& n) { return n.mass; });
  add("energy", [](const StepNorms& n) { return n.energy; });
  if (options.pseudoconformal)
    out.push_back({"V_pc", [](const StepState& s) { return pseudoconformal_V(s.physical, s.time, s.model.power); },
                   options.pc_stride});
  return out;
}

}  // namespace nlslab
