#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "error.hpp"

namespace nlslab {

namespace {

// FFTW planning is not thread safe; execution of an existing plan on new
// arrays is. Plans are created once per (dim, n, sign) with FFTW_ESTIMATE so
// the chosen algorithm, and therefore every output bit, is reproducible.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const Grid& grid, int sign) {
    const auto key = std::make_tuple(grid.dim(), grid.points_per_axis(), sign);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    ComplexBuffer scratch(grid.size());
    int dims[3] = {grid.points_per_axis(), grid.points_per_axis(), grid.points_per_axis()};
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(grid.dim(), dims, buf, buf, sign, FFTW_ESTIMATE);
    if (plan == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// exp(-i xi_m x_0) = (-1)^(m_1+...+m_d); parity of m equals parity of the
// transform index because n is even.
void apply_centering_sign(const Grid& grid, std::span<Complex> data) {
  for_each_site(grid, [&](std::size_t idx, const Index3& k) {
    if (((k[0] + k[1] + k[2]) & 1) != 0) data[idx] = -data[idx];
  });
}

void check_finite(std::span<const Complex> data) {
  for (const auto& v : data)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalAbort("nonfinite value passed to a spectral transform");
}

}  // namespace

void forward_in_place(const Grid& grid, std::span<Complex> data) {
  auto plan = PlanCache::instance().get(grid, FFTW_FORWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : data) v *= scale;
  apply_centering_sign(grid, data);
}

void backward_in_place(const Grid& grid, std::span<Complex> data) {
  auto plan = PlanCache::instance().get(grid, FFTW_BACKWARD);
  apply_centering_sign(grid, data);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

SpectralField to_spectral(const ComplexField& field) {
  check_finite(field.values());
  ComplexBuffer data(field.values().begin(), field.values().end());
  forward_in_place(field.grid(), data);
  return SpectralField(field.grid(), std::move(data));
}

ComplexField to_physical(const SpectralField& spec) {
  check_finite(spec.coefficients());
  ComplexBuffer data(spec.coefficients().begin(), spec.coefficients().end());
  backward_in_place(spec.grid(), data);
  return ComplexField(spec.grid(), std::move(data));
}

SpectralField apply_multiplier(SpectralField spec, const Multiplier& m) {
  auto c = spec.coefficients();
  for_each_mode(spec.grid(), [&](std::size_t idx, const Vec3& xi) { c[idx] *= m(xi); });
  return spec;
}

SpectralField apply_mask(SpectralField spec, const SpectralField& mask) {
  if (!(spec.grid() == mask.grid())) throw InvalidArgument("mask grid does not match");
  auto c = spec.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mask[i];
  return spec;
}

SpectralField dealias_mask(const Grid& grid, double ratio) {
  const int cutoff = dealias_cutoff(grid.points_per_axis(), ratio);
  SpectralField mask(grid);
  const int d = grid.dim();
  for_each_site(grid, [&](std::size_t idx, const Index3& k) {
    bool keep = true;
    for (int a = 0; a < d; ++a) keep = keep && std::abs(grid.mode(k[a])) <= cutoff;
    mask[idx] = keep ? 1.0 : 0.0;
  });
  return mask;
}

ComplexField spectral_derivative(const ComplexField& field, int axis) {
  if (axis < 0 || axis >= field.grid().dim()) throw InvalidArgument("derivative axis out of range");
  auto spec = apply_multiplier(to_spectral(field), [axis](const Vec3& xi) { return Complex(0.0, xi[axis]); });
  return to_physical(spec);
}

}  // namespace nlslab
