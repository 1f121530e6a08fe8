#include "model.hpp"

#include <cmath>
#include <deque>
#include <mutex>

#include "error.hpp"
#include "spectral.hpp"

namespace nlslab {

void ModelSpec::validate() const {
  if (symbol == SymbolKind::fractional && !(alpha > 0.5 && alpha < 1.0))
    throw InvalidArgument("fractional order alpha must lie in (1/2, 1)");
  if (power != 3 && power != 5) throw InvalidArgument("nonlinearity power must be 3 or 5");
  if (sign != 0 && sign != 1) throw InvalidArgument("nonlinearity sign must be 0 (linear) or +1 (defocusing)");
}

std::string to_string(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::schrodinger: return "schrodinger";
    case SymbolKind::biharmonic: return "biharmonic";
    case SymbolKind::fractional: return "fractional";
  }
  return "schrodinger";
}

SymbolKind symbol_from_string(const std::string& name) {
  if (name == "schrodinger") return SymbolKind::schrodinger;
  if (name == "biharmonic") return SymbolKind::biharmonic;
  if (name == "fractional") return SymbolKind::fractional;
  throw InvalidArgument("unknown dispersion symbol '" + name + "'");
}

double dispersion_phase(const ModelSpec& model, double xi_squared) {
  switch (model.symbol) {
    case SymbolKind::schrodinger: return xi_squared;
    case SymbolKind::biharmonic: return xi_squared * xi_squared;
    case SymbolKind::fractional: return xi_squared > 0.0 ? std::pow(xi_squared, model.alpha) : 0.0;
  }
  return xi_squared;
}

double dispersion_phase(const ModelSpec& model, const Vec3& xi) {
  return dispersion_phase(model, xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
}

std::vector<double> dispersion_table(const Grid& grid, const ModelSpec& model) {
  std::vector<double> omega(grid.size());
  const double k2 = grid.fundamental() * grid.fundamental();
  const int d = grid.dim();
  for_each_site(grid, [&](std::size_t idx, const Index3& k) {
    long long m2 = 0;
    for (int a = 0; a < d; ++a) {
      const long long m = grid.mode(k[a]);
      m2 += m * m;
    }
    omega[idx] = dispersion_phase(model, k2 * static_cast<double>(m2));
  });
  return omega;
}

std::shared_ptr<const std::vector<double>> shared_dispersion_table(const Grid& grid, const ModelSpec& model) {
  struct Entry {
    Grid grid;
    ModelSpec model;
    std::shared_ptr<const std::vector<double>> table;
  };
  static std::mutex lock;
  static std::deque<Entry> cache;
  {
    std::lock_guard<std::mutex> guard(lock);
    for (const auto& e : cache)
      if (e.grid == grid && e.model.symbol == model.symbol && e.model.alpha == model.alpha) return e.table;
  }
  auto table = std::make_shared<const std::vector<double>>(dispersion_table(grid, model));
  std::lock_guard<std::mutex> guard(lock);
  cache.push_front({grid, model, table});
  if (cache.size() > 6) cache.pop_back();
  return table;
}

void apply_free_phase(std::span<Complex> coefficients, std::span<const double> omega, double t) {
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double phase = -t * omega[i];
    coefficients[i] *= Complex(std::cos(phase), std::sin(phase));
  }
}

SpectralField free_evolve(const SpectralField& u0, double t, const ModelSpec& model) {
  SpectralField out = u0;
  if (t == 0.0) return out;
  const auto omega = shared_dispersion_table(u0.grid(), model);
  apply_free_phase(out.coefficients(), *omega, t);
  return out;
}

ComplexField free_evolve(const ComplexField& u0, double t, const ModelSpec& model) {
  if (t == 0.0) return u0;
  return to_physical(free_evolve(to_spectral(u0), t, model));
}

}  // namespace nlslab
