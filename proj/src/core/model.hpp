#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "field.hpp"

namespace nlslab {

enum class SymbolKind { schrodinger, biharmonic, fractional };

// Dispersion symbol omega(xi), nonlinearity |u|^(p-1) u, and its sign
// (+1 defocusing, 0 linear).
struct ModelSpec {
  SymbolKind symbol = SymbolKind::schrodinger;
  double alpha = 0.75;  // fractional order, used only for SymbolKind::fractional
  int power = 3;
  int sign = 1;

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::string to_string(SymbolKind kind);
SymbolKind symbol_from_string(const std::string& name);

// omega as a function of |xi|^2; omega(0) = 0 for every symbol.
double dispersion_phase(const ModelSpec& model, double xi_squared);
double dispersion_phase(const ModelSpec& model, const Vec3& xi);

// omega(xi_m) per mode in transform order, computed from the integer mode
// indices so long-time phases do not drift.
std::vector<double> dispersion_table(const Grid& grid, const ModelSpec& model);

// Memoized table shared between callers (a handful of recent grids/models).
std::shared_ptr<const std::vector<double>> shared_dispersion_table(const Grid& grid, const ModelSpec& model);

// Multiply coefficients by exp(-i t omega).
void apply_free_phase(std::span<Complex> coefficients, std::span<const double> omega, double t);

SpectralField free_evolve(const SpectralField& u0, double t, const ModelSpec& model);
ComplexField free_evolve(const ComplexField& u0, double t, const ModelSpec& model);

}  // namespace nlslab
