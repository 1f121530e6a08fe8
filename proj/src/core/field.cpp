#include "field.hpp"

#include <cmath>

#include "error.hpp"

namespace nlslab {

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidArgument("fields live on different grids");
}

}  // namespace

ComplexField::ComplexField(Grid grid) : grid_(grid), values_(grid.size()) {}

ComplexField::ComplexField(Grid grid, ComplexBuffer values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("value count does not match the grid site count");
}

bool ComplexField::all_finite() const noexcept {
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(Complex c) noexcept {
  for (auto& v : values_) v *= c;
  return *this;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(Complex c, ComplexField a) { return a *= c; }

SpectralField::SpectralField(Grid grid) : grid_(grid), coefficients_(grid.size()) {}

SpectralField::SpectralField(Grid grid, ComplexBuffer coefficients)
    : grid_(grid), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != grid_.size())
    throw InvalidArgument("coefficient count does not match the grid site count");
}

double SpectralField::l2_norm() const noexcept {
  double s = 0.0;
  for (const auto& c : coefficients_) s += std::norm(c);
  return std::sqrt(grid_.volume() * s);
}

}  // namespace nlslab
