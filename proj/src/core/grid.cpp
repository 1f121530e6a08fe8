#include "grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace nlslab {

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

Grid::Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
}

double Grid::volume() const noexcept { return std::pow(length_, dim_); }

double Grid::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

double Grid::fundamental() const noexcept { return 2.0 * std::numbers::pi / length_; }

double Grid::wavenumber(int k) const noexcept { return fundamental() * mode(k); }

Index3 Grid::unflatten(std::size_t idx) const noexcept {
  Index3 j{0, 0, 0};
  for (int a = 2; a >= 0; --a) {
    const auto e = static_cast<std::size_t>(extent(a));
    j[a] = static_cast<int>(idx % e);
    idx /= e;
  }
  return j;
}

std::size_t Grid::flatten(const Index3& j) const noexcept {
  return (static_cast<std::size_t>(j[0]) * extent(1) + j[1]) * extent(2) + j[2];
}

Grid make_grid(int dim, int points_per_axis, double box_length) {
  if (dim < 1 || dim > 3)
    throw InvalidArgument("grid dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
  if (points_per_axis < 4 || (points_per_axis & (points_per_axis - 1)) != 0)
    throw InvalidArgument("points per axis must be a power of two >= 4 (got " +
                          std::to_string(points_per_axis) + ")");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InvalidArgument("box length must be positive and finite");
  return Grid(dim, points_per_axis, box_length);
}

int dealias_cutoff(int points_per_axis, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("dealias ratio must lie in (0, 1]");
  // The epsilon keeps 2/3 * 3 from rounding down to 1.
  return static_cast<int>(std::floor(ratio * (points_per_axis / 2) + 1e-9));
}

}  // namespace nlslab
