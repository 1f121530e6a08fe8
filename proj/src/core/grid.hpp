#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace nlslab {

using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

// Periodic cubic lattice on [-L/2, L/2)^d with centered coordinates.
// Storage is row-major with the last axis fastest; unused axes have extent 1.
class Grid {
 public:
  Grid() = default;

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double box_length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_; }
  std::size_t size() const noexcept { return size_; }
  double volume() const noexcept;
  double cell_volume() const noexcept;

  // Extent of axis a (n for active axes, 1 otherwise).
  int extent(int axis) const noexcept { return axis < dim_ ? n_ : 1; }

  double coordinate(int j) const noexcept { return -0.5 * length_ + j * spacing(); }
  // Integer mode for transform-order index k: 0..n/2-1, then -n/2..-1.
  int mode(int k) const noexcept { return k < n_ / 2 ? k : k - n_; }
  double wavenumber(int k) const noexcept;
  double fundamental() const noexcept;  // 2 pi / L

  Index3 unflatten(std::size_t idx) const noexcept;
  std::size_t flatten(const Index3& j) const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  friend Grid make_grid(int, int, double);
  Grid(int dim, int n, double length);

  int dim_ = 1;
  int n_ = 4;
  double length_ = 1.0;
  std::size_t size_ = 4;
};

// Throws InvalidArgument on dim outside {1,2,3}, n < 4 or not a power of two,
// or a nonpositive/nonfinite box length.
Grid make_grid(int dim, int points_per_axis, double box_length);

// Largest |m| kept by a dealias mask of the given ratio on n points per axis.
int dealias_cutoff(int points_per_axis, double ratio);

// Visit every lattice site in storage order with its multi-index.
template <class Fn>
void for_each_site(const Grid& g, Fn&& fn) {
  const int n0 = g.extent(0), n1 = g.extent(1), n2 = g.extent(2);
  std::size_t idx = 0;
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b)
      for (int c = 0; c < n2; ++c) fn(idx++, Index3{a, b, c});
}

// Visit every site with its physical position (inactive axes are 0).
template <class Fn>
void for_each_point(const Grid& g, Fn&& fn) {
  const int d = g.dim();
  for_each_site(g, [&](std::size_t idx, const Index3& j) {
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) x[a] = g.coordinate(j[a]);
    fn(idx, x);
  });
}

// Visit every mode with its wavevector (inactive axes are 0).
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int d = g.dim();
  for_each_site(g, [&](std::size_t idx, const Index3& k) {
    Vec3 xi{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) xi[a] = g.wavenumber(k[a]);
    fn(idx, xi);
  });
}

}  // namespace nlslab
