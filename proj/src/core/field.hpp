#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "grid.hpp"

namespace nlslab {

using Complex = std::complex<double>;

// 64-byte aligned storage so every buffer has the alignment the FFT plans
// were created with.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexBuffer = std::vector<Complex, AlignedAllocator<Complex>>;

// Complex amplitudes u(x_j) on the lattice sites of a grid.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(Grid grid);
  ComplexField(Grid grid, ComplexBuffer values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  const Complex& operator[](std::size_t i) const noexcept { return values_[i]; }
  Complex& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept;

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);
  ComplexField& operator*=(Complex c) noexcept;

 private:
  Grid grid_;
  ComplexBuffer values_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(Complex c, ComplexField a);

// Fourier coefficients c_m with u(x) = sum_m c_m exp(i xi_m . x), stored in
// transform order.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(Grid grid);
  SpectralField(Grid grid, ComplexBuffer coefficients);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coefficients_.size(); }

  std::span<const Complex> coefficients() const noexcept { return coefficients_; }
  std::span<Complex> coefficients() noexcept { return coefficients_; }
  const Complex& operator[](std::size_t i) const noexcept { return coefficients_[i]; }
  Complex& operator[](std::size_t i) noexcept { return coefficients_[i]; }

  // sqrt(V * sum |c_m|^2), equal to the physical L2 norm by Parseval.
  double l2_norm() const noexcept;

 private:
  Grid grid_;
  ComplexBuffer coefficients_;
};

}  // namespace nlslab
