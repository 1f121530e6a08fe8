#pragma once

#include <functional>
#include <span>

#include "field.hpp"

namespace nlslab {

// Transform normalization: the forward transform carries 1/N^d and the
// coefficients are referred to physical coordinates, so a constant c maps to
// c at m = 0 and exp(i xi_1 x) maps to 1 at m = 1.
void forward_in_place(const Grid& grid, std::span<Complex> data);
void backward_in_place(const Grid& grid, std::span<Complex> data);

// Throws NumericalAbort on nonfinite input.
SpectralField to_spectral(const ComplexField& field);
ComplexField to_physical(const SpectralField& spec);

using Multiplier = std::function<Complex(const Vec3& xi)>;

SpectralField apply_multiplier(SpectralField spec, const Multiplier& m);

// Coefficientwise product with a precomputed 0/1 (or any) mask.
SpectralField apply_mask(SpectralField spec, const SpectralField& mask);

// 1 where every |m_a| <= floor(ratio * n / 2), 0 elsewhere.
SpectralField dealias_mask(const Grid& grid, double ratio);

// Spectral partial derivative along one axis.
ComplexField spectral_derivative(const ComplexField& field, int axis);

}  // namespace nlslab
