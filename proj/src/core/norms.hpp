#pragma once

#include <limits>

#include "field.hpp"

namespace nlslab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// (h^d sum |u|^p)^(1/p); grid sup of |u| for p = infinity.
double lp_norm(const ComplexField& field, double p);

// h^d sum |u|^p without the root.
double lp_integral(const ComplexField& field, double p);

// L2 norm of the multiplier (1+|xi|^2)^(s/2) (hs) or |xi|^s (hdot) applied to
// the field. The zero mode contributes nothing to hdot for s != 0.
double hs_norm(const SpectralField& spec, double s);
double hs_norm(const ComplexField& field, double s);
double hdot_norm(const SpectralField& spec, double s);
double hdot_norm(const ComplexField& field, double s);

// Fraction of the mass held by sites whose coordinate on some axis lies in
// the outermost `fraction` of the box, i.e. |x_a| >= (1 - fraction) L / 2.
double boundary_shell_mass_fraction(const ComplexField& field, double fraction);

// L2 norm of x * u with centered coordinates (sqrt of sum over axes).
double weighted_x_norm(const ComplexField& field);

}  // namespace nlslab
