#pragma once

#include <array>

#include "eci/fft.hpp"
#include "eci/field.hpp"

namespace eci {

/// Exact derivative of the trigonometric interpolant along axis (1..3).
/// Throws AliasingError if the field carries energy at the Nyquist planes.
PeriodicField spectral_derivative(const PeriodicField& f, int axis);

/// Gradient of a scalar.
PeriodicField gradient(const PeriodicField& f);

/// Rank decreases by one: rank-1 -> scalar div v, rank-2 -> vector (d_j T_ij).
PeriodicField divergence(const PeriodicField& f);

PeriodicField curl(const PeriodicField& v);

/// Rows of the Jacobian: element i is the gradient of component i.
std::array<PeriodicField, 3> jacobian_rows(const PeriodicField& v);

/// Solve Laplace u = f - mean(f), mean(u) = 0, per component.
PeriodicField laplace_inverse(const PeriodicField& f);

/// Fraction of spectral energy at |k|_inf >= threshold_band.
double high_band_energy_fraction(const PeriodicField& f, int threshold_band);

// -- de-aliased products ------------------------------------------------
// Each product is evaluated on a grid large enough that every retained mode
// (|k|_inf <= n/2) of the result is alias-free given the operands' band
// hints, then truncated back to the operands' grid.

PeriodicField mult_ss(const PeriodicField& a, const PeriodicField& b);
PeriodicField mult_sv(const PeriodicField& s, const PeriodicField& v);
PeriodicField dot_vv(const PeriodicField& a, const PeriodicField& b);
/// Symmetrised outer product (a_i b_j + a_j b_i)/2.
PeriodicField outer_sym(const PeriodicField& a, const PeriodicField& b);
/// (v . grad) f, per component of f.
PeriodicField advect(const PeriodicField& f, const PeriodicField& v);

// -- node-exact reductions (plain products at nodes are exact for means) --

/// Mean over nodes of a.b (componentwise dot for vectors/tensors).
double mean_dot(const PeriodicField& a, const PeriodicField& b);
/// Mean over nodes of |v|^2.
double mean_square(const PeriodicField& v);
/// Integral over the torus of |v|^2 = (2pi)^3 * mean_square.
double integral_square(const PeriodicField& v);

/// Mean of each component as a vector of length ncomp.
std::array<double, 6> component_means(const PeriodicField& f);

/// Resample a field to a new grid (spectral pad/truncate).
PeriodicField regrid(const PeriodicField& f, Grid3 to);

}  // namespace eci
