#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "besim/fields.hpp"
#include "besim/grid.hpp"

namespace besim {

using Complex = std::complex<double>;

/// Fourier coefficients of one real scalar field, normalized so that a
/// constant field c has zero mode c. Layout follows SpectralGrid.
struct SpectralField {
  GridPtr grid;
  std::vector<Complex> modes;

  static SpectralField zeros(GridPtr grid);
};

using SpectralVector = std::array<SpectralField, 3>;

SpectralField forward(const ScalarField& field);
SpectralField forward(const GridPtr& grid, std::span<const double> values);
ScalarField inverse(const SpectralField& field);
void inverse_into(const SpectralField& field, std::span<double> out);

SpectralVector forward(const VelocityField& u);
VelocityField inverse(const SpectralVector& u);

/// Derivative along one axis: multiply by i k_axis.
SpectralField derivative(const SpectralField& f, int axis);
SpectralVector gradient(const SpectralField& f);
SpectralField laplacian(const SpectralField& f);
SpectralField divergence(const SpectralVector& v);

/// u -> u - k (k.u)/|k|^2, zero mode untouched.
SpectralVector leray_project(SpectralVector v);
SpectralField dealias(SpectralField f);
/// Solves (I - alpha Lap) x = rhs; alpha must be positive.
SpectralField helmholtz_solve(const SpectralField& rhs, double alpha);

/// V sum_k |c_k|^2 over the full spectrum (equals the quadrature L2 norm squared).
double mode_l2_squared(const SpectralField& f);
/// Integral of f^2 by the rectangle rule.
double quadrature_l2_squared(const ScalarField& f);
/// Integral of f g by the rectangle rule.
double quadrature_inner(const ScalarField& f, const ScalarField& g);
/// max_k |k.u(k)| / max_k |u(k)| (0 for a zero field).
double relative_divergence(const SpectralVector& u);

// Lower-level in-place helpers used by the integrator and diagnostics.
namespace spectral {
void forward_into(const SpectralGrid& grid, std::span<const double> in, std::span<Complex> out);
void inverse_into(const SpectralGrid& grid, std::span<const Complex> in, std::span<double> out);
/// As inverse_into, but clobbers `in`; saves a copy when the input is scratch.
void inverse_destroying(const SpectralGrid& grid, std::span<Complex> in, std::span<double> out);
void derivative_into(const SpectralGrid& grid, std::span<const Complex> in, int axis,
                     std::span<Complex> out);
void laplacian_into(const SpectralGrid& grid, std::span<const Complex> in, std::span<Complex> out);
void dealias_inplace(const SpectralGrid& grid, std::span<Complex> f);
void leray_inplace(const SpectralGrid& grid, std::array<std::span<Complex>, 3> v);
}  // namespace spectral

}  // namespace besim
