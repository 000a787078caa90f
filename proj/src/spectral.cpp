#include "besim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "besim/error.hpp"
#include "fft_plans.hpp"

namespace besim {

namespace spectral {

void forward_into(const SpectralGrid& grid, std::span<const double> in, std::span<Complex> out) {
  if (in.size() != grid.points() || out.size() != grid.modes())
    throw Error(ErrorKind::dimension, "forward transform: buffer size does not match grid");
  // r2c does not modify its input.
  double* src = const_cast<double*>(in.data());
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  const auto& plans = grid.plans();
  const bool aligned = fftw_alignment_of(src) == 0 && fftw_alignment_of(reinterpret_cast<double*>(dst)) == 0;
  fftw_execute_dft_r2c(aligned ? plans.r2c : plans.r2c_unaligned, src, dst);
  const double scale = 1.0 / static_cast<double>(grid.points());
  for (Complex& c : out) c *= scale;
}

void inverse_into(const SpectralGrid& grid, std::span<const Complex> in, std::span<double> out) {
  if (in.size() != grid.modes() || out.size() != grid.points())
    throw Error(ErrorKind::dimension, "inverse transform: buffer size does not match grid");
  // c2r overwrites its input, so transform a reusable copy.
  thread_local std::vector<Complex> scratch;
  scratch.assign(in.begin(), in.end());
  inverse_destroying(grid, scratch, out);
}

void inverse_destroying(const SpectralGrid& grid, std::span<Complex> in, std::span<double> out) {
  if (in.size() != grid.modes() || out.size() != grid.points())
    throw Error(ErrorKind::dimension, "inverse transform: buffer size does not match grid");
  auto* src = reinterpret_cast<fftw_complex*>(in.data());
  const auto& plans = grid.plans();
  const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(src)) == 0 && fftw_alignment_of(out.data()) == 0;
  fftw_execute_dft_c2r(aligned ? plans.c2r : plans.c2r_unaligned, src, out.data());
}

void derivative_into(const SpectralGrid& grid, std::span<const Complex> in, int axis,
                     std::span<Complex> out) {
  const auto k = grid.derivative_wavenumber(axis);
  for (std::size_t m = 0; m < in.size(); ++m) out[m] = Complex(-k[m] * in[m].imag(), k[m] * in[m].real());
}

void laplacian_into(const SpectralGrid& grid, std::span<const Complex> in, std::span<Complex> out) {
  const auto k2 = grid.k_squared();
  for (std::size_t m = 0; m < in.size(); ++m) out[m] = -k2[m] * in[m];
}

void dealias_inplace(const SpectralGrid& grid, std::span<Complex> f) {
  const auto mask = grid.dealias_mask();
  for (std::size_t m = 0; m < f.size(); ++m)
    if (!mask[m]) f[m] = 0.0;
}

void leray_inplace(const SpectralGrid& grid, std::array<std::span<Complex>, 3> v) {
  const auto k0 = grid.derivative_wavenumber(0);
  const auto k1 = grid.derivative_wavenumber(1);
  const auto k2 = grid.derivative_wavenumber(2);
  for (std::size_t m = 0; m < grid.modes(); ++m) {
    const double kk = k0[m] * k0[m] + k1[m] * k1[m] + k2[m] * k2[m];
    if (kk == 0.0) continue;
    const Complex kdotu = k0[m] * v[0][m] + k1[m] * v[1][m] + k2[m] * v[2][m];
    const Complex s = kdotu / kk;
    v[0][m] -= k0[m] * s;
    v[1][m] -= k1[m] * s;
    v[2][m] -= k2[m] * s;
  }
}

}  // namespace spectral

SpectralField SpectralField::zeros(GridPtr grid) {
  SpectralField f{std::move(grid), {}};
  f.modes.assign(f.grid->modes(), Complex{});
  return f;
}

SpectralField forward(const GridPtr& grid, std::span<const double> values) {
  SpectralField f = SpectralField::zeros(grid);
  spectral::forward_into(*grid, values, f.modes);
  return f;
}

SpectralField forward(const ScalarField& field) { return forward(field.grid, field.values); }

void inverse_into(const SpectralField& field, std::span<double> out) {
  spectral::inverse_into(*field.grid, field.modes, out);
}

ScalarField inverse(const SpectralField& field) {
  ScalarField out = ScalarField::zeros(field.grid);
  inverse_into(field, out.values);
  return out;
}

SpectralVector forward(const VelocityField& u) {
  return {forward(u.grid, u.comps[0]), forward(u.grid, u.comps[1]), forward(u.grid, u.comps[2])};
}

VelocityField inverse(const SpectralVector& u) {
  for (int a = 1; a < 3; ++a) require_same_grid(*u[0].grid, *u[a].grid, "inverse");
  VelocityField out = VelocityField::zeros(u[0].grid);
  for (int a = 0; a < 3; ++a) inverse_into(u[a], out.comps[a]);
  return out;
}

SpectralField derivative(const SpectralField& f, int axis) {
  SpectralField out = SpectralField::zeros(f.grid);
  spectral::derivative_into(*f.grid, f.modes, axis, out.modes);
  return out;
}

SpectralVector gradient(const SpectralField& f) {
  return {derivative(f, 0), derivative(f, 1), derivative(f, 2)};
}

SpectralField laplacian(const SpectralField& f) {
  SpectralField out = SpectralField::zeros(f.grid);
  spectral::laplacian_into(*f.grid, f.modes, out.modes);
  return out;
}

SpectralField divergence(const SpectralVector& v) {
  for (int a = 1; a < 3; ++a) require_same_grid(*v[0].grid, *v[a].grid, "divergence");
  SpectralField out = SpectralField::zeros(v[0].grid);
  std::vector<Complex> tmp(out.modes.size());
  for (int a = 0; a < 3; ++a) {
    spectral::derivative_into(*out.grid, v[a].modes, a, tmp);
    for (std::size_t m = 0; m < tmp.size(); ++m) out.modes[m] += tmp[m];
  }
  return out;
}

SpectralVector leray_project(SpectralVector v) {
  for (int a = 1; a < 3; ++a) require_same_grid(*v[0].grid, *v[a].grid, "leray_project");
  spectral::leray_inplace(*v[0].grid, {v[0].modes, v[1].modes, v[2].modes});
  return v;
}

SpectralField dealias(SpectralField f) {
  spectral::dealias_inplace(*f.grid, f.modes);
  return f;
}

SpectralField helmholtz_solve(const SpectralField& rhs, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::configuration,
                "helmholtz_solve: alpha must be positive, got " + std::to_string(alpha));
  SpectralField out = rhs;
  const auto k2 = rhs.grid->k_squared();
  for (std::size_t m = 0; m < out.modes.size(); ++m) out.modes[m] /= 1.0 + alpha * k2[m];
  return out;
}

double mode_l2_squared(const SpectralField& f) {
  double s = 0.0;
  for (std::size_t m = 0; m < f.modes.size(); ++m) s += f.grid->hermitian_weight(m) * std::norm(f.modes[m]);
  return s * f.grid->volume();
}

double quadrature_l2_squared(const ScalarField& f) { return quadrature_inner(f, f); }

double quadrature_inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(*f.grid, *g.grid, "quadrature_inner");
  double s = 0.0;
  for (std::size_t p = 0; p < f.values.size(); ++p) s += f.values[p] * g.values[p];
  return s * f.grid->cell_volume();
}

double relative_divergence(const SpectralVector& u) {
  const SpectralGrid& grid = *u[0].grid;
  const auto k0 = grid.derivative_wavenumber(0);
  const auto k1 = grid.derivative_wavenumber(1);
  const auto k2 = grid.derivative_wavenumber(2);
  double max_div = 0.0;
  double max_mode = 0.0;
  for (std::size_t m = 0; m < grid.modes(); ++m) {
    const Complex d = k0[m] * u[0].modes[m] + k1[m] * u[1].modes[m] + k2[m] * u[2].modes[m];
    max_div = std::max(max_div, std::abs(d));
    const double mag = std::sqrt(std::norm(u[0].modes[m]) + std::norm(u[1].modes[m]) +
                                 std::norm(u[2].modes[m]));
    max_mode = std::max(max_mode, mag);
  }
  return max_mode == 0.0 ? 0.0 : max_div / max_mode;
}

}  // namespace besim
