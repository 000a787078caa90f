#include "besim/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>

#include "besim/error.hpp"
#include "besim/spectral.hpp"

namespace besim {

ScalarField ScalarField::zeros(GridPtr grid) {
  ScalarField f{std::move(grid), {}};
  f.values.assign(f.grid->points(), 0.0);
  return f;
}

QTensorField QTensorField::zeros(GridPtr grid) {
  QTensorField q{std::move(grid), {}};
  for (auto& c : q.comps) c.assign(q.grid->points(), 0.0);
  return q;
}

Mat3 QTensorField::at(std::size_t point) const {
  Mat3 m;
  for (int s = 0; s < 6; ++s) {
    const auto [i, j] = kQEntries[s];
    m(i, j) = comps[s][point];
    m(j, i) = comps[s][point];
  }
  return m;
}

void QTensorField::set(std::size_t point, const Mat3& m) {
  for (int s = 0; s < 6; ++s) {
    const auto [i, j] = kQEntries[s];
    comps[s][point] = i == j ? m(i, i) : 0.5 * (m(i, j) + m(j, i));
  }
}

double QTensorField::max_abs_trace() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < comps[0].size(); ++p)
    worst = std::max(worst, std::abs(comps[0][p] + comps[3][p] + comps[5][p]));
  return worst;
}

VelocityField VelocityField::zeros(GridPtr grid) {
  VelocityField u{std::move(grid), {}};
  for (auto& c : u.comps) c.assign(u.grid->points(), 0.0);
  return u;
}

StateSnapshot StateSnapshot::zeros(GridPtr grid, const ModelParams& params) {
  return {0.0, QTensorField::zeros(grid), VelocityField::zeros(grid), params};
}

namespace {

template <std::size_t N>
bool finite_comps(const std::array<std::vector<double>, N>& comps) {
  for (const auto& c : comps)
    for (double v : c)
      if (!std::isfinite(v)) return false;
  return true;
}

// Canonical half of the integer lattice: one of each +-f pair, zero excluded.
bool canonical(int f1, int f2, int f3) {
  if (f3 != 0) return f3 > 0;
  if (f2 != 0) return f2 > 0;
  return f1 > 0;
}

int wrap(int f, int n) { return f < 0 ? f + n : f; }

bool within_mask(const SpectralGrid& grid, std::array<int, 3> f) {
  for (int ax = 0; ax < 3; ++ax)
    if (std::abs(f[ax]) > grid.cutoff(ax)) return false;
  return true;
}

// Stores c at f and conj(c) at -f when both live in the half layout.
void store_mode(const SpectralGrid& grid, std::span<Complex> modes, std::array<int, 3> f, Complex c) {
  const auto& n = grid.dims();
  modes[grid.mode_index(wrap(f[0], n[0]), wrap(f[1], n[1]), f[2])] = c;
  if (f[2] == 0) modes[grid.mode_index(wrap(-f[0], n[0]), wrap(-f[1], n[1]), 0)] = std::conj(c);
}

// Draws ncomp complex amplitudes per canonical mode of [-kmax, kmax]^3 in a
// fixed order, hands each to `shape`, and stores the shaped result.
template <std::size_t NComp, class Shape>
std::array<std::vector<Complex>, NComp> random_modes(const SpectralGrid& grid, double spectrum,
                                                    std::uint64_t seed, int kmax, Shape shape) {
  std::array<std::vector<Complex>, NComp> modes;
  for (auto& m : modes) m.assign(grid.modes(), Complex{});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int f1 = -kmax; f1 <= kmax; ++f1)
    for (int f2 = -kmax; f2 <= kmax; ++f2)
      for (int f3 = -kmax; f3 <= kmax; ++f3) {
        if (!canonical(f1, f2, f3)) continue;
        std::array<Complex, NComp> c;
        for (auto& z : c) {
          const double re = normal(rng);
          const double im = normal(rng);
          z = Complex(re, im);
        }
        const std::array<int, 3> f{f1, f2, f3};
        if (!within_mask(grid, f)) continue;
        std::array<double, 3> k;
        double kk = 0.0;
        for (int ax = 0; ax < 3; ++ax) {
          k[ax] = 2.0 * std::numbers::pi * f[ax] / grid.box()[ax];
          kk += k[ax] * k[ax];
        }
        const double envelope = std::pow(std::sqrt(kk), -spectrum);
        for (auto& z : c) z *= envelope;
        shape(k, c);
        for (std::size_t s = 0; s < NComp; ++s) store_mode(grid, modes[s], f, c[s]);
      }
  return modes;
}

}  // namespace

bool all_finite(const QTensorField& Q) { return finite_comps(Q.comps); }
bool all_finite(const VelocityField& u) { return finite_comps(u.comps); }

QTensorField uniaxial_q(const GridPtr& grid, double s, const VelocityField& director) {
  require_same_grid(*grid, *director.grid, "uniaxial_q");
  QTensorField q = QTensorField::zeros(grid);
  for (std::size_t p = 0; p < grid->points(); ++p) {
    const std::array<double, 3> n{director.comps[0][p], director.comps[1][p], director.comps[2][p]};
    const double n2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-12))
      throw Error(ErrorKind::input,
                  "uniaxial_q: director is not unit length at grid point " + std::to_string(p));
    for (int slot = 0; slot < 6; ++slot) {
      const auto [i, j] = kQEntries[slot];
      q.comps[slot][p] = s * (n[i] * n[j] - (i == j ? n2 / 3.0 : 0.0));
    }
  }
  return q;
}

VelocityField random_solenoidal_velocity(const GridPtr& grid, double spectrum, double amplitude,
                                         std::uint64_t seed, int kmax) {
  if (!(amplitude >= 0.0))
    throw Error(ErrorKind::input, "random_solenoidal_velocity: amplitude must be nonnegative");
  VelocityField u = VelocityField::zeros(grid);
  if (amplitude == 0.0) return u;
  auto modes = random_modes<3>(*grid, spectrum, seed, kmax,
                               [](const std::array<double, 3>& k, std::array<Complex, 3>& c) {
                                 const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                                 const Complex s = (k[0] * c[0] + k[1] * c[1] + k[2] * c[2]) / kk;
                                 for (int a = 0; a < 3; ++a) c[a] -= k[a] * s;
                               });
  for (int a = 0; a < 3; ++a) spectral::inverse_into(*grid, modes[a], u.comps[a]);
  double mean_sq = 0.0;
  for (std::size_t p = 0; p < grid->points(); ++p)
    for (int a = 0; a < 3; ++a) mean_sq += u.comps[a][p] * u.comps[a][p];
  mean_sq /= static_cast<double>(grid->points());
  if (mean_sq == 0.0) return u;
  const double scale = amplitude / std::sqrt(mean_sq);
  for (auto& c : u.comps)
    for (double& v : c) v *= scale;
  return u;
}

QTensorField random_traceless_q(const GridPtr& grid, double spectrum, double amplitude,
                                std::uint64_t seed, int kmax) {
  if (!(amplitude >= 0.0))
    throw Error(ErrorKind::input, "random_traceless_q: amplitude must be nonnegative");
  QTensorField q = QTensorField::zeros(grid);
  if (amplitude == 0.0) return q;
  auto modes = random_modes<6>(*grid, spectrum, seed, kmax,
                               [](const std::array<double, 3>&, std::array<Complex, 6>& c) {
                                 const Complex tr = (c[0] + c[3] + c[5]) / 3.0;
                                 c[0] -= tr;
                                 c[3] -= tr;
                                 c[5] -= tr;
                               });
  for (int s = 0; s < 6; ++s) spectral::inverse_into(*grid, modes[s], q.comps[s]);
  double mean_sq = 0.0;
  for (std::size_t p = 0; p < grid->points(); ++p)
    for (int s = 0; s < 6; ++s) {
      const double w = kQEntries[s].first == kQEntries[s].second ? 1.0 : 2.0;
      mean_sq += w * q.comps[s][p] * q.comps[s][p];
    }
  mean_sq /= static_cast<double>(grid->points());
  if (mean_sq == 0.0) return q;
  const double scale = amplitude / std::sqrt(mean_sq);
  for (auto& c : q.comps)
    for (double& v : c) v *= scale;
  return q;
}

StateSnapshot project_constraints(StateSnapshot state) {
  if (!all_finite(state.Q) || !all_finite(state.u))
    throw Error(ErrorKind::numerical_state, "project_constraints: non-finite field values");
  require_same_grid(*state.Q.grid, *state.u.grid, "project_constraints");
  auto& q = state.Q.comps;
  for (std::size_t p = 0; p < q[0].size(); ++p) {
    const double third = (q[0][p] + q[3][p] + q[5][p]) / 3.0;
    q[0][p] -= third;
    q[3][p] -= third;
    q[5][p] -= third;
  }
  state.u = inverse(leray_project(forward(state.u)));
  return state;
}

}  // namespace besim
