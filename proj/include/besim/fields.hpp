#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "besim/grid.hpp"
#include "besim/params.hpp"
#include "besim/tensor.hpp"

namespace besim {

struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  static ScalarField zeros(GridPtr grid);
};

/// Storage order of the six independent Q entries.
inline constexpr std::array<std::pair<int, int>, 6> kQEntries = {
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

/// Index into kQEntries for (i, j) in either order.
constexpr int q_slot(int i, int j) {
  if (i > j) std::swap(i, j);
  constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[i][j];
}

/// Symmetric 3x3 tensor field. Only the upper triangle is stored, so
/// symmetry holds by construction; the trace is enforced by projection.
struct QTensorField {
  GridPtr grid;
  std::array<std::vector<double>, 6> comps;

  static QTensorField zeros(GridPtr grid);

  Mat3 at(std::size_t point) const;
  void set(std::size_t point, const Mat3& m);
  double max_abs_trace() const;
};

struct VelocityField {
  GridPtr grid;
  std::array<std::vector<double>, 3> comps;

  static VelocityField zeros(GridPtr grid);
};

struct StateSnapshot {
  double time = 0.0;
  QTensorField Q;
  VelocityField u;
  ModelParams params;

  static StateSnapshot zeros(GridPtr grid, const ModelParams& params);
  const GridPtr& grid() const { return Q.grid; }
};

bool all_finite(const QTensorField& Q);
bool all_finite(const VelocityField& u);

/// Q = s (n (x) n - I/3) pointwise. The director must be unit length to 1e-12.
QTensorField uniaxial_q(const GridPtr& grid, double s, const VelocityField& director);

/// Band-limited random divergence-free velocity. Modes with 0 < |f| and
/// |f_i| <= kmax are drawn in a fixed order, so the same seed yields the same
/// continuous field on any grid whose dealias cutoff covers kmax. Mode
/// amplitudes fall off as |k|^-spectrum; the result has rms |u| = amplitude.
VelocityField random_solenoidal_velocity(const GridPtr& grid, double spectrum, double amplitude,
                                         std::uint64_t seed, int kmax = 4);

/// Same construction for a symmetric traceless tensor field; rms |Q|_F = amplitude.
QTensorField random_traceless_q(const GridPtr& grid, double spectrum, double amplitude,
                                std::uint64_t seed, int kmax = 4);

/// Removes Tr(Q)/3 I pointwise and Leray-projects u. Throws a
/// numerical-state error on non-finite input.
StateSnapshot project_constraints(StateSnapshot state);

}  // namespace besim
