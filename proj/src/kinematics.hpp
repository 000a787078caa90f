#pragma once

#include <array>
#include <vector>

#include "besim/fields.hpp"
#include "besim/spectral.hpp"
#include "besim/tensor.hpp"

// Shared evaluation layer for the integrator and the diagnostics: spectral
// coefficients of a state and the physical-space fields derived from them.
namespace besim::detail {

using Modes = std::vector<Complex>;
using Values = std::vector<double>;

struct SpectralState {
  GridPtr grid;
  std::array<Modes, 6> Q;
  std::array<Modes, 3> u;

  static SpectralState zeros(GridPtr grid);
};

/// Transforms a snapshot; optionally zeroes modes outside the dealias mask.
SpectralState to_spectral(const StateSnapshot& state, bool dealias);
/// Physical fields of a spectral state, stamped with the given time/params.
StateSnapshot to_snapshot(const SpectralState& s, double time, const ModelParams& params);

/// Removes the spectral trace of Q and Leray-projects u.
void project_spectral(SpectralState& s);

/// Q(i,j) as a spectral tensor entry in the symmetric slot layout.
inline const Modes& q_entry(const SpectralState& s, int i, int j) { return s.Q[q_slot(i, j)]; }

/// Point values of Q, its derivatives, u and grad u.
struct PhysicalFields {
  GridPtr grid;
  std::array<Values, 6> Q;
  std::array<Values, 6> lapQ;
  std::array<std::array<Values, 6>, 3> dQ;  // dQ[g] = d_g Q
  std::array<Values, 3> u;
  std::array<std::array<Values, 3>, 3> gu;  // gu[a][b] = d_b u_a

  Mat3 Q_at(std::size_t p) const { return sym(Q, p); }
  Mat3 lapQ_at(std::size_t p) const { return sym(lapQ, p); }
  GradQ gradQ_at(std::size_t p) const {
    return {{sym(dQ[0], p), sym(dQ[1], p), sym(dQ[2], p)}};
  }
  GradTensor gradu_at(std::size_t p) const {
    GradTensor g;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) g.value(a, b) = gu[a][b][p];
    return g;
  }
  std::array<double, 3> u_at(std::size_t p) const { return {u[0][p], u[1][p], u[2][p]}; }

  static Mat3 sym(const std::array<Values, 6>& c, std::size_t p) {
    Mat3 m;
    m(0, 0) = c[0][p];
    m(0, 1) = m(1, 0) = c[1][p];
    m(0, 2) = m(2, 0) = c[2][p];
    m(1, 1) = c[3][p];
    m(1, 2) = m(2, 1) = c[4][p];
    m(2, 2) = c[5][p];
    return m;
  }
};

PhysicalFields physical_fields(const SpectralState& s);

/// V sum_k w |c_k|^2 summed over the six entries with off-diagonal weight 2
/// (the L2 norm squared of the full symmetric tensor).
double q_l2_squared(const SpectralGrid& grid, const std::array<Modes, 6>& q);
double u_l2_squared(const SpectralGrid& grid, const std::array<Modes, 3>& u);

inline double q_weight(int slot) { return kQEntries[slot].first == kQEntries[slot].second ? 1.0 : 2.0; }

}  // namespace besim::detail
