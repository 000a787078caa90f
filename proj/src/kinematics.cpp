#include "kinematics.hpp"

namespace besim::detail {

SpectralState SpectralState::zeros(GridPtr grid) {
  SpectralState s{std::move(grid), {}, {}};
  for (auto& c : s.Q) c.assign(s.grid->modes(), Complex{});
  for (auto& c : s.u) c.assign(s.grid->modes(), Complex{});
  return s;
}

SpectralState to_spectral(const StateSnapshot& state, bool dealias) {
  require_same_grid(*state.Q.grid, *state.u.grid, "state");
  SpectralState s = SpectralState::zeros(state.grid());
  const SpectralGrid& g = *s.grid;
  for (int c = 0; c < 6; ++c) {
    spectral::forward_into(g, state.Q.comps[c], s.Q[c]);
    if (dealias) spectral::dealias_inplace(g, s.Q[c]);
  }
  for (int c = 0; c < 3; ++c) {
    spectral::forward_into(g, state.u.comps[c], s.u[c]);
    if (dealias) spectral::dealias_inplace(g, s.u[c]);
  }
  return s;
}

StateSnapshot to_snapshot(const SpectralState& s, double time, const ModelParams& params) {
  StateSnapshot out = StateSnapshot::zeros(s.grid, params);
  out.time = time;
  for (int c = 0; c < 6; ++c) spectral::inverse_into(*s.grid, s.Q[c], out.Q.comps[c]);
  for (int c = 0; c < 3; ++c) spectral::inverse_into(*s.grid, s.u[c], out.u.comps[c]);
  return out;
}

void project_spectral(SpectralState& s) {
  for (std::size_t m = 0; m < s.grid->modes(); ++m) {
    const Complex third = (s.Q[0][m] + s.Q[3][m] + s.Q[5][m]) / 3.0;
    s.Q[0][m] -= third;
    s.Q[3][m] -= third;
    s.Q[5][m] -= third;
  }
  spectral::leray_inplace(*s.grid, {s.u[0], s.u[1], s.u[2]});
}

PhysicalFields physical_fields(const SpectralState& s) {
  const SpectralGrid& g = *s.grid;
  const std::size_t n = g.points();
  PhysicalFields f;
  f.grid = s.grid;
  Modes tmp(g.modes());
  auto alloc = [n](Values& v) { v.resize(n); };
  for (int c = 0; c < 6; ++c) {
    alloc(f.Q[c]);
    spectral::inverse_into(g, s.Q[c], f.Q[c]);
    alloc(f.lapQ[c]);
    spectral::laplacian_into(g, s.Q[c], tmp);
    spectral::inverse_destroying(g, tmp, f.lapQ[c]);
    for (int ax = 0; ax < 3; ++ax) {
      alloc(f.dQ[ax][c]);
      spectral::derivative_into(g, s.Q[c], ax, tmp);
      spectral::inverse_destroying(g, tmp, f.dQ[ax][c]);
    }
  }
  for (int a = 0; a < 3; ++a) {
    alloc(f.u[a]);
    spectral::inverse_into(g, s.u[a], f.u[a]);
    for (int b = 0; b < 3; ++b) {
      alloc(f.gu[a][b]);
      spectral::derivative_into(g, s.u[a], b, tmp);
      spectral::inverse_destroying(g, tmp, f.gu[a][b]);
    }
  }
  return f;
}

double q_l2_squared(const SpectralGrid& grid, const std::array<Modes, 6>& q) {
  double total = 0.0;
  for (int c = 0; c < 6; ++c) {
    double s = 0.0;
    for (std::size_t m = 0; m < grid.modes(); ++m) s += grid.hermitian_weight(m) * std::norm(q[c][m]);
    total += q_weight(c) * s;
  }
  return total * grid.volume();
}

double u_l2_squared(const SpectralGrid& grid, const std::array<Modes, 3>& u) {
  double total = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t m = 0; m < grid.modes(); ++m) total += grid.hermitian_weight(m) * std::norm(u[c][m]);
  return total * grid.volume();
}

}  // namespace besim::detail
