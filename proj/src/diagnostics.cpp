#include "besim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "besim/error.hpp"
#include "besim/spectral.hpp"
#include "kinematics.hpp"

namespace besim {

using detail::PhysicalFields;
using detail::SpectralState;

namespace {

double tr_q_gradu(const Mat3& Q, const Mat3& gu) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s += Q(a, b) * gu(b, a);
  return s;
}

double frob2(const Mat3& m) { return contract(m, m); }

}  // namespace

EnergyBreakdown energy_breakdown(const StateSnapshot& state) {
  const ModelParams& prm = state.params;
  const SpectralState s = detail::to_spectral(state, true);
  const PhysicalFields f = detail::physical_fields(s);
  const Mat3 third = (1.0 / 3.0) * Mat3::identity();

  double u2 = 0, q2 = 0, gq2 = 0, gu2 = 0, lq2 = 0, xi_a = 0, xi_m1 = 0, xi_m2 = 0, bulk = 0;
  for (std::size_t p = 0; p < s.grid->points(); ++p) {
    const Mat3 Q = f.Q_at(p);
    const Mat3 lapQ = f.lapQ_at(p);
    const GradQ dQ = f.gradQ_at(p);
    const Mat3 gu = f.gradu_at(p).value;
    const auto u = f.u_at(p);
    u2 += u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    q2 += frob2(Q);
    gq2 += frob2(dQ.d[0]) + frob2(dQ.d[1]) + frob2(dQ.d[2]);
    gu2 += frob2(gu);
    lq2 += frob2(lapQ);

    const Mat3 M = bulk_term(Q, prm.b, prm.c);
    const double trq = tr_q_gradu(Q, gu);
    const Mat3 Qt = Q + third;
    xi_a += contract(Q * Qt, gu) - trq * contract(Q, Q);
    xi_m1 += contract(Qt * M, gu);
    xi_m2 += trq * contract(M, Q);
    bulk += contract(M, Q - prm.L * lapQ);
  }
  const double h3 = s.grid->cell_volume();
  EnergyBreakdown e;
  e.kinetic = h3 * u2;
  e.q_l2 = h3 * q2;
  e.q_grad = prm.L * h3 * gq2;
  e.diss_visc = 2.0 * prm.mu * h3 * gu2;
  e.diss_q0 = 2.0 * prm.a * prm.Gamma * h3 * q2;
  e.diss_q1 = 2.0 * (prm.a + 1.0) * prm.Gamma * prm.L * h3 * gq2;
  e.diss_q2 = 2.0 * prm.Gamma * prm.L * prm.L * h3 * lq2;
  e.rhs_xi_terms = h3 * (4.0 * (1.0 - prm.a) * prm.xi * xi_a + 4.0 * prm.xi * xi_m1 -
                         4.0 * prm.xi * xi_m2);
  e.rhs_bulk_terms = h3 * 2.0 * prm.Gamma * bulk;
  return e;
}

void EnergyLedger::add(double t, const EnergyBreakdown& e) {
  if (s_.count == 0) {
    s_.e0 = e.energy();
  } else {
    const double h = t - s_.t_prev;
    s_.dissipated += 0.5 * h * (s_.prev.dissipation() + e.dissipation());
    s_.supplied += 0.5 * h * (s_.prev.source() + e.source());
  }
  s_.t_prev = t;
  s_.prev = e;
  ++s_.count;
}

double EnergyLedger::residual() const {
  if (s_.count == 0) return 0.0;
  return (s_.prev.energy() + s_.dissipated) - (s_.e0 + s_.supplied);
}

EqualityResidual energy_equality_residual(std::span<const EnergySample> series, double t) {
  if (series.size() < 2)
    throw Error(ErrorKind::input, "energy_equality_residual needs at least two samples");
  EnergyLedger ledger;
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  for (const EnergySample& s : series) {
    ledger.add(s.t, s.e);
    if (std::abs(s.t - t) <= tol) return {ledger.residual(), 2};
  }
  throw Error(ErrorKind::input, "energy_equality_residual: t = " + std::to_string(t) +
                                    " is not a sample time of the series");
}

SerrinSpec SerrinSpec::make(double p) {
  if (!(p >= 2.0 && p <= 6.0))
    throw Error(ErrorKind::serrin_range,
                "Serrin exponent p = " + std::to_string(p) +
                    " outside [2,6]; the uniqueness criterion needs 2 <= p <= 6");
  SerrinSpec s;
  s.p = p;
  s.q = p == 2.0 ? kInfinity : 4.0 * p / (3.0 * p - 6.0);
  return s;
}

double SerrinAccumulator::norm() const {
  if (spec.endpoint()) return running_max;
  return std::pow(running_integral, 1.0 / spec.q);
}

SerrinAccumulator serrin_norm(SerrinAccumulator acc, double sample, double dt) {
  SerrinSpec::make(acc.spec.p);
  if (!(sample >= 0.0) || !std::isfinite(sample))
    throw Error(ErrorKind::input, "Serrin sample must be finite and nonnegative");
  if (!(dt >= 0.0)) throw Error(ErrorKind::input, "Serrin sample spacing must be nonnegative");
  acc.time += dt;
  if (acc.spec.endpoint())
    acc.running_max = std::max(acc.running_max, sample);
  else
    acc.running_integral += dt * std::pow(sample, acc.spec.q);
  acc.samples.emplace_back(acc.time, sample);
  return acc;
}

namespace {

// Quadrature Lp norm of pointwise magnitudes.
template <class Magnitude>
double lp_of(const SpectralGrid& grid, double p, Magnitude mag) {
  if (!(p >= 1.0)) throw Error(ErrorKind::input, "lp_norm needs p >= 1");
  const std::size_t n = grid.points();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, mag(i));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::pow(mag(i), p);
  return std::pow(s * grid.cell_volume(), 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField& f, double p) {
  return lp_of(*f.grid, p, [&](std::size_t i) { return std::abs(f.values[i]); });
}

double lp_norm(const VelocityField& u, double p) {
  return lp_of(*u.grid, p, [&](std::size_t i) {
    return std::sqrt(u.comps[0][i] * u.comps[0][i] + u.comps[1][i] * u.comps[1][i] +
                     u.comps[2][i] * u.comps[2][i]);
  });
}

double lp_norm(const QTensorField& Q, double p) {
  return lp_of(*Q.grid, p, [&](std::size_t i) { return frobenius_norm(Q.at(i)); });
}

std::vector<SerrinSamples> serrin_samples(const StateSnapshot& state, std::span<const double> ps) {
  const SpectralState s = detail::to_spectral(state, true);
  const PhysicalFields f = detail::physical_fields(s);
  const SpectralGrid& g = *s.grid;
  std::vector<double> lap(g.points()), grad(g.points());
  for (std::size_t i = 0; i < g.points(); ++i) {
    lap[i] = frobenius_norm(f.lapQ_at(i));
    grad[i] = frobenius_norm(f.gradu_at(i).value);
  }
  std::vector<SerrinSamples> out;
  for (double p : ps) {
    SerrinSamples x;
    x.lap_q = lp_of(g, p, [&](std::size_t i) { return lap[i]; });
    x.grad_u = lp_of(g, p, [&](std::size_t i) { return grad[i]; });
    out.push_back(x);
  }
  return out;
}

SerrinSamples serrin_samples(const StateSnapshot& state, double p) {
  return serrin_samples(state, std::span<const double>(&p, 1)).front();
}

namespace {

// sum over modes of weight(|k|^2) * |c|^2, times the box volume.
template <class Weight>
double weighted_sum(const SpectralGrid& g, std::span<const Complex> c, Weight w) {
  const auto k2 = g.k_squared();
  double s = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) s += g.hermitian_weight(m) * w(k2[m]) * std::norm(c[m]);
  return s * g.volume();
}

struct SobolevParts {
  double u = 0, gu = 0, q = 0, gq = 0, lq = 0;
};

SobolevParts sobolev_parts(const StateSnapshot& state, double s) {
  const SpectralState st = detail::to_spectral(state, false);
  const SpectralGrid& g = *st.grid;
  auto hs = [s](double k2) { return std::pow(1.0 + k2, s); };
  SobolevParts out;
  for (int a = 0; a < 3; ++a) {
    out.u += weighted_sum(g, st.u[a], hs);
    out.gu += weighted_sum(g, st.u[a], [&](double k2) { return hs(k2) * k2; });
  }
  for (int c = 0; c < 6; ++c) {
    const double w = detail::q_weight(c);
    out.q += w * weighted_sum(g, st.Q[c], hs);
    out.gq += w * weighted_sum(g, st.Q[c], [&](double k2) { return hs(k2) * k2; });
    out.lq += w * weighted_sum(g, st.Q[c], [&](double k2) { return hs(k2) * k2 * k2; });
  }
  return out;
}

}  // namespace

double sobolev_norm_squared(const QTensorField& Q, double s) {
  const auto st = StateSnapshot{0.0, Q, VelocityField::zeros(Q.grid), {}};
  return sobolev_parts(st, s).q;
}

double sobolev_norm_squared(const VelocityField& u, double s) {
  const SpectralGrid& g = *u.grid;
  std::vector<Complex> c(g.modes());
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    spectral::forward_into(g, u.comps[a], c);
    total += weighted_sum(g, c, [s](double k2) { return std::pow(1.0 + k2, s); });
  }
  return total;
}

SobolevEnergies sobolev_energies(const StateSnapshot& state, double s) {
  if (!(s >= 0.0)) throw Error(ErrorKind::input, "Sobolev index must be nonnegative");
  const ModelParams& prm = state.params;
  const SobolevParts n = sobolev_parts(state, s);
  SobolevEnergies e;
  e.s = s;
  e.E = n.u + prm.a * n.q + prm.L * n.gq;
  e.D = prm.mu * n.gu + prm.a * prm.a * prm.Gamma * n.q + 2.0 * prm.a * prm.Gamma * prm.L * n.gq +
        prm.Gamma * prm.L * prm.L * n.lq;
  return e;
}

double CancellationReport::max() const { return *std::max_element(residual.begin(), residual.end()); }

namespace {

// X = int x, Y = int y; the scale accumulates pointwise bounds |a||b| of the
// factors of each pairing.
struct PairSums {
  double x = 0.0, y = 0.0, scale = 0.0;
  void add(double xv, double yv, double bound) {
    x += xv;
    y += yv;
    scale += bound;
  }
  double normalized() const { return scale == 0.0 ? 0.0 : std::abs(x - y) / scale; }
};

double norm3(const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

CancellationReport cancellation_probe(const StateSnapshot& state, std::uint64_t g_seed) {
  const SpectralState s = detail::to_spectral(state, true);
  const PhysicalFields f = detail::physical_fields(s);
  const SpectralGrid& g = *s.grid;
  const std::size_t n = g.points();

  // Random second tensor on the same band.
  const int kmax = std::min({4, g.cutoff(0), g.cutoff(1), g.cutoff(2)});
  QTensorField G = random_traceless_q(s.grid, 1.0, 1.0, g_seed, kmax);

  // div(grad Q (.) grad Q) formed spectrally from the pointwise product.
  std::array<std::vector<double>, 3> div_dist;
  {
    std::array<std::vector<double>, 9> dist;
    for (auto& c : dist) c.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      const Mat3 m = distortion_stress(f.gradQ_at(p));
      for (int k = 0; k < 9; ++k) dist[k][p] = m.a[k];
    }
    std::vector<Complex> hat(g.modes()), acc(g.modes());
    for (int a = 0; a < 3; ++a) {
      std::fill(acc.begin(), acc.end(), Complex{});
      for (int b = 0; b < 3; ++b) {
        spectral::forward_into(g, dist[3 * a + b], hat);
        const auto kb = g.derivative_wavenumber(b);
        for (std::size_t m = 0; m < hat.size(); ++m) acc[m] += Complex(0.0, kb[m]) * hat[m];
      }
      div_dist[a].resize(n);
      spectral::inverse_into(g, acc, div_dist[a]);
    }
  }

  PairSums c1u, c1q, c2, c3, c6;
  std::array<PairSums, 2> c4, c5;
  for (std::size_t p = 0; p < n; ++p) {
    const Mat3 Q = f.Q_at(p);
    const Mat3 lapQ = f.lapQ_at(p);
    const GradQ dQ = f.gradQ_at(p);
    const Mat3 gu = f.gradu_at(p).value;
    const auto u = f.u_at(p);
    const auto [D, W] = strain_rotation({gu});

    std::array<double, 3> ugu_vec;
    for (int a = 0; a < 3; ++a) ugu_vec[a] = u[0] * gu(a, 0) + u[1] * gu(a, 1) + u[2] * gu(a, 2);
    const double nu = norm3(u);
    c1u.add(ugu_vec[0] * u[0] + ugu_vec[1] * u[1] + ugu_vec[2] * u[2], 0.0, norm3(ugu_vec) * nu);
    const Mat3 adv = u[0] * dQ.d[0] + u[1] * dQ.d[1] + u[2] * dQ.d[2];
    const double nq = frobenius_norm(Q);
    const double nlap = frobenius_norm(lapQ);
    c1q.add(contract(adv, Q), 0.0, frobenius_norm(adv) * nq);
    const Mat3 rot = Q * W - W * Q;
    c2.add(contract(rot, Q), 0.0, frobenius_norm(rot) * nq);
    const std::array<double, 3> dd{div_dist[0][p], div_dist[1][p], div_dist[2][p]};
    c3.add(contract(adv, lapQ), dd[0] * u[0] + dd[1] * u[1] + dd[2] * u[2],
           frobenius_norm(adv) * nlap + norm3(dd) * nu);
    const std::array<Mat3, 2> gs{Q, G.at(p)};
    for (int k = 0; k < 2; ++k) {
      const Mat3& Gm = gs[k];
      const Mat3 x4 = Gm * W - W * Gm;
      const Mat3 y4 = Gm * lapQ - lapQ * Gm;
      c4[k].add(contract(x4, lapQ), contract(y4, gu),
                frobenius_norm(x4) * nlap + frobenius_norm(y4) * frobenius_norm(gu));
      const Mat3 x5 = D * Q + Q * D;
      const Mat3 y5 = Gm * Q + Q * Gm;
      c5[k].add(contract(x5, Gm), contract(y5, gu),
                frobenius_norm(x5) * frobenius_norm(Gm) + frobenius_norm(y5) * frobenius_norm(gu));
    }
    c6.add(contract(Q, gu), contract(D, Q), nq * (frobenius_norm(gu) + frobenius_norm(D)));
  }
  CancellationReport r;
  r.residual[0] = std::max(c1u.normalized(), c1q.normalized());
  r.residual[1] = c2.normalized();
  r.residual[2] = c3.normalized();
  r.residual[3] = std::max(c4[0].normalized(), c4[1].normalized());
  r.residual[4] = std::max(c5[0].normalized(), c5[1].normalized());
  r.residual[5] = c6.normalized();
  return r;
}

double free_energy(const QTensorField& Q, const ModelParams& params) {
  StateSnapshot st{0.0, Q, VelocityField::zeros(Q.grid), params};
  const SpectralState s = detail::to_spectral(st, false);
  const PhysicalFields f = detail::physical_fields(s);
  double total = 0.0;
  for (std::size_t p = 0; p < s.grid->points(); ++p)
    total += free_energy_density(f.Q_at(p), f.gradQ_at(p), params);
  return total * s.grid->cell_volume();
}

QTensorField molecular_field(const QTensorField& Q, const ModelParams& params) {
  StateSnapshot st{0.0, Q, VelocityField::zeros(Q.grid), params};
  const SpectralState s = detail::to_spectral(st, false);
  const PhysicalFields f = detail::physical_fields(s);
  QTensorField H = QTensorField::zeros(Q.grid);
  for (std::size_t p = 0; p < s.grid->points(); ++p)
    H.set(p, molecular_field(f.Q_at(p), f.lapQ_at(p), params));
  return H;
}

double DirectionalCheck::mismatch() const {
  const double scale = std::max(std::abs(finite_difference), std::abs(pairing));
  return scale == 0.0 ? 0.0 : std::abs(finite_difference - pairing) / scale;
}

namespace {

QTensorField axpy(const QTensorField& x, double s, const QTensorField& v) {
  QTensorField y = x;
  for (int c = 0; c < 6; ++c)
    for (std::size_t p = 0; p < y.comps[c].size(); ++p) y.comps[c][p] += s * v.comps[c][p];
  return y;
}

double pair(const QTensorField& A, const QTensorField& B) {
  double s = 0.0;
  for (int c = 0; c < 6; ++c) {
    const double w = detail::q_weight(c);
    for (std::size_t p = 0; p < A.comps[c].size(); ++p) s += w * A.comps[c][p] * B.comps[c][p];
  }
  return s * A.grid->cell_volume();
}

}  // namespace

DirectionalCheck directional_check(const QTensorField& Q, const QTensorField& V,
                                   const ModelParams& params, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::input, "perturbation amplitude must be positive");
  require_same_grid(*Q.grid, *V.grid, "directional_check");
  const VelocityField zero = VelocityField::zeros(Q.grid);
  const PhysicalFields fq = detail::physical_fields(detail::to_spectral({0.0, Q, zero, params}, false));
  const PhysicalFields fv = detail::physical_fields(detail::to_spectral({0.0, V, zero, params}, false));
  // F(Q+eps V) - F(Q-eps V) summed as pointwise density differences, which
  // keeps the large common part of F out of the cancellation.
  long double diff = 0.0L;
  for (std::size_t p = 0; p < Q.grid->points(); ++p) {
    const Mat3 q = fq.Q_at(p);
    const Mat3 v = fv.Q_at(p);
    const GradQ dq = fq.gradQ_at(p);
    const GradQ dv = fv.gradQ_at(p);
    GradQ plus, minus;
    for (int g = 0; g < 3; ++g) {
      plus.d[g] = dq.d[g] + eps * dv.d[g];
      minus.d[g] = dq.d[g] - eps * dv.d[g];
    }
    diff += free_energy_density(q + eps * v, plus, params) - free_energy_density(q - eps * v, minus, params);
  }
  DirectionalCheck c;
  c.finite_difference = static_cast<double>(diff) * Q.grid->cell_volume() / (2.0 * eps);
  c.pairing = -pair(molecular_field(Q, params), V);
  return c;
}

double variational_consistency(const QTensorField& Q, const ModelParams& params, double eps,
                               int directions, std::uint64_t seed) {
  const SpectralGrid& g = *Q.grid;
  const int kmax = std::min({4, g.cutoff(0), g.cutoff(1), g.cutoff(2)});
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    const QTensorField V = random_traceless_q(Q.grid, 1.0, 1.0, seed + 7919 * d, kmax);
    worst = std::max(worst, directional_check(Q, V, params, eps).mismatch());
  }
  return worst;
}

}  // namespace besim
