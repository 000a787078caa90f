#include "besim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "kinematics.hpp"

namespace besim {

using detail::Modes;
using detail::SpectralState;

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::imex: return "imex";
    case Scheme::imex_picard: return "imex-picard";
    case Scheme::rk4: return "rk4";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "imex") return Scheme::imex;
  if (name == "imex-picard") return Scheme::imex_picard;
  if (name == "rk4") return Scheme::rk4;
  throw Error(ErrorKind::configuration,
              "unknown scheme '" + std::string(name) + "' (expected imex, imex-picard or rk4)");
}

const StepConfig& StepConfig::validated() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(dt)) throw Error(ErrorKind::configuration, "dt must be positive and finite");
  if (!positive(picard_tol)) throw Error(ErrorKind::configuration, "picard_tol must be positive");
  if (picard_max_iter < 1) throw Error(ErrorKind::configuration, "picard_max_iter must be at least 1");
  if (!positive(cfl_limit)) throw Error(ErrorKind::configuration, "cfl_limit must be positive");
  return *this;
}

DivergedIteration::DivergedIteration(const std::string& message, PicardTrace trace)
    : Error(ErrorKind::diverged_iteration, message), trace_(std::move(trace)) {}

namespace {

struct SpectralRates {
  std::array<Modes, 6> Q;
  std::array<Modes, 3> u;

  static SpectralRates zeros(const SpectralGrid& g) {
    SpectralRates r;
    for (auto& c : r.Q) c.assign(g.modes(), Complex{});
    for (auto& c : r.u) c.assign(g.modes(), Complex{});
    return r;
  }
};

bool finite(const Mat3& m) {
  for (double v : m.a)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_finite(const Mat3& m, const char* term) {
  if (!finite(m)) throw Error(ErrorKind::numerical_state, std::string("non-finite value in ") + term);
}

// Everything except the stiff diffusion and the linear lower-order terms:
// the products of the model, each formed pointwise and dealiased.
SpectralRates nonlinear_rates(const SpectralState& s, const ModelParams& prm) {
  const SpectralGrid& g = *s.grid;
  const std::size_t n = g.points();
  const detail::PhysicalFields f = detail::physical_fields(s);
  const double xi23 = 2.0 * prm.xi / 3.0;

  std::array<std::vector<double>, 6> nq;
  std::array<std::vector<double>, 9> stress;
  std::array<std::vector<double>, 3> conv;
  for (auto& c : nq) c.resize(n);
  for (auto& c : stress) c.resize(n);
  for (auto& c : conv) c.resize(n);

  for (std::size_t p = 0; p < n; ++p) {
    const Mat3 Q = f.Q_at(p);
    const Mat3 lapQ = f.lapQ_at(p);
    const GradQ dQ = f.gradQ_at(p);
    const GradTensor gu = f.gradu_at(p);
    const auto u = f.u_at(p);

    const Mat3 bulk = bulk_term(Q, prm.b, prm.c);
    require_finite(bulk, "bulk_term");
    const Mat3 H = molecular_field(Q, lapQ, prm);
    require_finite(H, "molecular_field");
    const Mat3 S = advection_tensor(gu, Q, prm.xi);
    require_finite(S, "advection_tensor");
    const Mat3 D = strain_rotation(gu).D;
    const Mat3 adv = u[0] * dQ.d[0] + u[1] * dQ.d[1] + u[2] * dQ.d[2];
    require_finite(adv, "convection of Q");

    const Mat3 rq = S - xi23 * D + prm.Gamma * bulk - adv;
    for (int c = 0; c < 6; ++c) nq[c][p] = rq(kQEntries[c].first, kQEntries[c].second);

    const Mat3 tau = stress_tau(Q, H, dQ, prm);
    require_finite(tau, "stress_tau");
    // QH - HQ: the bulk part of H commutes with Q, leaving L (Q Lap Q - Lap Q Q).
    const Mat3 sigma = prm.L * stress_sigma(Q, lapQ);
    require_finite(sigma, "stress_sigma");
    const Mat3 T = tau + sigma + xi23 * (prm.L * lapQ - prm.a * Q);
    for (int k = 0; k < 9; ++k) stress[k][p] = T.a[k];

    for (int a = 0; a < 3; ++a) {
      conv[a][p] = u[0] * gu.value(a, 0) + u[1] * gu.value(a, 1) + u[2] * gu.value(a, 2);
      if (!std::isfinite(conv[a][p]))
        throw Error(ErrorKind::numerical_state, "non-finite value in convection of u");
    }
  }

  SpectralRates r = SpectralRates::zeros(g);
  for (int c = 0; c < 6; ++c) {
    spectral::forward_into(g, nq[c], r.Q[c]);
    spectral::dealias_inplace(g, r.Q[c]);
  }
  Modes hat(g.modes());
  for (int a = 0; a < 3; ++a) {
    spectral::forward_into(g, conv[a], r.u[a]);
    for (Complex& z : r.u[a]) z = -z;
    for (int b = 0; b < 3; ++b) {
      spectral::forward_into(g, stress[3 * a + b], hat);
      const auto kb = g.derivative_wavenumber(b);
      for (std::size_t m = 0; m < hat.size(); ++m) r.u[a][m] += Complex(0.0, kb[m]) * hat[m];
    }
    spectral::dealias_inplace(g, r.u[a]);
  }
  spectral::leray_inplace(g, {r.u[0], r.u[1], r.u[2]});
  return r;
}

// scale * (linear, non-stiff rates): -Gamma a Q + (2 xi/3) D for Q, and the
// divergence of the linear stress -(2 xi/3)(L Lap Q - a Q) for u.
void add_linear(const SpectralState& s, const ModelParams& prm, double scale, SpectralRates& r) {
  const SpectralGrid& g = *s.grid;
  const double xi23 = 2.0 * prm.xi / 3.0;
  const std::array<std::span<const double>, 3> k{g.derivative_wavenumber(0), g.derivative_wavenumber(1),
                                                 g.derivative_wavenumber(2)};
  const auto k2 = g.k_squared();
  const Complex I(0.0, 1.0);
  std::array<Complex, 3> du{};
  for (std::size_t m = 0; m < g.modes(); ++m) {
    for (int c = 0; c < 6; ++c) {
      const auto [i, j] = kQEntries[c];
      const Complex D = 0.5 * I * (k[j][m] * s.u[i][m] + k[i][m] * s.u[j][m]);
      r.Q[c][m] += scale * (-prm.Gamma * prm.a * s.Q[c][m] + xi23 * D);
    }
    const double w = xi23 * (prm.L * k2[m] + prm.a);
    for (int a = 0; a < 3; ++a) {
      Complex acc = 0.0;
      for (int b = 0; b < 3; ++b) acc += k[b][m] * detail::q_entry(s, a, b)[m];
      du[a] = scale * I * w * acc;
    }
    const double kk = k[0][m] * k[0][m] + k[1][m] * k[1][m] + k[2][m] * k[2][m];
    if (kk > 0.0) {
      const Complex proj = (k[0][m] * du[0] + k[1][m] * du[1] + k[2][m] * du[2]) / kk;
      for (int a = 0; a < 3; ++a) du[a] -= k[a][m] * proj;
    }
    for (int a = 0; a < 3; ++a) r.u[a][m] += du[a];
  }
}

void add_stiff(const SpectralState& s, const ModelParams& prm, SpectralRates& r) {
  const auto k2 = s.grid->k_squared();
  for (std::size_t m = 0; m < s.grid->modes(); ++m) {
    for (int c = 0; c < 6; ++c) r.Q[c][m] -= prm.Gamma * prm.L * k2[m] * s.Q[c][m];
    for (int a = 0; a < 3; ++a) r.u[a][m] -= prm.mu * k2[m] * s.u[a][m];
  }
}

SpectralRates full_rates(const SpectralState& s, const ModelParams& prm) {
  SpectralRates r = nonlinear_rates(s, prm);
  add_linear(s, prm, 1.0, r);
  add_stiff(s, prm, r);
  return r;
}

SpectralState axpy(const SpectralState& x, double h, const SpectralRates& r) {
  SpectralState y = x;
  for (int c = 0; c < 6; ++c)
    for (std::size_t m = 0; m < y.Q[c].size(); ++m) y.Q[c][m] += h * r.Q[c][m];
  for (int c = 0; c < 3; ++c)
    for (std::size_t m = 0; m < y.u[c].size(); ++m) y.u[c][m] += h * r.u[c][m];
  return y;
}

// (I - dt L)^{-1} applied in place: per-mode division by 1 + dt Gamma L |k|^2
// for Q and 1 + dt mu |k|^2 for u.
void implicit_solve(SpectralState& x, const ModelParams& prm, double dt) {
  const auto k2 = x.grid->k_squared();
  for (std::size_t m = 0; m < x.grid->modes(); ++m) {
    const double dq = 1.0 + dt * prm.Gamma * prm.L * k2[m];
    const double du = 1.0 + dt * prm.mu * k2[m];
    for (int c = 0; c < 6; ++c) x.Q[c][m] /= dq;
    for (int a = 0; a < 3; ++a) x.u[a][m] /= du;
  }
}

double distance(const SpectralState& x, const SpectralState& y) {
  SpectralState d = x;
  for (int c = 0; c < 6; ++c)
    for (std::size_t m = 0; m < d.Q[c].size(); ++m) d.Q[c][m] -= y.Q[c][m];
  for (int c = 0; c < 3; ++c)
    for (std::size_t m = 0; m < d.u[c].size(); ++m) d.u[c][m] -= y.u[c][m];
  return std::sqrt(detail::q_l2_squared(*d.grid, d.Q)) + std::sqrt(detail::u_l2_squared(*d.grid, d.u));
}

void check_cfl(const StateSnapshot& state, const StepConfig& cfg) {
  const double limit = cfl_dt(state.u, cfg.cfl_limit);
  if (cfg.dt > limit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "CFL limit exceeded at t=%.17g: dt=%.17g, largest allowed dt=%.17g",
                  state.time, cfg.dt, limit);
    throw StepRejected(buf, limit);
  }
}

SpectralState prepare(const StateSnapshot& state, const StepConfig& cfg) {
  cfg.validated();
  state.params.validated();
  check_cfl(state, cfg);
  return detail::to_spectral(state, true);
}

}  // namespace

double cfl_dt(const VelocityField& u, double cfl_limit) {
  double umax = 0.0;
  for (std::size_t p = 0; p < u.grid->points(); ++p) {
    const double m = std::sqrt(u.comps[0][p] * u.comps[0][p] + u.comps[1][p] * u.comps[1][p] +
                               u.comps[2][p] * u.comps[2][p]);
    if (!std::isfinite(m)) throw Error(ErrorKind::numerical_state, "non-finite velocity");
    umax = std::max(umax, m);
  }
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfl_limit * u.grid->min_spacing() / umax;
}

Rates rhs_full(const StateSnapshot& state) {
  state.params.validated();
  const SpectralState s = detail::to_spectral(state, true);
  const SpectralRates r = full_rates(s, state.params);
  SpectralState packed{s.grid, r.Q, r.u};
  StateSnapshot out = detail::to_snapshot(packed, state.time, state.params);
  return {std::move(out.Q), std::move(out.u)};
}

StateSnapshot step_imex(const StateSnapshot& state, const StepConfig& cfg) {
  const SpectralState s = prepare(state, cfg);
  SpectralRates r = nonlinear_rates(s, state.params);
  add_linear(s, state.params, 1.0, r);
  SpectralState next = axpy(s, cfg.dt, r);
  implicit_solve(next, state.params, cfg.dt);
  detail::project_spectral(next);
  return detail::to_snapshot(next, state.time + cfg.dt, state.params);
}

StateSnapshot step_imex_picard(const StateSnapshot& state, const StepConfig& cfg, PicardTrace* trace) {
  const SpectralState s = prepare(state, cfg);
  const ModelParams& prm = state.params;
  SpectralRates lin = SpectralRates::zeros(*s.grid);
  add_linear(s, prm, 1.0, lin);
  const SpectralState base = axpy(s, cfg.dt, lin);

  auto phi = [&](const SpectralState& y) {
    SpectralState x = axpy(base, cfg.dt, nonlinear_rates(y, prm));
    implicit_solve(x, prm, cfg.dt);
    detail::project_spectral(x);
    return x;
  };

  PicardTrace local;
  SpectralState current = phi(s);
  for (int k = 0; k < cfg.picard_max_iter; ++k) {
    SpectralState next = phi(current);
    const double res = distance(next, current);
    local.residuals.push_back(res);
    current = std::move(next);
    if (!std::isfinite(res)) break;
    if (res <= cfg.picard_tol) {
      local.converged = true;
      break;
    }
  }
  if (trace) *trace = local;
  if (!local.converged) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "Picard iteration did not converge at t=%.17g after %zu iterations (last residual %.3e, tol %.3e)",
                  state.time, local.residuals.size(), local.residuals.back(), cfg.picard_tol);
    throw DivergedIteration(buf, std::move(local));
  }
  return detail::to_snapshot(current, state.time + cfg.dt, prm);
}

StateSnapshot step_rk4(const StateSnapshot& state, const StepConfig& cfg) {
  const SpectralState s = prepare(state, cfg);
  const ModelParams& prm = state.params;
  const double h = cfg.dt;
  const SpectralRates k1 = full_rates(s, prm);
  const SpectralRates k2 = full_rates(axpy(s, 0.5 * h, k1), prm);
  const SpectralRates k3 = full_rates(axpy(s, 0.5 * h, k2), prm);
  const SpectralRates k4 = full_rates(axpy(s, h, k3), prm);
  SpectralState next = s;
  for (int c = 0; c < 6; ++c)
    for (std::size_t m = 0; m < next.Q[c].size(); ++m)
      next.Q[c][m] += h / 6.0 * (k1.Q[c][m] + 2.0 * k2.Q[c][m] + 2.0 * k3.Q[c][m] + k4.Q[c][m]);
  for (int c = 0; c < 3; ++c)
    for (std::size_t m = 0; m < next.u[c].size(); ++m)
      next.u[c][m] += h / 6.0 * (k1.u[c][m] + 2.0 * k2.u[c][m] + 2.0 * k3.u[c][m] + k4.u[c][m]);
  detail::project_spectral(next);
  return detail::to_snapshot(next, state.time + h, prm);
}

StateSnapshot step(const StateSnapshot& state, const StepConfig& cfg, PicardTrace* trace) {
  switch (cfg.scheme) {
    case Scheme::imex: return step_imex(state, cfg);
    case Scheme::imex_picard: return step_imex_picard(state, cfg, trace);
    case Scheme::rk4: return step_rk4(state, cfg);
  }
  throw Error(ErrorKind::configuration, "unknown scheme");
}

namespace {

void notify(const std::vector<Observer>& observers, const StateSnapshot& state, const StepInfo& info) {
  for (const auto& obs : observers) {
    try {
      obs(state, info);
    } catch (const Error& e) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "observer failed at step %ld (t=%.17g): ", info.index, state.time);
      throw Error(e.kind(), buf + std::string(e.what()));
    } catch (const std::exception& e) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "observer failed at step %ld (t=%.17g): ", info.index, state.time);
      throw Error(ErrorKind::input, buf + std::string(e.what()));
    }
  }
}

}  // namespace

StateSnapshot integrate(StateSnapshot state, const StepConfig& cfg, double t_end,
                        const std::vector<Observer>& observers) {
  cfg.validated();
  if (!(t_end >= state.time))
    throw Error(ErrorKind::input, "integrate: t_end precedes the state time");
  notify(observers, state, {0, 0.0, nullptr});
  const double t0 = state.time;
  StepConfig local = cfg;
  PicardTrace trace;
  for (long n = 1;; ++n) {
    const double remaining = t_end - state.time;
    if (remaining <= 1e-10 * cfg.dt) break;
    const bool last = remaining <= cfg.dt * (1.0 + 1e-10);
    // A final step within rounding of dt keeps dt exactly so split runs match.
    local.dt = last && std::abs(remaining - cfg.dt) > 1e-10 * cfg.dt ? remaining : cfg.dt;
    state = step(state, local, &trace);
    // Times are t0 + n dt rather than a running sum so restarts line up.
    state.time = last ? t_end : t0 + static_cast<double>(n) * cfg.dt;
    notify(observers, state, {n, local.dt, cfg.scheme == Scheme::imex_picard ? &trace : nullptr});
    if (last) break;
  }
  return state;
}

}  // namespace besim
