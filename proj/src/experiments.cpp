#include "besim/experiments.hpp"

#include <cmath>
#include <future>
#include <string>

#include "kinematics.hpp"

namespace besim {

namespace {

StateSnapshot difference(const StateSnapshot& a, const StateSnapshot& b) {
  require_same_grid(*a.grid(), *b.grid(), "twin difference");
  StateSnapshot d = b;
  for (int c = 0; c < 6; ++c)
    for (std::size_t p = 0; p < d.Q.comps[c].size(); ++p) d.Q.comps[c][p] -= a.Q.comps[c][p];
  for (int c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < d.u.comps[c].size(); ++p) d.u.comps[c][p] -= a.u.comps[c][p];
  return d;
}

double grad_l2_squared(const QTensorField& Q) {
  // ||grad Q||^2 = ||Q||_H1^2 - ||Q||^2 with Bessel weights
  return sobolev_norm_squared(Q, 1.0) - sobolev_norm_squared(Q, 0.0);
}

}  // namespace

double difference_functional(const StateSnapshot& a, const StateSnapshot& b, double L) {
  const StateSnapshot d = difference(a, b);
  return sobolev_norm_squared(d.u, 0.0) + sobolev_norm_squared(d.Q, 0.0) + L * grad_l2_squared(d.Q);
}

double gronwall_integrand(const StateSnapshot& strong, const StateSnapshot& other, double p) {
  if (!(p > 2.0 && p < 6.0))
    throw Error(ErrorKind::serrin_range, "the Gronwall integrand needs 2 < p < 6, got p = " + std::to_string(p));
  const double r = 4.0 * p / (3.0 * p - 6.0);
  const double e = (10.0 * p - 12.0) / (6.0 - p);

  const double u = std::sqrt(sobolev_norm_squared(strong.u, 0.0));
  const double u_h1_2 = sobolev_norm_squared(strong.u, 1.0);
  const SerrinSamples lp = serrin_samples(strong, p);
  const double gu_r = std::pow(lp.grad_u, r);
  const double lq_r = std::pow(lp.lap_q, r);
  const double q1 = std::sqrt(sobolev_norm_squared(strong.Q, 1.0));
  const double q2_2 = sobolev_norm_squared(strong.Q, 2.0);
  const double r1 = std::sqrt(sobolev_norm_squared(other.Q, 1.0));
  const double r2_2 = sobolev_norm_squared(other.Q, 2.0);
  const double u_gu = std::pow(u, r) * gu_r;

  const double n1 = 1.0 + u_gu;
  const double n2 = 1.0 + q2_2 + u_gu + lq_r;
  const double n3 = 1.0 + q2_2 + gu_r + lq_r;
  const double n4 = 1.0 + u_h1_2 + q2_2 + gu_r + lq_r;
  const double n5 = 1.0 + std::pow(q1, 4) + std::pow(r1, 4);
  const double n6 = std::pow(r1, e) * r2_2 + std::pow(q1, e) * q2_2 + gu_r + lq_r;
  double sum_l = 0.0;
  for (int l = 0; l <= 2; ++l) sum_l += std::pow(q1, 2 * l) + std::pow(r1, 2 * l);
  const double n7 = sum_l * (1.0 + q2_2 + r2_2);
  const double n8 = (std::pow(q1, 4) + std::pow(r1, 4) + std::pow(q1, 6) + std::pow(r1, 6)) * (q2_2 + r2_2);
  return n1 + n2 + n3 + n4 + n5 + n6 + n7 + n8;
}

TwinRunReport twin_run(const StateSnapshot& ic_a, const StateSnapshot& ic_b, const StepConfig& cfg_a,
                       const StepConfig& cfg_b, double T, double p, int workers) {
  cfg_a.validated();
  cfg_b.validated();
  if (!ic_a.grid()->same_shape(*ic_b.grid()))
    throw Error(ErrorKind::configuration, "twin_run: the two initial states live on different grids");
  if (!(T >= ic_a.time)) throw Error(ErrorKind::input, "twin_run: T precedes the initial time");

  TwinRunReport rep;
  rep.serrin_lap_q.spec = SerrinSpec::make(p);
  rep.serrin_grad_u.spec = rep.serrin_lap_q.spec;
  const bool with_integrand = p > 2.0 && p < 6.0;
  const double L = ic_a.params.L;

  auto record = [&](const StateSnapshot& a, const StateSnapshot& b, double dt) {
    rep.times.push_back(a.time);
    rep.q_functional.push_back(difference_functional(a, b, L));
    if (with_integrand) rep.gronwall_integrand.push_back(gronwall_integrand(a, b, p));
    const SerrinSamples s = serrin_samples(a, p);
    rep.serrin_lap_q = serrin_norm(std::move(rep.serrin_lap_q), s.lap_q, dt);
    rep.serrin_grad_u = serrin_norm(std::move(rep.serrin_grad_u), s.grad_u, dt);
  };

  auto advance = [](const StateSnapshot& s, const StepConfig& cfg, double t, const char* label) {
    try {
      return integrate(s, cfg, t);
    } catch (const StepRejected& e) {
      throw StepRejected(std::string(label) + ": " + e.what(), e.suggested_dt());
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(label) + ": " + e.what());
    }
  };

  StateSnapshot a = ic_a;
  StateSnapshot b = ic_b;
  b.time = a.time;
  record(a, b, 0.0);
  const double delta = std::max(cfg_a.dt, cfg_b.dt);
  const double t0 = a.time;
  for (long k = 1;; ++k) {
    double target = t0 + static_cast<double>(k) * delta;
    const bool last = target >= T - 1e-10 * delta;
    if (last) target = T;
    if (workers >= 2) {
      auto fb = std::async(std::launch::async, advance, std::cref(b), std::cref(cfg_b), target, "run B");
      StateSnapshot na = advance(a, cfg_a, target, "run A");
      b = fb.get();
      a = std::move(na);
    } else {
      a = advance(a, cfg_a, target, "run A");
      b = advance(b, cfg_b, target, "run B");
    }
    record(a, b, rep.times.empty() ? 0.0 : a.time - rep.times.back());
    if (last) break;
  }
  return rep;
}

TwinRunReport twin_run(const StateSnapshot& ic, const StepConfig& cfg_a, const StepConfig& cfg_b,
                       double T, double p, int workers) {
  return twin_run(ic, ic, cfg_a, cfg_b, T, p, workers);
}

GronwallFit gronwall_fit(const TwinRunReport& report) {
  GronwallFit fit;
  const auto& q = report.q_functional;
  const auto& A = report.gronwall_integrand;
  if (q.size() < 3 || A.size() != q.size() || !(q.front() > 0.0)) return fit;
  fit.degenerate = false;
  double integral = 0.0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    integral += 0.5 * (report.times[i] - report.times[i - 1]) * (A[i] + A[i - 1]);
    if (!(q[i] > 0.0) || !(integral > 0.0)) continue;
    fit.C = std::max(fit.C, (std::log(q[i]) - std::log(q.front())) / integral);
  }
  return fit;
}

GronwallCheck gronwall_envelope_check(const TwinRunReport& report, const TwinRunReport& half_report) {
  GronwallCheck c;
  c.fit = gronwall_fit(report);
  c.fit_half = gronwall_fit(half_report);
  c.degenerate = c.fit.degenerate || c.fit_half.degenerate;
  if (c.degenerate) return c;
  const double scale = std::max(c.fit.C, c.fit_half.C);
  c.relative_change = scale == 0.0 ? 0.0 : std::abs(c.fit.C - c.fit_half.C) / scale;
  c.stable = c.relative_change < 0.2;
  return c;
}

StateSnapshot decay_base_state(const GridPtr& grid, const ModelParams& params, std::uint64_t seed) {
  const int kmax = std::min({4, grid->cutoff(0), grid->cutoff(1), grid->cutoff(2)});
  StateSnapshot s{0.0, random_traceless_q(grid, 2.0, 1.0, seed, kmax),
                  random_solenoidal_velocity(grid, 2.0, 1.0, seed + 1, kmax), params};
  return s;
}

DecaySweep small_data_decay(const StateSnapshot& base, const std::vector<double>& amplitudes,
                            const ModelParams& params, double s, double T, const StepConfig& cfg) {
  if (!(params.a > 0.0))
    throw Error(ErrorKind::configuration,
                "small-data decay requires a > 0 (the global existence result assumes a > 0)");
  params.validated();
  cfg.validated();
  StateSnapshot unit = base;
  unit.params = params;
  unit.time = 0.0;
  const double e0 = sobolev_energies(unit, s).E;
  if (!(e0 > 0.0) || !std::isfinite(e0))
    throw Error(ErrorKind::input, "small-data decay: the base state has zero Sobolev energy");
  const double norm = 1.0 / std::sqrt(e0);

  DecaySweep sweep;
  for (double alpha : amplitudes) {
    if (!(alpha >= 0.0)) throw Error(ErrorKind::input, "decay amplitudes must be nonnegative");
    DecayReport rep;
    rep.amplitude = alpha;
    StateSnapshot ic = unit;
    for (auto& c : ic.Q.comps)
      for (double& v : c) v *= alpha * norm;
    for (auto& c : ic.u.comps)
      for (double& v : c) v *= alpha * norm;
    auto observer = [&](const StateSnapshot& st, const StepInfo&) {
      const SobolevEnergies en = sobolev_energies(st, s);
      if (!rep.E.empty() && en.E - rep.E.back() > 1e-10 * rep.E.back()) ++rep.monotone_violations;
      rep.times.push_back(st.time);
      rep.E.push_back(en.E);
      rep.D.push_back(en.D);
    };
    try {
      integrate(ic, cfg, T, {observer});
    } catch (const Error& e) {
      rep.failed = true;
      rep.failure = e.what();
    }
    if (!rep.failed && rep.monotone_violations == 0 &&
        (!sweep.largest_clean_amplitude || alpha > *sweep.largest_clean_amplitude))
      sweep.largest_clean_amplitude = alpha;
    sweep.reports.push_back(std::move(rep));
  }
  return sweep;
}

std::vector<StudyRow> equality_convergence_study(const InitialCondition& ic, const StepConfig& base,
                                                 const std::vector<double>& dts,
                                                 const std::vector<std::array<int, 3>>& dims,
                                                 double T, std::array<double, 3> box) {
  if (dts.empty() || dims.empty() || (dts.size() < 3 && dims.size() < 3))
    throw Error(ErrorKind::configuration,
                "equality convergence study needs a dt ladder or a grid ladder of at least 3 entries");
  std::vector<StudyRow> rows;
  for (std::size_t g = 0; g < dims.size(); ++g) {
    const GridPtr grid = make_grid(dims[g], box);
    const StateSnapshot start = ic(grid);
    for (std::size_t i = 0; i < dts.size(); ++i) {
      StepConfig cfg = base;
      cfg.dt = dts[i];
      EnergyLedger ledger;
      integrate(start, cfg, T,
                {[&](const StateSnapshot& s, const StepInfo&) { ledger.add(s.time, energy_breakdown(s)); }});
      StudyRow row;
      row.dt = dts[i];
      row.dims = dims[g];
      row.residual = ledger.residual();
      if (i > 0) {
        const StudyRow& prev = rows[rows.size() - 1];
        if (prev.residual != 0.0 && row.residual != 0.0)
          row.order = std::log(std::abs(prev.residual / row.residual)) / std::log(prev.dt / row.dt);
      }
      if (g > 0) {
        const StudyRow& coarse = rows[rows.size() - dts.size()];
        const double sc = std::max(std::abs(coarse.residual), std::abs(row.residual));
        row.grid_change = sc == 0.0 ? 0.0 : std::abs(row.residual - coarse.residual) / sc;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace besim
