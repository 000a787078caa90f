#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "besim/error.hpp"
#include "besim/experiments.hpp"
#include "besim/spectral.hpp"
#include "support.hpp"

using namespace besim;
using namespace testing;
using Catch::Matchers::ContainsSubstring;

namespace {

const ModelParams kFull = params(1, 1, 1, 1, 1, 1, 0.5);
const ModelParams kLinear = params(1, 0, 0, 1, 1, 1, 0);

StateSnapshot smooth_state(const GridPtr& g, const ModelParams& p, std::uint64_t seed, double amp) {
  StateSnapshot s{0.0, random_traceless_q(g, 1.0, amp, seed, 3), random_solenoidal_velocity(g, 1.0, amp, seed + 1, 3), p};
  return project_constraints(s);
}

StepConfig cfg_of(Scheme s, double dt) {
  StepConfig c;
  c.scheme = s;
  c.dt = dt;
  return c;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no besim::Error thrown");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("difference functional against closed forms") {
  const auto g = make_grid({8, 8, 8});
  const auto a = smooth_state(g, kFull, 1, 0.3);
  CHECK(difference_functional(a, a, 1.3) == 0.0);

  // R - Q = c sin(x1)(E12 + E21), v - u = w (0, sin x1, 0).
  StateSnapshot b = a;
  const double c = 0.2, w = 0.5, L = 1.3;
  for (std::size_t i = 0; i < g->points(); ++i) {
    const double s = std::sin(g->coordinate(i)[0]);
    b.Q.comps[1][i] += c * s;
    b.u.comps[1][i] += w * s;
  }
  const double V = g->volume();
  CHECK(difference_functional(a, b, L) == Catch::Approx(w * w * V / 2 + c * c * V + L * c * c * V).epsilon(1e-13));
}

TEST_CASE("Gronwall integrand: range and zero states") {
  const auto g = make_grid({8, 8, 8});
  const auto z = StateSnapshot::zeros(g, kFull);
  for (double p : {2.0, 6.0, 1.0, 7.0}) CHECK(kind_of([&] { gronwall_integrand(z, z, p); }) == ErrorKind::serrin_range);
  // Constant floors: one from each of N1..N5 and two from the l = 0 term of N7.
  CHECK(gronwall_integrand(z, z, 4.0) == 7.0);
  const auto a = smooth_state(g, kFull, 2, 0.3);
  const double A = gronwall_integrand(a, a, 3.0);
  CHECK(std::isfinite(A));
  CHECK(A > 0.0);
}

TEST_CASE("twin run with identical configs has a vanishing functional") {
  const auto g = make_grid({12, 12, 12});
  const auto ic = smooth_state(g, kFull, 3, 0.3);
  const auto cfg = cfg_of(Scheme::imex, 2e-3);
  const auto rep = twin_run(ic, cfg, cfg, 0.02, 4.0);
  REQUIRE(rep.times.size() == 11);
  for (double q : rep.q_functional) CHECK(q <= 1e-14);
  CHECK(rep.q_functional.front() == 0.0);
  CHECK(rep.gronwall_integrand.size() == rep.times.size());
  CHECK(rep.serrin_lap_q.samples.size() == rep.times.size());
  // Serrin norms of the strong run are monotone in T.
  for (std::size_t i = 1; i < rep.serrin_lap_q.samples.size(); ++i)
    CHECK(rep.serrin_lap_q.samples[i].first > rep.serrin_lap_q.samples[i - 1].first);
}

TEST_CASE("twin run from zero data stays zero") {
  const auto g = make_grid({8, 8, 8});
  const auto rep = twin_run(StateSnapshot::zeros(g, kFull), cfg_of(Scheme::rk4, 1e-2), cfg_of(Scheme::imex, 1e-2), 0.05, 3.0);
  for (double q : rep.q_functional) CHECK(q == 0.0);
  for (double A : rep.gronwall_integrand) CHECK(A == 7.0);
  CHECK(rep.serrin_lap_q.norm() == 0.0);
  CHECK(rep.serrin_grad_u.norm() == 0.0);
}

TEST_CASE("twin run RK4 vs IMEX shrinks about 4x per dt halving") {
  const auto g = make_grid({12, 12, 12});
  const auto ic = smooth_state(g, kFull, 4, 0.2);
  std::vector<double> q;
  for (double dt : {4e-3, 2e-3, 1e-3}) q.push_back(twin_run(ic, cfg_of(Scheme::rk4, dt), cfg_of(Scheme::imex, dt), 0.08, 4.0).q_functional.back());
  CHECK(q[0] / q[1] >= 3.0);
  CHECK(q[0] / q[1] <= 5.0);
  CHECK(q[1] / q[2] >= 3.0);
  CHECK(q[1] / q[2] <= 5.0);
}

TEST_CASE("twin run is independent of the worker count") {
  const auto g = make_grid({8, 8, 8});
  const auto ic = smooth_state(g, kFull, 5, 0.3);
  const auto a = twin_run(ic, cfg_of(Scheme::rk4, 2e-3), cfg_of(Scheme::imex_picard, 2e-3), 0.02, 3.0, 1);
  const auto b = twin_run(ic, cfg_of(Scheme::rk4, 2e-3), cfg_of(Scheme::imex_picard, 2e-3), 0.02, 3.0, 2);
  CHECK(a.q_functional == b.q_functional);
  CHECK(a.gronwall_integrand == b.gronwall_integrand);
}

TEST_CASE("twin run errors carry the run label and grid checks") {
  const auto g = make_grid({8, 8, 8});
  const auto h = make_grid({8, 8, 12});
  const auto ic = smooth_state(g, kFull, 6, 0.5);
  CHECK(kind_of([&] { twin_run(ic, StateSnapshot::zeros(h, kFull), cfg_of(Scheme::rk4, 1e-3), cfg_of(Scheme::rk4, 1e-3), 0.01, 3.0); }) ==
        ErrorKind::configuration);
  try {
    twin_run(ic, cfg_of(Scheme::rk4, 1e-3), cfg_of(Scheme::rk4, 5.0), 1.0, 3.0);
    FAIL("expected a step rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::step_rejected);
    CHECK_THAT(e.what(), ContainsSubstring("run B"));
  }
}

TEST_CASE("Gronwall check: degenerate for delta = 0") {
  const auto g = make_grid({8, 8, 8});
  const auto ic = smooth_state(g, kFull, 7, 0.3);
  const auto rep = twin_run(ic, cfg_of(Scheme::rk4, 2e-3), cfg_of(Scheme::rk4, 2e-3), 0.01, 3.0);
  const auto chk = gronwall_envelope_check(rep, rep);
  CHECK(chk.degenerate);
  CHECK(gronwall_fit(rep).degenerate);
}

TEST_CASE("Gronwall check: linear single-mode difference decays in closed form with C = 0") {
  const auto g = make_grid({8, 8, 8});
  const StateSnapshot zero = StateSnapshot::zeros(g, kLinear);
  auto mode = [&](double delta) {
    StateSnapshot s = zero;
    for (std::size_t i = 0; i < g->points(); ++i) s.Q.comps[1][i] = delta * std::sin(g->coordinate(i)[0] + g->coordinate(i)[1]);
    return s;
  };
  const double lambda = kLinear.Gamma * (kLinear.L * 2.0 + kLinear.a);
  const auto cfg = cfg_of(Scheme::rk4, 1e-3);
  const auto rep = twin_run(zero, mode(1e-2), cfg, cfg, 0.1, 3.0);
  const auto half = twin_run(zero, mode(5e-3), cfg, cfg, 0.1, 3.0);
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    CHECK(rep.q_functional[i] == Catch::Approx(rep.q_functional[0] * std::exp(-2 * lambda * rep.times[i])).epsilon(1e-10));
  const auto chk = gronwall_envelope_check(rep, half);
  CHECK_FALSE(chk.degenerate);
  CHECK(chk.fit.C == 0.0);
  CHECK(chk.stable);
}

TEST_CASE("Gronwall constant is stable under halving the perturbation") {
  const auto g = make_grid({12, 12, 12});
  const auto ic = smooth_state(g, kFull, 8, 0.5);
  auto perturbed = [&](double d) {
    StateSnapshot s = ic;
    const auto dq = random_traceless_q(g, 1.0, 1.0, 99, 3);
    const auto du = random_solenoidal_velocity(g, 1.0, 1.0, 100, 3);
    for (int c = 0; c < 6; ++c)
      for (std::size_t i = 0; i < g->points(); ++i) s.Q.comps[c][i] += d * dq.comps[c][i];
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < g->points(); ++i) s.u.comps[c][i] += d * du.comps[c][i];
    return project_constraints(s);
  };
  const auto cfg = cfg_of(Scheme::rk4, 2e-3);
  const auto rep = twin_run(ic, perturbed(1e-3), cfg, cfg, 0.05, 4.0);
  const auto half = twin_run(ic, perturbed(5e-4), cfg, cfg, 0.05, 4.0);
  const auto chk = gronwall_envelope_check(rep, half);
  CHECK_FALSE(chk.degenerate);
  CHECK(chk.relative_change < 0.2);
  CHECK(chk.stable);
  // The fitted envelope bounds every sample.
  double integral = 0.0;
  for (std::size_t i = 1; i < rep.times.size(); ++i) {
    integral += 0.5 * (rep.times[i] - rep.times[i - 1]) * (rep.gronwall_integrand[i] + rep.gronwall_integrand[i - 1]);
    CHECK(rep.q_functional[i] <= rep.q_functional[0] * std::exp(chk.fit.C * integral) * (1 + 1e-12));
  }
}

TEST_CASE("small-data decay: hypothesis and zero amplitude") {
  const auto g = make_grid({8, 8, 8});
  ModelParams p = kFull;
  const auto base = decay_base_state(g, p, 1);
  p.a = 0.0;
  try {
    small_data_decay(base, {1e-3}, p, 2.0, 0.01, cfg_of(Scheme::imex, 1e-3));
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
    CHECK_THAT(e.what(), ContainsSubstring("a > 0"));
  }
  p.a = 1.0;
  const auto sw = small_data_decay(base, {0.0}, p, 2.0, 0.02, cfg_of(Scheme::imex, 2e-3));
  REQUIRE(sw.reports.size() == 1);
  for (double e : sw.reports[0].E) CHECK(e == 0.0);
  CHECK(sw.reports[0].monotone_violations == 0);
  CHECK(sw.largest_clean_amplitude == 0.0);
}

TEST_CASE("small-data decay: tiny data decays, large data is recorded") {
  const auto g = make_grid({16, 16, 16});
  const ModelParams p = params(1, 1, 1, 1, 1, 1, 1);
  const auto base = decay_base_state(g, p, 2);
  const auto sw = small_data_decay(base, {1e-3, 1e3}, p, 2.0, 0.1, cfg_of(Scheme::imex, 2e-3));
  REQUIRE(sw.reports.size() == 2);
  const auto& small = sw.reports[0];
  CHECK(small.E.front() == Catch::Approx(1e-6).epsilon(1e-12));
  CHECK(small.monotone_violations == 0);
  CHECK_FALSE(small.failed);
  CHECK(small.E.back() < small.E.front());
  const auto& big = sw.reports[1];
  CHECK((big.failed || big.monotone_violations > 0));
  CHECK(sw.largest_clean_amplitude == 1e-3);
}

TEST_CASE("small-data decay of a pure Q state matches mode-wise exponential decay") {
  const auto g = make_grid({16, 16, 16});
  const ModelParams p = params(1, 0, 0, 1, 1, 1, 0);
  StateSnapshot base = decay_base_state(g, p, 3);
  base.u = VelocityField::zeros(g);
  const double T = 0.05;
  const auto sw = small_data_decay(base, {1e-2}, p, 2.0, T, cfg_of(Scheme::rk4, 2.5e-4));
  const auto& rep = sw.reports[0];
  CHECK(rep.monotone_violations == 0);

  // Oracle: damp each Fourier mode of the initial Q by exp(-Gamma (L|k|^2 + a) t).
  const double scale = 1e-2 / std::sqrt(sobolev_energies(base, 2.0).E);
  std::array<SpectralField, 6> modes;
  for (int c = 0; c < 6; ++c) {
    std::vector<double> v = base.Q.comps[c];
    for (double& x : v) x *= scale;
    modes[c] = forward(g, v);
  }
  const auto k2 = g->k_squared();
  for (std::size_t i = 0; i < rep.times.size(); i += 20) {
    StateSnapshot s = StateSnapshot::zeros(g, p);
    for (int c = 0; c < 6; ++c) {
      SpectralField m = modes[c];
      for (std::size_t j = 0; j < g->modes(); ++j) m.modes[j] *= std::exp(-p.Gamma * (p.L * k2[j] + p.a) * rep.times[i]);
      s.Q.comps[c] = inverse(m).values;
    }
    const double expect = sobolev_energies(s, 2.0).E;
    CHECK(std::abs(rep.E[i] - expect) <= 1e-8 * expect);
    if (i > 0) CHECK(rep.E[i] < rep.E[i - 1]);
  }
}

TEST_CASE("equality study: ladder check, zero data, orders and grid saturation") {
  const ModelParams lin = params(1, 0, 0, 1, 1, 1, 0);
  auto zero = [&](const GridPtr& g) { return StateSnapshot::zeros(g, lin); };
  const StepConfig base = cfg_of(Scheme::rk4, 1e-3);
  CHECK(kind_of([&] { equality_convergence_study(zero, base, {1e-2, 5e-3}, {{8, 8, 8}}, 0.05); }) == ErrorKind::configuration);

  for (const auto& row : equality_convergence_study(zero, base, {1e-2, 5e-3, 2.5e-3}, {{8, 8, 8}}, 0.05)) CHECK(row.residual == 0.0);

  auto smooth = [&](const GridPtr& g) {
    StateSnapshot s{0.0, random_traceless_q(g, 1.0, 0.3, 11, 2), random_solenoidal_velocity(g, 1.0, 0.3, 12, 2), kFull};
    return project_constraints(s);
  };
  const auto rows = equality_convergence_study(smooth, base, {4e-3, 2e-3, 1e-3}, {{12, 12, 12}, {16, 16, 16}}, 0.1);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows)
    if (r.order != 0.0) CHECK(r.order >= 1.9);
  for (std::size_t i = 3; i < 6; ++i) CHECK(rows[i].grid_change <= 0.01);

  auto linear = [&](const GridPtr& g) {
    StateSnapshot s{0.0, random_traceless_q(g, 1.0, 0.3, 13, 2), VelocityField::zeros(g), lin};
    return project_constraints(s);
  };
  const auto lrows = equality_convergence_study(linear, base, {4e-3, 2e-3, 1e-3}, {{12, 12, 12}}, 0.1);
  CHECK(lrows[1].order >= 1.9);
  CHECK(lrows[2].order >= 1.9);
}
