#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "besim/error.hpp"
#include "besim/integrator.hpp"
#include "besim/spectral.hpp"
#include "support.hpp"

using namespace besim;
using namespace testing;
using Catch::Matchers::ContainsSubstring;

namespace {

const Mat3 kQ0 = [] {
  Mat3 m = Mat3::diag(0.3, -0.1, -0.2);
  m(0, 1) = m(1, 0) = 0.05;
  m(1, 2) = m(2, 1) = 0.07;
  return m;
}();

// Q = Q0 cos(f.x) with u = 0.
StateSnapshot single_mode(const GridPtr& g, const ModelParams& p, std::array<int, 3> f) {
  StateSnapshot s = StateSnapshot::zeros(g, p);
  for (std::size_t i = 0; i < g->points(); ++i) {
    const auto x = g->coordinate(i);
    s.Q.set(i, std::cos(f[0] * x[0] + f[1] * x[1] + f[2] * x[2]) * kQ0);
  }
  return s;
}

StateSnapshot smooth_state(const GridPtr& g, const ModelParams& p, std::uint64_t seed, double amp) {
  StateSnapshot s{0.0, random_traceless_q(g, 1.0, amp, seed, 3), random_solenoidal_velocity(g, 1.0, amp, seed + 1, 3), p};
  return project_constraints(s);
}

double state_diff(const StateSnapshot& a, const StateSnapshot& b) {
  double m = 0.0;
  for (int c = 0; c < 6; ++c) m = std::max(m, max_diff(a.Q.comps[c], b.Q.comps[c]));
  for (int c = 0; c < 3; ++c) m = std::max(m, max_diff(a.u.comps[c], b.u.comps[c]));
  return m;
}

bool bit_equal(const StateSnapshot& a, const StateSnapshot& b) {
  return a.time == b.time && a.Q.comps == b.Q.comps && a.u.comps == b.u.comps;
}

// X + h*rate, for Richardson checks.
double euler_gap(const StateSnapshot& stepped, const StateSnapshot& s, const Rates& r, double h) {
  double m = 0.0;
  for (int c = 0; c < 6; ++c)
    for (std::size_t p = 0; p < s.Q.comps[c].size(); ++p)
      m = std::max(m, std::abs(stepped.Q.comps[c][p] - s.Q.comps[c][p] - h * r.dQ.comps[c][p]));
  for (int c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < s.u.comps[c].size(); ++p)
      m = std::max(m, std::abs(stepped.u.comps[c][p] - s.u.comps[c][p] - h * r.du.comps[c][p]));
  return m;
}

const ModelParams kFull = params(1, 1, 1, 1, 1, 1, 0.5);
const ModelParams kLinear = params(1, 0, 0, 1, 1, 1, 0);

}  // namespace

TEST_CASE("scheme names roundtrip and bad names are rejected") {
  for (Scheme s : {Scheme::imex, Scheme::imex_picard, Scheme::rk4}) CHECK(parse_scheme(to_string(s)) == s);
  CHECK(to_string(Scheme::imex_picard) == "imex-picard");
  CHECK_THROWS_AS(parse_scheme("euler"), Error);
}

TEST_CASE("step config validation") {
  StepConfig c;
  CHECK(c.picard_tol == 1e-10);
  CHECK(c.picard_max_iter == 50);
  CHECK(c.cfl_limit == 0.5);
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validated(), Error);
  c.dt = 1e-3;
  c.picard_tol = -1;
  CHECK_THROWS_AS(c.validated(), Error);
}

TEST_CASE("rest state is a fixed point of rhs_full") {
  const auto g = make_grid({8, 8, 8});
  const auto r = rhs_full(StateSnapshot::zeros(g, kFull));
  for (const auto& c : r.dQ.comps) CHECK(max_abs(c) == 0.0);
  for (const auto& c : r.du.comps) CHECK(max_abs(c) == 0.0);
}

TEST_CASE("rhs_full with u = 0 and a single mode Q, b = c = 0") {
  const auto g = make_grid({16, 16, 16});
  const std::array<int, 3> f{1, 1, 0};
  for (double xi : {0.0, 0.8}) {
    const ModelParams p = params(0.7, 0, 0, 1.3, 0.9, 1.1, xi);
    const auto s = single_mode(g, p, f);
    const auto r = rhs_full(s);
    // dQ/dt = Gamma (L Lap Q - a Q) with Lap Q = -|k|^2 Q.
    const double kk = 2.0;
    for (int c = 0; c < 6; ++c)
      for (std::size_t i = 0; i < g->points(); ++i)
        CHECK(std::abs(r.dQ.comps[c][i] - p.Gamma * (-p.L * kk - p.a) * s.Q.comps[c][i]) <= 1e-13);

    // du/dt = P div(tau + sigma) with u = 0: pointwise kernels on analytic
    // derivatives, then spectral divergence and projection.
    std::array<std::array<std::vector<double>, 3>, 3> T;
    for (auto& row : T)
      for (auto& e : row) e.assign(g->points(), 0.0);
    for (std::size_t i = 0; i < g->points(); ++i) {
      const auto x = g->coordinate(i);
      const double ph = f[0] * x[0] + f[1] * x[1] + f[2] * x[2];
      const Mat3 Q = std::cos(ph) * kQ0;
      const Mat3 lap = (-kk * std::cos(ph)) * kQ0;
      GradQ dq;
      for (int a = 0; a < 3; ++a) dq.d[a] = (-f[a] * std::sin(ph)) * kQ0;
      const Mat3 H = molecular_field(Q, lap, p);
      const Mat3 tot = stress_tau(Q, H, dq, p) + p.L * stress_sigma(Q, lap);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) T[a][b][i] = tot(a, b);
    }
    SpectralVector div;
    for (int a = 0; a < 3; ++a) {
      div[a] = SpectralField::zeros(g);
      for (int b = 0; b < 3; ++b) {
        const auto d = derivative(forward(g, T[a][b]), b);
        for (std::size_t m = 0; m < g->modes(); ++m) div[a].modes[m] += d.modes[m];
      }
    }
    const auto expect = inverse(leray_project(div));
    for (int a = 0; a < 3; ++a) CHECK(max_diff(r.du.comps[a], expect.comps[a]) <= 1e-13);
  }
}

TEST_CASE("rhs_full with Q = 0 reduces to (2 xi / 3) D and Navier-Stokes") {
  const auto g = make_grid({16, 16, 16});
  StateSnapshot s = StateSnapshot::zeros(g, kFull);
  for (std::size_t i = 0; i < g->points(); ++i) {
    const auto x = g->coordinate(i);
    s.u.comps[0][i] = std::sin(x[1]);
    s.u.comps[1][i] = std::sin(x[2]);
  }
  for (double xi : {0.0, 0.5, -1.5}) {
    s.params.xi = xi;
    const auto r = rhs_full(s);
    for (std::size_t i = 0; i < g->points(); ++i) {
      const auto x = g->coordinate(i);
      // grad u has (0,1) = cos x2 and (1,2) = cos x3.
      Mat3 gu;
      gu(0, 1) = std::cos(x[1]);
      gu(1, 2) = std::cos(x[2]);
      const Mat3 S = advection_tensor({gu}, Mat3{}, xi);
      const Mat3 D = strain_rotation({gu}).D;
      for (int c = 0; c < 6; ++c) {
        const auto [a, b] = kQEntries[c];
        CHECK(std::abs(r.dQ.comps[c][i] - S(a, b)) <= 1e-14);
        CHECK(std::abs(r.dQ.comps[c][i] - 2.0 * xi / 3.0 * D(a, b)) <= 1e-14);
      }
      // u.grad u = (sin x3 cos x2, 0, 0) is already solenoidal.
      CHECK(std::abs(r.du.comps[0][i] - (-std::sin(x[2]) * std::cos(x[1]) - std::sin(x[1]))) <= 1e-13);
      CHECK(std::abs(r.du.comps[1][i] + std::sin(x[2])) <= 1e-13);
      CHECK(std::abs(r.du.comps[2][i]) <= 1e-13);
    }
  }
}

TEST_CASE("rhs_full names the offending term on non-finite data") {
  const auto g = make_grid({8, 8, 8});
  auto s = smooth_state(g, kFull, 1, 0.1);
  s.Q.comps[1][3] = std::nan("");
  try {
    rhs_full(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical_state);
    CHECK_THAT(e.what(), ContainsSubstring("non-finite value in"));
  }
}

TEST_CASE("IMEX amplification factor in the linear subcase") {
  const auto g = make_grid({8, 8, 8});
  for (auto f : {std::array<int, 3>{1, 1, 0}, std::array<int, 3>{1, 0, 0}, std::array<int, 3>{2, 1, 1}}) {
    const double kk = f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
    for (double dt : {1e-3, 1e-2, 0.1}) {
      const auto s = single_mode(g, kLinear, f);
      StepConfig cfg;
      cfg.dt = dt;
      cfg.scheme = Scheme::imex;
      const auto out = step_imex(s, cfg);
      const double amp = (1.0 - dt * kLinear.a * kLinear.Gamma) / (1.0 + dt * kLinear.Gamma * kLinear.L * kk);
      for (int c = 0; c < 6; ++c)
        for (std::size_t i = 0; i < g->points(); ++i) CHECK(std::abs(out.Q.comps[c][i] - amp * s.Q.comps[c][i]) <= 1e-13);
      CHECK(out.time == dt);
    }
  }
}

TEST_CASE("zero state stays zero under every scheme") {
  const auto g = make_grid({8, 8, 8});
  for (Scheme sc : {Scheme::imex, Scheme::imex_picard, Scheme::rk4}) {
    StepConfig cfg;
    cfg.scheme = sc;
    PicardTrace trace;
    const auto out = step(StateSnapshot::zeros(g, kFull), cfg, &trace);
    for (const auto& c : out.Q.comps) CHECK(max_abs(c) == 0.0);
    for (const auto& c : out.u.comps) CHECK(max_abs(c) == 0.0);
    if (sc == Scheme::imex_picard) {
      CHECK(trace.residuals.size() == 1);
      CHECK(trace.converged);
    }
  }
}

TEST_CASE("one IMEX step is consistent with rhs_full to O(dt^2)") {
  const auto g = make_grid({16, 16, 16});
  const auto s = smooth_state(g, kFull, 3, 0.3);
  const auto r = rhs_full(s);
  StepConfig cfg;
  cfg.scheme = Scheme::imex;
  std::vector<double> gaps;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    cfg.dt = dt;
    gaps.push_back(euler_gap(step_imex(s, cfg), s, r, dt));
  }
  for (int i = 0; i + 1 < 3; ++i) CHECK(std::log2(gaps[i] / gaps[i + 1]) == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("all schemes agree to O(dt^2) on one step") {
  const auto g = make_grid({16, 16, 16});
  const auto s = smooth_state(g, kFull, 4, 0.3);
  std::vector<double> gap_imex, gap_picard;
  for (double dt : {1e-3, 5e-4}) {
    StepConfig cfg;
    cfg.dt = dt;
    cfg.scheme = Scheme::rk4;
    const auto ref = step(s, cfg);
    cfg.scheme = Scheme::imex;
    gap_imex.push_back(state_diff(step(s, cfg), ref));
    cfg.scheme = Scheme::imex_picard;
    gap_picard.push_back(state_diff(step(s, cfg), ref));
  }
  CHECK(std::log2(gap_imex[0] / gap_imex[1]) >= 1.9);
  CHECK(std::log2(gap_picard[0] / gap_picard[1]) >= 1.9);
}

TEST_CASE("Picard iteration: linear problem converges in one iteration") {
  const auto g = make_grid({8, 8, 8});
  StepConfig cfg;
  cfg.scheme = Scheme::imex_picard;
  PicardTrace trace;
  const auto s = single_mode(g, kLinear, {1, 1, 0});
  const auto out = step_imex_picard(s, cfg, &trace);
  REQUIRE(trace.residuals.size() == 1);
  CHECK(trace.residuals[0] <= 1e-14);
  CHECK(trace.converged);
  cfg.scheme = Scheme::imex;
  CHECK(state_diff(out, step_imex(s, cfg)) <= 1e-15);
}

TEST_CASE("Picard iteration contracts geometrically on small data") {
  const auto g = make_grid({16, 16, 16});
  const auto s = smooth_state(g, kFull, 5, 0.2);
  StepConfig cfg;
  cfg.scheme = Scheme::imex_picard;
  PicardTrace trace;
  step_imex_picard(s, cfg, &trace);
  REQUIRE(trace.converged);
  REQUIRE(trace.residuals.size() >= 3);
  CHECK(trace.residuals.back() <= cfg.picard_tol);
  for (std::size_t i = 0; i + 1 < trace.residuals.size(); ++i)
    CHECK(trace.residuals[i + 1] < 0.5 * trace.residuals[i]);
}

TEST_CASE("Picard iteration reports divergence with its trace") {
  const auto g = make_grid({16, 16, 16});
  const auto s = smooth_state(g, kFull, 5, 0.2);
  StepConfig cfg;
  cfg.scheme = Scheme::imex_picard;
  cfg.picard_max_iter = 2;
  cfg.picard_tol = 1e-300;
  try {
    step_imex_picard(s, cfg);
    FAIL("expected DivergedIteration");
  } catch (const DivergedIteration& e) {
    CHECK(e.kind() == ErrorKind::diverged_iteration);
    CHECK(e.trace().residuals.size() == 2);
    CHECK_FALSE(e.trace().converged);
  }
}

TEST_CASE("RK4 single-mode error per step is O(dt^5)") {
  const auto g = make_grid({8, 8, 8});
  const auto s = single_mode(g, kLinear, {1, 1, 0});
  const double lambda = kLinear.Gamma * (kLinear.L * 2.0 + kLinear.a);
  std::vector<double> errs;
  for (double dt : {0.08, 0.04, 0.02}) {
    StepConfig cfg;
    cfg.dt = dt;
    cfg.scheme = Scheme::rk4;
    const auto out = step_rk4(s, cfg);
    const double ex = std::exp(-lambda * dt);
    double e = 0.0;
    for (int c = 0; c < 6; ++c)
      for (std::size_t i = 0; i < g->points(); ++i) e = std::max(e, std::abs(out.Q.comps[c][i] - ex * s.Q.comps[c][i]));
    errs.push_back(e);
  }
  for (int i = 0; i + 1 < 3; ++i) CHECK(std::log2(errs[i] / errs[i + 1]) == Catch::Approx(5.0).margin(0.15));
}

TEST_CASE("RK4 converges at fourth order on smooth nonlinear data") {
  const auto g = make_grid({12, 12, 12});
  const auto s = smooth_state(g, kFull, 6, 0.5);
  const double T = 0.08;
  StepConfig cfg;
  cfg.scheme = Scheme::rk4;
  cfg.dt = T / 64;
  const auto ref = integrate(s, cfg, T);
  std::vector<double> errs;
  for (int n : {4, 8, 16}) {
    cfg.dt = T / n;
    errs.push_back(state_diff(integrate(s, cfg, T), ref));
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 3.9);
  CHECK(std::log2(errs[1] / errs[2]) >= 3.9);
}

TEST_CASE("CFL guard rejects oversized steps with a suggestion") {
  const auto g = make_grid({8, 8, 8});
  StateSnapshot s = StateSnapshot::zeros(g, kFull);
  for (std::size_t i = 0; i < g->points(); ++i) s.u.comps[0][i] = 4.0 * std::sin(g->coordinate(i)[1]);
  const double limit = cfl_dt(s.u, 0.5);
  CHECK(limit == Catch::Approx(0.5 * g->min_spacing() / max_abs(s.u.comps[0])).epsilon(1e-14));
  CHECK(std::isinf(cfl_dt(VelocityField::zeros(g), 0.5)));
  for (Scheme sc : {Scheme::imex, Scheme::imex_picard, Scheme::rk4}) {
    StepConfig cfg;
    cfg.scheme = sc;
    cfg.dt = 2.0 * limit;
    try {
      step(s, cfg);
      FAIL("expected StepRejected");
    } catch (const StepRejected& e) {
      CHECK(e.kind() == ErrorKind::step_rejected);
      CHECK(e.suggested_dt() == Catch::Approx(limit));
    }
    cfg.dt = 0.9 * limit;
    CHECK_NOTHROW(step(s, cfg));
  }
}

TEST_CASE("constraints are preserved after every step (property)") {
  const auto g = make_grid({12, 12, 12});
  for (Scheme sc : {Scheme::imex, Scheme::imex_picard, Scheme::rk4}) {
    StepConfig cfg;
    cfg.scheme = sc;
    cfg.dt = 2e-3;
    long seen = 0;
    integrate(smooth_state(g, kFull, 7, 0.5), cfg, 20 * cfg.dt, {[&](const StateSnapshot& st, const StepInfo&) {
                ++seen;
                CHECK(st.Q.max_abs_trace() <= 1e-12);
                CHECK(relative_divergence(forward(st.u)) <= 1e-12);
              }});
    CHECK(seen == 21);
  }
}

TEST_CASE("integrate: no-op, determinism, landing on t_end and splitting") {
  const auto g = make_grid({12, 12, 12});
  const auto s = smooth_state(g, kFull, 8, 0.4);
  StepConfig cfg;
  cfg.dt = 2e-3;

  const auto same = integrate(s, cfg, s.time);
  CHECK(bit_equal(same, s));

  const auto a = integrate(s, cfg, 0.048);
  const auto b = integrate(s, cfg, 0.048);
  CHECK(bit_equal(a, b));

  std::vector<double> dts, times;
  const auto c = integrate(s, cfg, 0.0107, {[&](const StateSnapshot& st, const StepInfo& info) {
                             dts.push_back(info.dt);
                             times.push_back(st.time);
                           }});
  CHECK(c.time == 0.0107);
  REQUIRE(dts.size() == 7);
  CHECK(dts.front() == 0.0);
  CHECK(dts[5] == 2e-3);
  CHECK(dts.back() == Catch::Approx(7e-4).epsilon(1e-9));
  CHECK(times[3] == 3 * 2e-3);

  const auto half = integrate(s, cfg, 0.024);
  const auto split = integrate(half, cfg, 0.048);
  CHECK(state_diff(split, a) <= 1e-14);
  CHECK(split.time == a.time);
}

TEST_CASE("integrate wraps observer failures with step context") {
  const auto g = make_grid({8, 8, 8});
  StepConfig cfg;
  cfg.dt = 1e-2;
  try {
    integrate(StateSnapshot::zeros(g, kFull), cfg, 0.1, {[](const StateSnapshot&, const StepInfo& info) {
                if (info.index == 3) throw std::runtime_error("disk full");
              }});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK_THAT(e.what(), ContainsSubstring("step 3"));
    CHECK_THAT(e.what(), ContainsSubstring("disk full"));
  }
  CHECK_THROWS_AS(integrate(StateSnapshot::zeros(g, kFull), cfg, -1.0), Error);
}
