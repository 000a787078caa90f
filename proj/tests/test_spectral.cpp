#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "besim/error.hpp"
#include "besim/spectral.hpp"
#include "support.hpp"

using namespace besim;
using namespace testing;

namespace {

ScalarField field_of(const GridPtr& g, const std::function<double(const std::array<double, 3>&)>& f) {
  return ScalarField{g, sample(g, f)};
}

}  // namespace

TEST_CASE("forward of a constant is a single zero mode") {
  const auto g = make_grid({8, 6, 4});
  const auto F = forward(field_of(g, [](auto&) { return 2.5; }));
  for (std::size_t m = 0; m < g->modes(); ++m) CHECK(std::abs(F.modes[m] - (m == 0 ? Complex(2.5) : Complex())) <= 1e-15);
}

TEST_CASE("forward of sin x1 lives on k = (+-1, 0, 0)") {
  const auto g = make_grid({8, 8, 8});
  const auto F = forward(field_of(g, [](auto& x) { return std::sin(x[0]); }));
  for (std::size_t m = 0; m < g->modes(); ++m) {
    const auto f = g->mode_frequency(m);
    const bool on = std::abs(f[0]) == 1 && f[1] == 0 && f[2] == 0;
    if (on)
      CHECK(std::abs(F.modes[m] - Complex(0.0, -0.5 * f[0])) <= 1e-15);
    else
      CHECK(std::abs(F.modes[m]) <= 1e-15);
  }
}

TEST_CASE("roundtrip and Parseval on random fields (property)") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Gen gen(seed);
    const std::array<int, 3> dims{2 * gen.integer(2, 8), 2 * gen.integer(2, 8), 2 * gen.integer(2, 8)};
    const auto g = make_grid(dims, {gen.uniform(0.5, 7), gen.uniform(0.5, 7), gen.uniform(0.5, 7)});
    ScalarField f = ScalarField::zeros(g);
    for (double& v : f.values) v = gen.uniform();
    const auto F = forward(f);
    const auto back = inverse(F);
    CHECK(max_diff(back.values, f.values) <= 1e-13 * max_abs(f.values));
    const double q = quadrature_l2_squared(f);
    CHECK(std::abs(mode_l2_squared(F) - q) <= 1e-12 * q);
  }
}

TEST_CASE("transforms reject mismatched grids") {
  const auto g = make_grid({8, 8, 8});
  const auto h = make_grid({8, 8, 6});
  SpectralVector v{SpectralField::zeros(g), SpectralField::zeros(h), SpectralField::zeros(g)};
  try {
    inverse(v);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
  CHECK_THROWS_AS(forward(g, std::vector<double>(10)), Error);
}

TEST_CASE("spectral derivatives on trig polynomials") {
  const auto g = make_grid({16, 16, 16});
  const auto s1 = field_of(g, [](auto& x) { return std::sin(x[0]); });
  const auto lap = inverse(laplacian(forward(s1)));
  for (std::size_t p = 0; p < g->points(); ++p) CHECK(std::abs(lap.values[p] + s1.values[p]) <= 1e-13);

  const auto fx2 = forward(field_of(g, [](auto& x) { return std::sin(x[1]); }));
  const auto zero = SpectralField::zeros(g);
  const auto div = divergence({fx2, zero, zero});
  for (const auto& c : div.modes) CHECK(c == Complex());

  const auto f = field_of(g, [](auto& x) { return std::sin(2 * x[0]) * std::sin(x[1]); });
  const auto lf = inverse(laplacian(forward(f)));
  for (std::size_t p = 0; p < g->points(); ++p) CHECK(std::abs(lf.values[p] + 5.0 * f.values[p]) <= 1e-12);
}

TEST_CASE("gradient and Laplacian match analytic derivatives (property)") {
  const auto g = make_grid({16, 16, 16});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Gen gen(seed);
    const auto P = TrigPoly::random(gen, 5, 4);
    const auto F = forward(field_of(g, P));
    const auto grad = gradient(F);
    double scale = 1.0;
    for (const auto& w : P.waves) scale += 25.0 * (std::abs(w.c) + std::abs(w.s));
    for (int ax = 0; ax < 3; ++ax) {
      const auto d = inverse(grad[ax]);
      const auto ref = sample(g, [&](auto& x) { return P.d(ax, x); });
      CHECK(max_diff(d.values, ref) <= 1e-13 * scale);
    }
    const auto lap = inverse(laplacian(F));
    CHECK(max_diff(lap.values, sample(g, [&](auto& x) { return P.lap(x); })) <= 1e-13 * scale);
    // div(grad f) == lap f
    const auto dg = divergence(grad);
    const auto lp = laplacian(F);
    for (std::size_t m = 0; m < g->modes(); ++m) {
      const auto f = g->mode_frequency(m);
      if (std::abs(f[0]) == 8 || std::abs(f[1]) == 8 || std::abs(f[2]) == 8) continue;
      CHECK(std::abs(dg.modes[m] - lp.modes[m]) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("Leray projection examples") {
  const auto g = make_grid({8, 8, 8});
  const auto grad_sin = gradient(forward(field_of(g, [](auto& x) { return std::sin(x[0]); })));
  for (const auto& c : leray_project(grad_sin)) CHECK(max_abs(inverse(c).values) <= 1e-16);

  SpectralVector v{SpectralField::zeros(g), SpectralField::zeros(g), SpectralField::zeros(g)};
  const std::size_t m = g->mode_index(1, 0, 0);
  v[0].modes[m] = 1.0;
  v[1].modes[m] = 1.0;
  const auto out = leray_project(v);
  CHECK(out[0].modes[m] == Complex(0.0));
  CHECK(out[1].modes[m] == Complex(1.0));
  CHECK(out[2].modes[m] == Complex(0.0));

  // Zero mode untouched.
  v[2].modes[0] = 3.0;
  CHECK(leray_project(v)[2].modes[0] == Complex(3.0));
}

TEST_CASE("Leray projection: range identity, idempotence, divergence (property)") {
  const auto g = make_grid({12, 12, 12});
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Gen gen(seed);
    const auto u = curl_u(g, gen, 3);
    const auto U = forward(u);
    const auto P = leray_project(U);
    for (int a = 0; a < 3; ++a) CHECK(max_diff(inverse(P[a]).values, u.comps[a]) <= 1e-14 * (1 + max_abs(u.comps[a])));

    VelocityField w = VelocityField::zeros(g);
    for (auto& c : w.comps)
      for (double& v : c) v = gen.uniform();
    const auto P1 = leray_project(forward(w));
    const auto P2 = leray_project(P1);
    for (int a = 0; a < 3; ++a)
      for (std::size_t m = 0; m < g->modes(); ++m) CHECK(std::abs(P1[a].modes[m] - P2[a].modes[m]) <= 1e-14);
    CHECK(relative_divergence(P1) <= 1e-13);
  }
}

TEST_CASE("dealias examples") {
  const auto g = make_grid({8, 8, 8});
  auto inside = SpectralField::zeros(g);
  inside.modes[g->mode_index(2, 1, 2)] = Complex(0.5, 0.25);
  CHECK(dealias(inside).modes == inside.modes);

  auto outside = SpectralField::zeros(g);
  outside.modes[g->mode_index(3, 0, 0)] = 1.0;
  for (const auto& c : dealias(outside).modes) CHECK(c == Complex());

  auto axis = SpectralField::zeros(g);
  axis.modes[g->mode_index(0, 0, 2)] = 1.0;
  axis.modes[g->mode_index(0, 0, 3)] = 1.0;
  const auto d = dealias(axis);
  CHECK(d.modes[g->mode_index(0, 0, 2)] == Complex(1.0));
  CHECK(d.modes[g->mode_index(0, 0, 3)] == Complex());
  CHECK(dealias(d).modes == d.modes);
}

TEST_CASE("Helmholtz solve examples") {
  const auto g = make_grid({16, 16, 16});
  const auto c = forward(field_of(g, [](auto&) { return 1.5; }));
  CHECK(helmholtz_solve(c, 0.7).modes == c.modes);

  const auto s1 = field_of(g, [](auto& x) { return std::sin(x[0]); });
  const auto h1 = inverse(helmholtz_solve(forward(s1), 1.0));
  for (std::size_t p = 0; p < g->points(); ++p) CHECK(std::abs(h1.values[p] - 0.5 * s1.values[p]) <= 1e-15);

  const auto f = field_of(g, [](auto& x) { return std::sin(2 * x[0]) * std::sin(x[1]); });
  const auto h2 = inverse(helmholtz_solve(forward(f), 0.5));
  for (std::size_t p = 0; p < g->points(); ++p) CHECK(std::abs(h2.values[p] - f.values[p] / 3.5) <= 1e-15);

  for (double bad : {0.0, -1.0, std::nan("")}) {
    try {
      helmholtz_solve(c, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::configuration);
    }
  }
}

TEST_CASE("Helmholtz solve inverts I - alpha Lap (property)") {
  const auto g = make_grid({12, 12, 12});
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Gen gen(seed);
    const double alpha = gen.uniform(1e-3, 3.0);
    ScalarField r = ScalarField::zeros(g);
    for (double& v : r.values) v = gen.uniform();
    const auto R = forward(r);
    const auto X = helmholtz_solve(R, alpha);
    const auto lapX = laplacian(X);
    SpectralField back = X;
    for (std::size_t m = 0; m < g->modes(); ++m) back.modes[m] -= alpha * lapX.modes[m];
    CHECK(max_diff(inverse(back).values, r.values) <= 1e-13 * max_abs(r.values));
  }
}

TEST_CASE("discrete integration by parts on dealiased trig polynomials (property)") {
  const auto g = make_grid({16, 16, 16});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Gen gen(seed);
    const auto F = dealias(forward(field_of(g, TrigPoly::random(gen, 6, 4))));
    const auto G = dealias(forward(field_of(g, TrigPoly::random(gen, 6, 4))));
    const auto f = inverse(F), h = inverse(G);
    for (int ax = 0; ax < 3; ++ax) {
      const double a = quadrature_inner(inverse(derivative(F, ax)), h);
      const double b = quadrature_inner(f, inverse(derivative(G, ax)));
      const double scale = std::sqrt(quadrature_l2_squared(inverse(derivative(F, ax))) * quadrature_l2_squared(h)) +
                           std::sqrt(quadrature_l2_squared(f) * quadrature_l2_squared(inverse(derivative(G, ax))));
      CHECK(std::abs(a + b) <= 1e-12 * scale);
    }
  }
}
