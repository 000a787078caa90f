#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "besim/fields.hpp"
#include "besim/tensor.hpp"

namespace testing {

using besim::GridPtr;
using besim::Mat3;

// Hand-rolled generators: every draw comes from one mt19937_64 so a failing
// case can be replayed from its seed.
struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  std::mt19937_64 rng;

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  Mat3 matrix() {
    Mat3 m;
    for (double& v : m.a) v = uniform();
    return m;
  }
  Mat3 symmetric() {
    Mat3 m = matrix();
    return 0.5 * (m + m.transpose());
  }
  Mat3 traceless() {
    Mat3 m = symmetric();
    const double t = m.trace() / 3.0;
    for (int i = 0; i < 3; ++i) m(i, i) -= t;
    return m;
  }
  besim::GradQ grad_q() {
    besim::GradQ g;
    for (auto& d : g.d) d = traceless();
    return g;
  }
};

// One Fourier term c cos(f.x) + s sin(f.x).
struct Wave {
  std::array<int, 3> f;
  double c, s;
};

// Random trig polynomial with frequencies inside [-kmax, kmax]^3.
struct TrigPoly {
  std::vector<Wave> waves;

  static TrigPoly random(Gen& g, int kmax, int terms) {
    TrigPoly p;
    for (int t = 0; t < terms; ++t)
      p.waves.push_back({{g.integer(-kmax, kmax), g.integer(-kmax, kmax), g.integer(-kmax, kmax)}, g.uniform(), g.uniform()});
    return p;
  }
  double operator()(const std::array<double, 3>& x) const {
    double v = 0.0;
    for (const auto& w : waves) {
      const double ph = w.f[0] * x[0] + w.f[1] * x[1] + w.f[2] * x[2];
      v += w.c * std::cos(ph) + w.s * std::sin(ph);
    }
    return v;
  }
  double d(int axis, const std::array<double, 3>& x) const {
    double v = 0.0;
    for (const auto& w : waves) {
      const double ph = w.f[0] * x[0] + w.f[1] * x[1] + w.f[2] * x[2];
      v += w.f[axis] * (-w.c * std::sin(ph) + w.s * std::cos(ph));
    }
    return v;
  }
  double lap(const std::array<double, 3>& x) const {
    double v = 0.0;
    for (const auto& w : waves) {
      const double ph = w.f[0] * x[0] + w.f[1] * x[1] + w.f[2] * x[2];
      const double kk = w.f[0] * w.f[0] + w.f[1] * w.f[1] + w.f[2] * w.f[2];
      v -= kk * (w.c * std::cos(ph) + w.s * std::sin(ph));
    }
    return v;
  }
};

inline std::vector<double> sample(const GridPtr& g, const std::function<double(const std::array<double, 3>&)>& f) {
  std::vector<double> v(g->points());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = f(g->coordinate(p));
  return v;
}

// Traceless tensor field from five independent trig polynomials.
inline besim::QTensorField trig_q(const GridPtr& g, Gen& gen, int kmax, int terms = 3) {
  besim::QTensorField Q = besim::QTensorField::zeros(g);
  std::array<TrigPoly, 5> p;
  for (auto& x : p) x = TrigPoly::random(gen, kmax, terms);
  for (std::size_t i = 0; i < g->points(); ++i) {
    const auto x = g->coordinate(i);
    const double q00 = p[0](x), q11 = p[1](x);
    Q.comps[0][i] = q00;
    Q.comps[3][i] = q11;
    Q.comps[5][i] = -q00 - q11;
    Q.comps[1][i] = p[2](x);
    Q.comps[2][i] = p[3](x);
    Q.comps[4][i] = p[4](x);
  }
  return Q;
}

// Divergence-free velocity: curl of a trig-polynomial vector potential.
inline besim::VelocityField curl_u(const GridPtr& g, Gen& gen, int kmax, int terms = 3) {
  besim::VelocityField u = besim::VelocityField::zeros(g);
  std::array<TrigPoly, 3> A;
  for (auto& a : A) a = TrigPoly::random(gen, kmax, terms);
  for (std::size_t i = 0; i < g->points(); ++i) {
    const auto x = g->coordinate(i);
    u.comps[0][i] = A[2].d(1, x) - A[1].d(2, x);
    u.comps[1][i] = A[0].d(2, x) - A[2].d(0, x);
    u.comps[2][i] = A[1].d(0, x) - A[0].d(1, x);
  }
  return u;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double max_diff(const Mat3& a, const Mat3& b) { return besim::max_abs(a - b); }

inline besim::ModelParams params(double a, double b, double c, double L, double Gamma, double mu, double xi) {
  besim::ModelParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  p.L = L;
  p.Gamma = Gamma;
  p.mu = mu;
  p.xi = xi;
  return p;
}

}  // namespace testing
