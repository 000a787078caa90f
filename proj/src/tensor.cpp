#include "besim/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace besim {

Mat3 Mat3::identity() { return diag(1.0, 1.0, 1.0); }

Mat3 Mat3::diag(double d0, double d1, double d2) {
  Mat3 m;
  m(0, 0) = d0;
  m(1, 1) = d1;
  m(2, 2) = d2;
  return m;
}

Mat3 Mat3::unit(int i, int j) {
  Mat3 m;
  m(i, j) = 1.0;
  return m;
}

Mat3 Mat3::transpose() const {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double frobenius_norm(const Mat3& x) { return std::sqrt(contract(x, x)); }

double max_abs(const Mat3& x) {
  double m = 0.0;
  for (double v : x.a) m = std::max(m, std::abs(v));
  return m;
}

StrainRotation strain_rotation(const GradTensor& grad_u) {
  const Mat3& g = grad_u.value;
  const Mat3 gt = g.transpose();
  return {0.5 * (g + gt), 0.5 * (g - gt)};
}

Mat3 bulk_term(const Mat3& Q, double b, double c) {
  const Mat3 q2 = Q * Q;
  const double tr2 = q2.trace();
  Mat3 m = b * (q2 - (tr2 / 3.0) * Mat3::identity());
  m -= (c * tr2) * Q;
  return m;
}

Mat3 molecular_field(const Mat3& Q, const Mat3& lapQ, const ModelParams& params) {
  Mat3 h = params.L * lapQ;
  h -= params.a * Q;
  h += bulk_term(Q, params.b, params.c);
  return h;
}

namespace {

// sum_ab X_ab Y_ba
double trace_of_product(const Mat3& x, const Mat3& y) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += x(i, j) * y(j, i);
  return s;
}

}  // namespace

Mat3 advection_tensor(const GradTensor& grad_u, const Mat3& Q, double xi) {
  const auto [D, Omega] = strain_rotation(grad_u);
  Mat3 s = Omega * Q - Q * Omega;
  if (xi == 0.0) return s;
  const Mat3 shifted = Q + (1.0 / 3.0) * Mat3::identity();
  s += xi * (D * shifted);
  s += xi * (shifted * D);
  s -= (2.0 * xi * trace_of_product(Q, grad_u.value)) * shifted;
  return s;
}

Mat3 distortion_stress(const GradQ& grad_q) {
  Mat3 r;
  for (int al = 0; al < 3; ++al)
    for (int be = al; be < 3; ++be) {
      const double v = contract(grad_q.d[al], grad_q.d[be]);
      r(al, be) = v;
      r(be, al) = v;
    }
  return r;
}

Mat3 stress_tau(const Mat3& Q, const Mat3& H, const GradQ& grad_q, const ModelParams& params) {
  Mat3 t = -params.L * distortion_stress(grad_q);
  const double xi = params.xi;
  if (xi == 0.0) return t;
  const Mat3 shifted = Q + (1.0 / 3.0) * Mat3::identity();
  t -= xi * (shifted * H);
  t -= xi * (H * shifted);
  t += (2.0 * xi * trace_of_product(Q, H)) * shifted;
  return t;
}

Mat3 stress_sigma(const Mat3& Q, const Mat3& lapQ) { return Q * lapQ - lapQ * Q; }

double free_energy_density(const Mat3& Q, const GradQ& grad_q, const ModelParams& params) {
  double grad2 = 0.0;
  for (const Mat3& d : grad_q.d) grad2 += contract(d, d);
  const Mat3 q2 = Q * Q;
  const double tr2 = q2.trace();
  const double tr3 = trace_of_product(q2, Q);
  return 0.5 * params.L * grad2 + 0.5 * params.a * tr2 - params.b / 3.0 * tr3 +
         0.25 * params.c * tr2 * tr2;
}

}  // namespace besim
