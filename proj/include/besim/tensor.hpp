#pragma once

#include <array>

#include "besim/params.hpp"

namespace besim {

/// Dense 3x3 matrix, row-major. Houses every pointwise tensor of the model.
struct Mat3 {
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  static Mat3 identity();
  static Mat3 diag(double d0, double d1, double d2);
  /// Basis matrix E_ij (single unit entry).
  static Mat3 unit(int i, int j);

  Mat3 transpose() const;
  double trace() const { return a[0] + a[4] + a[8]; }

  Mat3& operator+=(const Mat3& o) {
    for (int k = 0; k < 9; ++k) a[k] += o.a[k];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int k = 0; k < 9; ++k) a[k] -= o.a[k];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (double& v : a) v *= s;
    return *this;
  }
};

inline Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
inline Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
inline Mat3 operator-(Mat3 x) { return x *= -1.0; }
inline Mat3 operator*(double s, Mat3 x) { return x *= s; }
inline Mat3 operator*(Mat3 x, double s) { return x *= s; }
inline Mat3 operator*(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
  return r;
}
inline bool operator==(const Mat3& x, const Mat3& y) { return x.a == y.a; }

/// Frobenius pairing A : B = sum_ij A_ij B_ij.
inline double contract(const Mat3& x, const Mat3& y) {
  double s = 0.0;
  for (int k = 0; k < 9; ++k) s += x.a[k] * y.a[k];
  return s;
}
double frobenius_norm(const Mat3& x);
double max_abs(const Mat3& x);

/// Velocity gradient with (grad u)_{ab} = d_b u_a.
struct GradTensor {
  Mat3 value;
};

/// Spatial derivatives of Q: d[g] holds d_g Q.
struct GradQ {
  std::array<Mat3, 3> d{};
};

struct StrainRotation {
  Mat3 D;      // symmetric part
  Mat3 Omega;  // antisymmetric part
};

StrainRotation strain_rotation(const GradTensor& grad_u);

/// b [Q^2 - Tr(Q^2)/3 I] - c Q Tr(Q^2)
Mat3 bulk_term(const Mat3& Q, double b, double c);

/// H = L lapQ - a Q + bulk_term(Q)
Mat3 molecular_field(const Mat3& Q, const Mat3& lapQ, const ModelParams& params);

/// S = xi D (Q+I/3) + xi (Q+I/3) D - 2 xi (Q+I/3) Tr(Q grad u) + Omega Q - Q Omega.
/// Tr(Q grad u) is taken literally as sum_ab Q_ab (grad u)_ba.
Mat3 advection_tensor(const GradTensor& grad_u, const Mat3& Q, double xi);

/// (dQ (.) dQ)_ab = sum_gd d_a Q_gd d_b Q_gd
Mat3 distortion_stress(const GradQ& grad_q);

/// tau = -xi (Q+I/3) H - xi H (Q+I/3) + 2 xi (Q+I/3) Tr(QH) - L dQ (.) dQ
Mat3 stress_tau(const Mat3& Q, const Mat3& H, const GradQ& grad_q, const ModelParams& params);

/// sigma = Q lapQ - lapQ Q
Mat3 stress_sigma(const Mat3& Q, const Mat3& lapQ);

/// L/2 |grad Q|^2 + a/2 Tr(Q^2) - b/3 Tr(Q^3) + c/4 Tr(Q^2)^2
double free_energy_density(const Mat3& Q, const GradQ& grad_q, const ModelParams& params);

}  // namespace besim
