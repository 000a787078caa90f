#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "besim/fields.hpp"

namespace besim {

/// Every term of the energy balance at one instant. Dissipation entries are
/// rates; the two rhs entries are the signed integrands on the right side.
struct EnergyBreakdown {
  double kinetic = 0.0;    // ||u||^2
  double q_l2 = 0.0;       // ||Q||^2
  double q_grad = 0.0;     // L ||grad Q||^2
  double diss_visc = 0.0;  // 2 mu ||grad u||^2
  double diss_q0 = 0.0;    // 2 a Gamma ||Q||^2
  double diss_q1 = 0.0;    // 2 (a+1) Gamma L ||grad Q||^2
  double diss_q2 = 0.0;    // 2 Gamma L^2 ||Lap Q||^2
  double rhs_xi_terms = 0.0;
  double rhs_bulk_terms = 0.0;

  double energy() const { return kinetic + q_l2 + q_grad; }
  double dissipation() const { return diss_visc + diss_q0 + diss_q1 + diss_q2; }
  double source() const { return rhs_xi_terms + rhs_bulk_terms; }
};

EnergyBreakdown energy_breakdown(const StateSnapshot& state);

struct EnergySample {
  double t = 0.0;
  EnergyBreakdown e;
};

struct EqualityResidual {
  double value = 0.0;
  int quadrature_order = 2;  // trapezoid rule in time
};

/// Running form of the energy-equality residual: instantaneous energy plus
/// integrated dissipation minus initial energy and integrated sources.
class EnergyLedger {
 public:
  struct Snapshot {
    long count = 0;
    double t_prev = 0.0;
    double e0 = 0.0;
    double dissipated = 0.0;
    double supplied = 0.0;
    EnergyBreakdown prev;
  };

  void add(double t, const EnergyBreakdown& e);
  double residual() const;
  long count() const { return s_.count; }
  const Snapshot& snapshot() const { return s_; }
  static EnergyLedger restore(const Snapshot& s) {
    EnergyLedger l;
    l.s_ = s;
    return l;
  }

 private:
  Snapshot s_;
};

/// r(t) for a series sampled from its first entry; t must be one of the
/// sample times. Throws an input error for fewer than two samples.
EqualityResidual energy_equality_residual(std::span<const EnergySample> series, double t);

/// Space-time exponent pair with 2/q + 3/p = 3/2; p = 2 maps to q = infinity.
struct SerrinSpec {
  double p = 2.0;
  double q = std::numeric_limits<double>::infinity();

  /// Throws a serrin-range error unless 2 <= p <= 6.
  static SerrinSpec make(double p);
  bool endpoint() const { return p == 2.0; }
};

struct SerrinAccumulator {
  SerrinSpec spec;
  double time = 0.0;
  double running_integral = 0.0;  // int ||f||^q dt for p > 2
  double running_max = 0.0;       // sup ||f|| for p = 2
  std::vector<std::pair<double, double>> samples;  // (t, ||f||_Lp)

  double norm() const;
};

/// Adds one sample taken dt after the previous one (right-endpoint rule).
SerrinAccumulator serrin_norm(SerrinAccumulator acc, double sample, double dt);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Grid quadrature Lp norm; tensors use the pointwise Frobenius magnitude.
/// p = kInfinity gives the max magnitude.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VelocityField& u, double p);
double lp_norm(const QTensorField& Q, double p);

/// ||Lap Q||_Lp and ||grad u||_Lp of a state.
struct SerrinSamples {
  double lap_q = 0.0;
  double grad_u = 0.0;
};
SerrinSamples serrin_samples(const StateSnapshot& state, double p);
/// Several exponents from one evaluation of the fields.
std::vector<SerrinSamples> serrin_samples(const StateSnapshot& state, std::span<const double> ps);

/// Bessel-weighted norms sum_k (1+|k|^2)^s |f_k|^2 (times the box volume).
double sobolev_norm_squared(const QTensorField& Q, double s);
double sobolev_norm_squared(const VelocityField& u, double s);

struct SobolevEnergies {
  double s = 2.0;
  double E = 0.0;
  double D = 0.0;
};

SobolevEnergies sobolev_energies(const StateSnapshot& state, double s);

/// Normalized residuals of the six cancellation identities, each
/// |X - Y| / (int |x| + int |y|). Items taking a second tensor are evaluated
/// with G = Q and with a random traceless G; the larger residual is kept.
struct CancellationReport {
  std::array<double, 6> residual{};
  double max() const;
};

CancellationReport cancellation_probe(const StateSnapshot& state, std::uint64_t g_seed = 7);

/// Free energy: grid quadrature of free_energy_density with spectral grad Q.
double free_energy(const QTensorField& Q, const ModelParams& params);

/// Molecular field H[Q] = L Lap Q - a Q + M[Q] on the grid.
QTensorField molecular_field(const QTensorField& Q, const ModelParams& params);

struct DirectionalCheck {
  double finite_difference = 0.0;  // (F(Q+eps V) - F(Q-eps V)) / (2 eps)
  double pairing = 0.0;            // -<H[Q] : V>
  double mismatch() const;
};

DirectionalCheck directional_check(const QTensorField& Q, const QTensorField& V,
                                   const ModelParams& params, double eps);

/// Largest mismatch over `directions` random traceless directions.
double variational_consistency(const QTensorField& Q, const ModelParams& params, double eps,
                               int directions = 20, std::uint64_t seed = 11);

}  // namespace besim
