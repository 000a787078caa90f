#pragma once

namespace besim {

/// Physical constants of the coupled flow / order-parameter system.
///
///   a, b, c : Landau-de Gennes bulk coefficients
///   L       : elastic constant (> 0)
///   Gamma   : rotational diffusion (> 0)
///   mu      : viscosity (> 0)
///   xi      : tumbling / alignment ratio, 0 is the corotational case
struct ModelParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double L = 1.0;
  double Gamma = 1.0;
  double mu = 1.0;
  double xi = 0.0;

  /// The quartic bulk term is not bounded below for c < 0. Allowed, but flagged.
  bool coercivity_warning() const { return c < 0.0; }

  /// Throws a configuration error unless L, Gamma, mu are positive and all
  /// entries are finite. Returns *this for chaining.
  const ModelParams& validated() const;
};

}  // namespace besim
