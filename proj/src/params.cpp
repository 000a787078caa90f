#include "besim/params.hpp"

#include <cmath>
#include <string>

#include "besim/error.hpp"

namespace besim {

const ModelParams& ModelParams::validated() const {
  for (double v : {a, b, c, L, Gamma, mu, xi})
    if (!std::isfinite(v)) throw Error(ErrorKind::configuration, "model parameters must be finite");
  if (!(L > 0.0)) throw Error(ErrorKind::configuration, "elastic constant L must be positive");
  if (!(Gamma > 0.0))
    throw Error(ErrorKind::configuration, "rotational diffusion Gamma must be positive");
  if (!(mu > 0.0)) throw Error(ErrorKind::configuration, "viscosity mu must be positive");
  return *this;
}

}  // namespace besim
