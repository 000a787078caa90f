#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "besim/error.hpp"
#include "besim/fields.hpp"

namespace besim {

enum class Scheme { imex, imex_picard, rk4 };

std::string_view to_string(Scheme scheme);
/// Accepts "imex", "imex-picard" and "rk4"; throws a configuration error otherwise.
Scheme parse_scheme(std::string_view name);

struct StepConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::rk4;
  double picard_tol = 1e-10;
  int picard_max_iter = 50;
  double cfl_limit = 0.5;

  /// Throws a configuration error for nonpositive or non-finite entries.
  const StepConfig& validated() const;
};

/// Fixed-point residuals ||X(k+1) - X(k)||_L2 (Q part plus u part), one per
/// iteration.
struct PicardTrace {
  std::vector<double> residuals;
  bool converged = false;
};

class DivergedIteration : public Error {
 public:
  DivergedIteration(const std::string& message, PicardTrace trace);
  const PicardTrace& trace() const noexcept { return trace_; }

 private:
  PicardTrace trace_;
};

struct Rates {
  QTensorField dQ;
  VelocityField du;
};

/// Time derivatives of (Q, u) with pressure removed by Leray projection.
/// Inputs are dealiased first; every product is dealiased.
Rates rhs_full(const StateSnapshot& state);

/// Implicit Gamma L Lap Q and mu Lap u, everything else explicit at step n.
StateSnapshot step_imex(const StateSnapshot& state, const StepConfig& cfg);

/// IMEX step whose nonlinear terms are iterated to a fixed point. Throws
/// DivergedIteration (carrying the trace) when picard_max_iter is exhausted.
StateSnapshot step_imex_picard(const StateSnapshot& state, const StepConfig& cfg,
                               PicardTrace* trace = nullptr);

/// Classical four-stage Runge-Kutta on rhs_full.
StateSnapshot step_rk4(const StateSnapshot& state, const StepConfig& cfg);

/// Dispatches on cfg.scheme.
StateSnapshot step(const StateSnapshot& state, const StepConfig& cfg, PicardTrace* trace = nullptr);

/// Largest dt allowed by the CFL guard for this velocity (infinity for u = 0).
double cfl_dt(const VelocityField& u, double cfl_limit);

struct StepInfo {
  long index = 0;   // 0 for the initial call, then 1, 2, ...
  double dt = 0.0;  // step just taken, 0 for the initial call
  const PicardTrace* picard = nullptr;
};

using Observer = std::function<void(const StateSnapshot&, const StepInfo&)>;

/// Steps from state.time to t_end. Every observer sees the initial state and
/// the state after each step. The last step is shortened to land on t_end.
StateSnapshot integrate(StateSnapshot state, const StepConfig& cfg, double t_end,
                        const std::vector<Observer>& observers = {});

}  // namespace besim
