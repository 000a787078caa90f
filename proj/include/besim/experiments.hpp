#pragma once

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "besim/diagnostics.hpp"
#include "besim/integrator.hpp"

namespace besim {

/// Difference diagnostics of two trajectories (Q,u) = run A and (R,v) = run B.
/// Run A is the designated strong solution.
struct TwinRunReport {
  std::vector<double> times;
  std::vector<double> q_functional;        // |w|^2 + |G|^2 + L |grad G|^2
  std::vector<double> gronwall_integrand;  // A(t); empty unless 2 < p < 6
  SerrinAccumulator serrin_lap_q;          // of run A
  SerrinAccumulator serrin_grad_u;         // of run A
};

/// ||v - u||^2 + ||R - Q||^2 + L ||grad(R - Q)||^2.
double difference_functional(const StateSnapshot& a, const StateSnapshot& b, double L);

/// Sum of the eight norm groups bounding the growth of the difference
/// functional, with unit constants. Requires 2 < p < 6.
double gronwall_integrand(const StateSnapshot& strong, const StateSnapshot& other, double p);

/// Evolves both runs to T, sampling every max(dt_a, dt_b). With workers >= 2
/// run B advances on a second thread between samples.
TwinRunReport twin_run(const StateSnapshot& ic_a, const StateSnapshot& ic_b, const StepConfig& cfg_a,
                       const StepConfig& cfg_b, double T, double p, int workers = 1);
TwinRunReport twin_run(const StateSnapshot& ic, const StepConfig& cfg_a, const StepConfig& cfg_b,
                       double T, double p, int workers = 1);

struct GronwallFit {
  bool degenerate = true;  // no positive Q(0), no integrand, or < 3 samples
  double C = 0.0;          // max_t (log Q(t) - log Q(0)) / int_0^t A, at least 0
};

GronwallFit gronwall_fit(const TwinRunReport& report);

struct GronwallCheck {
  GronwallFit fit;
  GronwallFit fit_half;
  double relative_change = 0.0;
  bool degenerate = true;
  bool stable = false;  // fitted C changes by < 20% when the perturbation halves
};

/// Compares the fits of a perturbed twin run and the same run with the
/// perturbation halved.
GronwallCheck gronwall_envelope_check(const TwinRunReport& report, const TwinRunReport& half_report);

struct DecayReport {
  double amplitude = 0.0;
  std::vector<double> times;
  std::vector<double> E;
  std::vector<double> D;
  int monotone_violations = 0;
  bool failed = false;  // the run itself stopped with an error
  std::string failure;
};

struct DecaySweep {
  std::vector<DecayReport> reports;
  std::optional<double> largest_clean_amplitude;
};

/// Rescales `base` so that its Sobolev energy is 1; amplitude alpha then
/// starts at E(0) = alpha^2. A step counts as a violation when E grows by
/// more than 1e-10 relative. Throws a configuration error unless a > 0.
DecaySweep small_data_decay(const StateSnapshot& base, const std::vector<double>& amplitudes,
                            const ModelParams& params, double s, double T, const StepConfig& cfg);

/// Default initial data for the decay sweep: random solenoidal u and random
/// traceless Q of comparable size.
StateSnapshot decay_base_state(const GridPtr& grid, const ModelParams& params, std::uint64_t seed);

struct StudyRow {
  double dt = 0.0;
  std::array<int, 3> dims{};
  double residual = 0.0;
  double order = 0.0;         // vs the next coarser dt on the same grid (0 for the first)
  double grid_change = 0.0;   // relative change vs the next coarser grid at this dt
};

using InitialCondition = std::function<StateSnapshot(const GridPtr&)>;

/// Energy-equality residual r(T) over a dt ladder x grid ladder. At least
/// one ladder needs three or more entries.
std::vector<StudyRow> equality_convergence_study(const InitialCondition& ic, const StepConfig& base,
                                                 const std::vector<double>& dts,
                                                 const std::vector<std::array<int, 3>>& dims,
                                                 double T,
                                                 std::array<double, 3> box = {2 * std::numbers::pi, 2 * std::numbers::pi,
                                                                              2 * std::numbers::pi});

}  // namespace besim
