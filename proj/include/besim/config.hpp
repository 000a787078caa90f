#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "besim/fields.hpp"
#include "besim/integrator.hpp"

namespace besim {

enum class ExperimentKind { single, twin, decay_sweep, equality_study };
enum class InitialKind { random, uniaxial, checkpoint };

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(InitialKind kind);

struct InitialSpec {
  InitialKind kind = InitialKind::random;
  double u_amplitude = 0.1;  // rms |u|
  double q_amplitude = 0.1;  // rms |Q|
  double spectrum = 1.0;     // mode amplitudes ~ |k|^-spectrum
  int kmax = 4;
  double order = 0.5;  // uniaxial scalar order s
  double twist = 0.5;  // uniaxial director twist amplitude
  std::string path;    // checkpoint file
};

/// Everything a `besim run` needs. Built by parse_config, which validates it.
struct RunConfig {
  std::array<int, 3> dims{};
  std::array<double, 3> box{2 * std::numbers::pi, 2 * std::numbers::pi, 2 * std::numbers::pi};
  ModelParams params;
  StepConfig step;
  bool dt_from_cfl = false;  // [step] dt absent: estimated from the initial state
  double t_end = 0.0;
  InitialSpec ic;

  int stride = 1;
  std::vector<double> serrin_p{2.0, 3.0, 6.0};
  double sobolev_s = 2.0;

  ExperimentKind experiment = ExperimentKind::single;
  Scheme twin_scheme_b = Scheme::rk4;
  std::optional<double> twin_dt_b;
  double twin_perturbation = 0.0;
  std::vector<double> decay_amplitudes{1e-3, 1e-2, 1e-1};
  std::vector<double> study_dts;
  std::vector<std::array<int, 3>> study_dims;

  std::string out_dir = "besim-out";
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // steps between checkpoints, 0 = final only
};

/// Parses sectioned key=value text. Throws a configuration error on syntax
/// errors (with line number), unknown keys (all listed), missing required
/// keys (all named) and invalid values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Validation shared by parse_config and callers that edit a config.
void validate(const RunConfig& cfg);

/// dt estimate from the CFL limit and the diffusive limit of the explicit
/// terms: cfl_limit * min(h / max|u|, h^2 / max(Gamma L, mu)).
double estimate_dt(const RunConfig& cfg, const StateSnapshot& initial);

}  // namespace besim
