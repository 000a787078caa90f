#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "besim/config.hpp"

namespace besim {

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides [io] out_dir
  std::optional<std::uint64_t> seed;   // overrides [io] seed
  std::optional<std::filesystem::path> resume;
  int workers = 1;
};

/// Worker cap from BESIM_THREADS (default 1). Throws a configuration error
/// for values that are not positive integers.
int workers_from_env();

/// Initial state of a config on the given grid.
StateSnapshot initial_state(const RunConfig& cfg, const GridPtr& grid);

/// Runs the configured experiment, writes CSVs, schema sidecars, checkpoints
/// and summary.json into the output directory, and returns that directory.
std::filesystem::path run(const RunConfig& cfg, const RunOptions& options = {});

/// Summary JSON recomputed from the CSVs of an output directory; also
/// rewrites summary.json there.
std::string summarize(const std::filesystem::path& out_dir);

/// {"error": {"kind": ..., "message": ...}} for any exception.
std::string error_json(const std::exception& e);

}  // namespace besim
