#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "besim/fields.hpp"

namespace besim {

/// Named scalars stored next to a snapshot (running integrals and counters
/// that a restarted run needs to continue its diagnostics exactly).
struct CheckpointAux {
  std::vector<std::pair<std::string, double>> entries;

  void set(const std::string& name, double value);
  std::optional<double> get(const std::string& name) const;
};

struct Checkpoint {
  StateSnapshot state;
  CheckpointAux aux;
};

/// Little-endian binary file: "BESIM1", endian tag, version, dims, box,
/// params, time, payload layout, aux entries, payload length, then the nine
/// components (Q00 Q01 Q02 Q11 Q12 Q22 u1 u2 u3) as float64, axis 3 fastest.
void write_checkpoint(const StateSnapshot& state, const std::filesystem::path& path,
                      const CheckpointAux& aux = {});
Checkpoint read_checkpoint_full(const std::filesystem::path& path);
StateSnapshot read_checkpoint(const std::filesystem::path& path);

/// Serialization without file IO.
std::string encode_checkpoint(const StateSnapshot& state, const CheckpointAux& aux = {});
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& origin = "<memory>");

}  // namespace besim
