#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mergenas/adam.hpp"
#include "mergenas/policy.hpp"

namespace mergenas {

// Versioned binary container for agent parameters: a manifest of named
// shapes followed by little-endian float64 payloads, with optional optimizer
// moments. Layout documented in docs/checkpoint-format.md. Writes are
// atomic (temp file + rename).
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const PolicyParams& p, const AdamState* adam, const std::string& path);

struct LoadedCheckpoint {
  PolicyConfig cfg;
  ParamStore store;
  std::optional<AdamState> adam;  // moments only; hyperparameters not stored
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Name-based reuse when entering a new merged space: parameters whose names
// exist in both are copied from the checkpoint, names only in the new space
// keep their fresh random initialization, checkpoint-only names are dropped.
struct RemapReport {
  std::vector<std::string> reused;
  std::vector<std::string> fresh;
  std::vector<std::string> dropped;

  // State names among `fresh` embedding keys, for quick inspection.
  std::vector<std::string> fresh_states() const;
};

PolicyParams load_with_remap(const LoadedCheckpoint& ckpt, const MergedSpace& new_space,
                             const PolicyConfig& cfg, Rng& rng, RemapReport* report = nullptr);

}  // namespace mergenas
