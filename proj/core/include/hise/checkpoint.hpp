#pragma once

#include <string>

#include "hise/config.hpp"
#include "hise/training.hpp"

namespace hise {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

struct LoadedCheckpoint {
  RunConfig config;
  TrainerState state;
  std::uint64_t config_hash = 0;
};

// Binary snapshot of everything training needs to resume bit-identically:
// the embedded config, live and momentum parameters, Adam moments and step,
// bank contents and the epoch/step counters.
void save_checkpoint(const std::string& path, const TrainerState& state,
                     const RunConfig& config);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace hise
