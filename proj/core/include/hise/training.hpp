#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hise/adam.hpp"
#include "hise/config.hpp"
#include "hise/data.hpp"
#include "hise/metrics.hpp"
#include "hise/model.hpp"
#include "hise/objective.hpp"

namespace hise {

struct TrainError : std::runtime_error {
  explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

struct TrainerState {
  explicit TrainerState(const RunConfig& config);

  ModelParams live;
  ModelParams momentum;
  AdamState adam;
  MemoryBank video_bank;
  MemoryBank text_bank;
  std::int64_t step = 0;
  int epoch = 0;  // completed epochs
  TseStats tse_stats;
};

// Fresh state: seeded parameter init, momentum copy, empty banks.
TrainerState make_trainer_state(const RunConfig& config);

struct TrainHistoryEntry {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<MetricsReport> metrics;
};

struct TrainResult {
  std::vector<TrainHistoryEntry> history;
  MetricsReport final_metrics;
};

int steps_per_epoch(const DatasetSplit& split, const RunConfig& config);

// One optimizer step over the given text indices: forward, total objective,
// backward, Adam, then the momentum update and bank pushes. Returns the loss.
double train_step(TrainerState& state, const DatasetSplit& split,
                  const std::vector<int>& batch, const RunConfig& config);

// Runs epochs [state.epoch, until_epoch) and evaluates the final snapshot.
// until_epoch < 0 means config.epochs. Progress lines go to `progress`.
TrainResult train(TrainerState& state, const DatasetSplit& split, const RunConfig& config,
                  std::ostream* progress = nullptr, int until_epoch = -1);

std::string train_history_json(const TrainResult& result);

}  // namespace hise
