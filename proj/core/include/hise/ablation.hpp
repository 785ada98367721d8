#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hise/config.hpp"
#include "hise/data.hpp"
#include "hise/metrics.hpp"

namespace hise {

enum class AblationAxis { kComponents, kAggregation, kAlpha, kLoss };

AblationAxis parse_ablation_axis(const std::string& name);

struct AblationRow {
  std::string name;
  RunConfig config;
  MetricsReport metrics;
};

// Trains one model per row configuration with the shared seed and evaluates.
std::vector<AblationRow> run_ablation(const RunConfig& base, const DatasetSplit& split,
                                      AblationAxis axis, std::ostream* progress = nullptr);

// Row configurations without the training, exposed for tests.
std::vector<std::pair<std::string, RunConfig>> ablation_rows(const RunConfig& base,
                                                             AblationAxis axis);

std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace hise
