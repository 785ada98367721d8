#pragma once

#include <cstdint>
#include <vector>

#include "hise/matrix.hpp"

namespace hise {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter matrices. Moments are
// allocated on the first step and keep parameter order from then on.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

  std::int64_t step_count() const { return step_; }
  AdamConfig& config() { return config_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  // checkpoint access
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  void restore(std::vector<Matrix> m, std::vector<Matrix> v, std::int64_t step);

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t step_ = 0;
};

}  // namespace hise
