#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hise {

struct GradSuiteEntry {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  double h = 0.0;
  bool pass = false;
};

struct GradSuiteReport {
  std::vector<GradSuiteEntry> entries;
  bool pass = false;
  double seconds = 0.0;

  std::string to_table() const;
};

// Finite-difference verification of every catalog op and every composite
// path (encoders, TSE, VSE, fusion, HAL, bank HAL, InfoNCE, total objective)
// across `num_seeds` random instances each. The corrupt flag adds a
// negative-control entry whose tape gradient is knowingly detached from the
// evaluated function, which must fail.
GradSuiteReport run_grad_suite(std::uint64_t seed, int num_seeds, bool corrupt = false);

}  // namespace hise
