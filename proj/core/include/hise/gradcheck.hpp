#pragma once

#include <functional>

#include "hise/matrix.hpp"
#include "hise/tape.hpp"

namespace hise {

// A scalar-valued tape program of one matrix input. The builder receives a
// fresh tape with x already recorded as a grad-tracked leaf and must return
// a 1x1 root on that tape.
using ScalarFn = std::function<Value(Tape&, Value)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  int worst_row = -1;
  int worst_col = -1;
};

// Compares the analytic gradient of `f` at `x` (one backward pass) against
// central finite differences per coordinate. Relative error is
// |analytic - fd| / max(1, |analytic|). Throws on non-finite evaluations.
GradCheckResult finite_difference_check(const ScalarFn& f, const Matrix& x, double h);

}  // namespace hise
