#include "hise/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace hise {

namespace {

double evaluate(const ScalarFn& f, const Matrix& x) {
  Tape tape;
  Value root = f(tape, tape.leaf(x, /*needs_grad=*/false));
  const Matrix& v = tape.value(root);
  if (v.rows() != 1 || v.cols() != 1)
    throw std::invalid_argument("finite_difference_check: f must return a 1x1 scalar");
  const double y = v(0, 0);
  if (!std::isfinite(y))
    throw std::runtime_error("finite_difference_check: non-finite function value");
  return y;
}

}  // namespace

GradCheckResult finite_difference_check(const ScalarFn& f, const Matrix& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_difference_check: h must be > 0");

  Matrix analytic;
  {
    Tape tape;
    Value leaf = tape.leaf(x, /*needs_grad=*/true);
    Value root = f(tape, leaf);
    const Matrix& v = tape.value(root);
    if (v.rows() != 1 || v.cols() != 1)
      throw std::invalid_argument("finite_difference_check: f must return a 1x1 scalar");
    if (!std::isfinite(v(0, 0)))
      throw std::runtime_error("finite_difference_check: non-finite function value");
    tape.backward(root);
    analytic = tape.grad(leaf);
  }

  GradCheckResult result;
  Matrix probe = x;
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      const double saved = probe(r, c);
      probe(r, c) = saved + h;
      const double up = evaluate(f, probe);
      probe(r, c) = saved - h;
      const double down = evaluate(f, probe);
      probe(r, c) = saved;

      const double fd = (up - down) / (2.0 * h);
      const double a = analytic(r, c);
      const double rel = std::fabs(a - fd) / std::max(1.0, std::fabs(a));
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_row = r;
        result.worst_col = c;
      }
    }
  }
  return result;
}

}  // namespace hise
