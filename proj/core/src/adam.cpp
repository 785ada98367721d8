#include "hise/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hise {

void AdamState::step(const std::vector<Matrix*>& params,
                     const std::vector<const Matrix*>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam: parameter/grad count mismatch");
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Matrix* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  if (m_.size() != params.size())
    throw std::invalid_argument("adam: parameter count changed between steps");

  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_));

  for (size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    const Matrix& g = *grads[k];
    if (!p.same_shape(g) || !p.same_shape(m_[k]))
      throw std::invalid_argument("adam: shape mismatch at parameter " + std::to_string(k) +
                                  " (" + p.shape_str() + " vs " + g.shape_str() + ")");
    double* mp = m_[k].data();
    double* vp = v_[k].data();
    double* pp = p.data();
    const double* gp = g.data();
    for (int i = 0; i < p.size(); ++i) {
      mp[i] = b1 * mp[i] + (1.0 - b1) * gp[i];
      vp[i] = b2 * vp[i] + (1.0 - b2) * gp[i] * gp[i];
      const double mhat = mp[i] / corr1;
      const double vhat = vp[i] / corr2;
      pp[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

void AdamState::restore(std::vector<Matrix> m, std::vector<Matrix> v, std::int64_t step) {
  if (m.size() != v.size()) throw std::invalid_argument("adam: moment count mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  step_ = step;
}

}  // namespace hise
