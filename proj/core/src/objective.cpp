#include "hise/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace hise {

MemoryBank::MemoryBank(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("MemoryBank: capacity must be >= 1");
}

void MemoryBank::push(const Matrix& rows) {
  for (int r = 0; r < rows.rows(); ++r) {
    if (!rows_.empty() && static_cast<int>(rows_.front().size()) != rows.cols())
      throw std::invalid_argument("MemoryBank: row dimension changed");
    const double norm = rows.row_norm(r);
    if (std::fabs(norm - 1.0) > 1e-9)
      throw std::invalid_argument("MemoryBank: row norm " + std::to_string(norm) +
                                  " is not unit");
    rows_.emplace_back(rows.row(r), rows.row(r) + rows.cols());
    if (static_cast<int>(rows_.size()) > capacity_) rows_.pop_front();
  }
}

Matrix MemoryBank::snapshot() const {
  if (rows_.empty()) return Matrix();
  Matrix out(static_cast<int>(rows_.size()), static_cast<int>(rows_.front().size()));
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) = rows_[r][c];
  return out;
}

void MemoryBank::restore(const Matrix& rows) {
  rows_.clear();
  push(rows);
}

Value fuse(Value base, Value semantic, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("fuse: alpha must be in [0,1]");
  if (alpha == 1.0) return base;
  return l2_normalize_rows(add(scale(base, alpha), scale(semantic, 1.0 - alpha)));
}

namespace {

// Shared HAL direction: (mu/Q) * sum_q [log(sum_{neg} exp((s-gamma)/mu) + 1)
//                                       - log(s_positive + 1)]
// The negative set per row is everything except the positive column.
Value hal_direction(Tape& tape, Value s, const std::vector<int>& positives, double gamma,
                    double mu) {
  const Matrix& sv = tape.value(s);
  const int q = sv.rows();
  const int r = sv.cols();
  if (static_cast<int>(positives.size()) != q)
    throw std::invalid_argument("hal_loss: expected " + std::to_string(q) +
                                " positives, got " + std::to_string(positives.size()));

  Matrix pos_mask(q, r);
  Matrix neg_mask = Matrix::full(q, r, 1.0);
  for (int i = 0; i < q; ++i) {
    if (positives[i] < 0 || positives[i] >= r)
      throw std::invalid_argument("hal_loss: missing positive for row " + std::to_string(i));
    pos_mask(i, positives[i]) = 1.0;
    neg_mask(i, positives[i]) = 0.0;
  }

  Value ones_col = tape.constant(Matrix::full(r, 1, 1.0));
  Value one_plus = tape.constant(Matrix::full(q, 1, 1.0));

  Value shifted = scale(add(s, tape.constant(Matrix::full(q, r, -gamma))), 1.0 / mu);
  Value neg_terms = mul(exp(shifted), tape.constant(std::move(neg_mask)));
  Value neg_log = log(add(matmul(neg_terms, ones_col), one_plus));

  Value pos_vals = matmul(mul(s, tape.constant(std::move(pos_mask))), ones_col);
  Value pos_log = log(add(pos_vals, one_plus));

  return scale(add(sum_all(neg_log), scale(sum_all(pos_log), -1.0)), mu / q);
}

}  // namespace

Value hal_loss(Tape& tape, Value similarities, const std::vector<int>& row_positives,
               const std::vector<int>& col_positives, double gamma, double mu) {
  Value rows = hal_direction(tape, similarities, row_positives, gamma, mu);
  Value cols = hal_direction(tape, transpose(similarities), col_positives, gamma, mu);
  return add(rows, cols);
}

Value bank_hal_loss(Tape& tape, Value anchors, const Matrix& momentum_positives,
                    const MemoryBank& bank, double gamma, double mu) {
  const Matrix& av = tape.value(anchors);
  const int q = av.rows();
  if (!av.same_shape(momentum_positives))
    throw std::invalid_argument("bank_hal_loss: anchors " + av.shape_str() +
                                " vs positives " + momentum_positives.shape_str());

  Value ones_d = tape.constant(Matrix::full(av.cols(), 1, 1.0));
  Value one_plus = tape.constant(Matrix::full(q, 1, 1.0));

  // cos(a_q, p_q) as row sums of the elementwise product
  Value pos_cos = matmul(mul(anchors, tape.constant(momentum_positives)), ones_d);
  Value pos_log = log(add(pos_cos, one_plus));

  Value neg_sum{};
  if (bank.empty()) {
    neg_sum = tape.constant(Matrix(q, 1));
  } else {
    Matrix bank_rows = bank.snapshot();
    Value sims = matmul(anchors, transpose(tape.constant(std::move(bank_rows))));
    Value shifted =
        scale(add(sims, tape.constant(Matrix::full(q, bank.size(), -gamma))), 1.0 / mu);
    neg_sum = matmul(exp(shifted), tape.constant(Matrix::full(bank.size(), 1, 1.0)));
  }
  Value neg_log = log(add(neg_sum, one_plus));

  return scale(add(sum_all(neg_log), scale(sum_all(pos_log), -1.0)), mu / q);
}

Value infonce_loss(Tape& tape, Value similarities, const std::vector<int>& positives,
                   double temperature) {
  const Matrix& sv = tape.value(similarities);
  if (sv.rows() != sv.cols())
    throw std::invalid_argument("infonce_loss: similarity matrix must be square, got " +
                                sv.shape_str());
  const int n = sv.rows();
  if (static_cast<int>(positives.size()) != n)
    throw std::invalid_argument("infonce_loss: positive count mismatch");

  Matrix row_mask(n, n);
  Matrix col_mask(n, n);
  std::vector<bool> hit(n, false);
  for (int i = 0; i < n; ++i) {
    const int p = positives[i];
    if (p < 0 || p >= n || hit[p])
      throw std::invalid_argument("infonce_loss: positives must be a bijection");
    hit[p] = true;
    row_mask(i, p) = 1.0;
    col_mask(p, i) = 1.0;  // transpose-side positive
  }

  Value ones_col = tape.constant(Matrix::full(n, 1, 1.0));
  auto direction = [&](Value s, Matrix mask) {
    Value probs = row_softmax(scale(s, 1.0 / temperature));
    Value picked = matmul(mul(probs, tape.constant(std::move(mask))), ones_col);
    return scale(sum_all(log(picked)), -1.0 / n);
  };

  Value by_rows = direction(similarities, std::move(row_mask));
  Value by_cols = direction(transpose(similarities), std::move(col_mask));
  return scale(add(by_rows, by_cols), 0.5);
}

void momentum_update(ModelParams& momentum, const ModelParams& live, double m) {
  std::vector<const Matrix*> source;
  for_each_param(live, [&](const std::string&, const Matrix& p) { source.push_back(&p); });

  size_t i = 0;
  for_each_param(momentum, [&](const std::string& name, Matrix& target) {
    if (i >= source.size() || !target.same_shape(*source[i]))
      throw std::invalid_argument("momentum_update: shape mismatch at " + name);
    const double* src = source[i]->data();
    double* dst = target.data();
    for (int k = 0; k < target.size(); ++k) dst[k] = m * dst[k] + (1.0 - m) * src[k];
    ++i;
  });
  if (i != source.size())
    throw std::invalid_argument("momentum_update: parameter count mismatch");
}

Value total_objective(Tape& tape, const ObjectiveInputs& in, const MemoryBank& video_bank,
                      const MemoryBank& text_bank, const RunConfig& config) {
  const int q = tape.value(in.fused_videos).rows();
  std::vector<int> identity(q);
  for (int i = 0; i < q; ++i) identity[i] = i;

  Value sims = matmul(in.fused_videos, transpose(in.fused_texts));
  if (config.loss == LossKind::kBInfonce)
    return scale(infonce_loss(tape, sims, identity, config.infonce_temperature),
                 config.lambda1);

  Value batch_term = hal_loss(tape, sims, identity, identity, config.gamma, config.mu);
  Value video_term = bank_hal_loss(tape, in.base_videos, in.momentum_texts, text_bank,
                                   config.gamma, config.mu);
  Value text_term = bank_hal_loss(tape, in.base_texts, in.momentum_videos, video_bank,
                                  config.gamma, config.mu);
  return add(scale(batch_term, config.lambda1),
             add(scale(video_term, config.lambda2), scale(text_term, config.lambda2)));
}

}  // namespace hise
