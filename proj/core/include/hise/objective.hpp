#pragma once

#include <deque>
#include <vector>

#include "hise/config.hpp"
#include "hise/params.hpp"
#include "hise/tape.hpp"

namespace hise {

// Fixed-capacity FIFO queue of unit-norm embedding rows for one modality.
class MemoryBank {
 public:
  explicit MemoryBank(int capacity);

  // Appends rows oldest-to-newest and evicts from the front past capacity.
  // Rows must be unit-norm within 1e-9.
  void push(const Matrix& rows);

  int size() const { return static_cast<int>(rows_.size()); }
  int capacity() const { return capacity_; }
  bool empty() const { return rows_.empty(); }

  // size() x d snapshot, oldest first.
  Matrix snapshot() const;
  void restore(const Matrix& rows);

 private:
  int capacity_;
  std::deque<std::vector<double>> rows_;
};

// Convex combination alpha*base + (1-alpha)*semantic, re-normalized. At
// alpha == 1 the base embedding is returned unchanged so disabling the
// semantic branch is exactly equivalent.
Value fuse(Value base, Value semantic, double alpha);

// Hubness-aware contrastive loss over a Q x R similarity matrix. Positions
// are given per direction: row_positives[q] is the positive column of row q
// and col_positives[r] the positive row of column r; in-batch training uses
// the identity on both.
Value hal_loss(Tape& tape, Value similarities, const std::vector<int>& row_positives,
               const std::vector<int>& col_positives, double gamma, double mu);

// Single-direction HAL term against a memory bank: each anchor's positive is
// its momentum-encoded counterpart, negatives are the bank rows. Positives
// and bank rows enter as constants, so no gradient reaches them. All rows
// must be unit-norm (cosine reduces to a dot product).
Value bank_hal_loss(Tape& tape, Value anchors, const Matrix& momentum_positives,
                    const MemoryBank& bank, double gamma, double mu);

// Bidirectional InfoNCE over a square similarity matrix with a bijective
// positive assignment (positives[q] = column of row q), averaged over the
// two directions.
Value infonce_loss(Tape& tape, Value similarities, const std::vector<int>& positives,
                   double temperature);

// momentum <- m * momentum + (1 - m) * live, every parameter.
void momentum_update(ModelParams& momentum, const ModelParams& live, double m);

struct ObjectiveInputs {
  Value fused_videos;  // Q x d, unit rows
  Value fused_texts;   // Q x d, unit rows, row q paired with video q
  Value base_videos;   // Q x d
  Value base_texts;    // Q x d
  Matrix momentum_videos;  // Q x d, momentum-encoder outputs
  Matrix momentum_texts;
};

// lambda1 * L_HAL(V^F, T^F) + lambda2 * L_HAL(V, B_T) + lambda2 * L_HAL(T, B_V).
// With the B-InfoNCE objective the first term is swapped and the bank terms
// are dropped. Bank and momentum mutation happen outside, after backward.
Value total_objective(Tape& tape, const ObjectiveInputs& in, const MemoryBank& video_bank,
                      const MemoryBank& text_bank, const RunConfig& config);

}  // namespace hise
