#pragma once

#include <cstdint>
#include <vector>

#include "hise/config.hpp"
#include "hise/params.hpp"
#include "hise/tape.hpp"

namespace hise {

// Single-head scaled dot-product attention with a residual connection:
// row_softmax((X Wq)(X Wk)^T / sqrt(d)) (X Wv) + X.
Value attention_layer(Value x, Value w_q, Value w_k, Value w_v);

// One-hot selector rows; matmul against an embedding table routes gradients
// into the selected rows.
Matrix onehot_rows(const std::vector<int>& ids, int width);
Matrix onehot_tokens(const std::vector<std::uint32_t>& tokens, int width);

// Embeds tokens plus an EOS row, adds positions, runs attention, takes the
// EOS-position output through the projection and l2-normalizes.
Value encode_text_global(Tape& tape, const std::vector<std::uint32_t>& tokens,
                         const TextEncoderP<Value>& enc, const RunConfig& config);

// Projects frame rows, adds frame positions, runs attention, mean-pools the
// rows through the projection and l2-normalizes.
Value encode_video_global(Tape& tape, const std::vector<std::vector<double>>& frames,
                          const VideoEncoderP<Value>& enc, const RunConfig& config);

// affine(x, w, b) = x w + 1 b, with the bias tiled over rows through a
// constant ones column so its gradient stays on the tape.
Value affine(Value x, Value w, Value b);

}  // namespace hise
