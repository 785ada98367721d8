#include "hise/encoders.hpp"

#include <cmath>
#include <stdexcept>

namespace hise {

Value attention_layer(Value x, Value w_q, Value w_k, Value w_v) {
  const int d = x.tape->value(x).cols();
  Value q = matmul(x, w_q);
  Value k = matmul(x, w_k);
  Value scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(d)));
  Value attn = row_softmax(scores);
  return add(matmul(attn, matmul(x, w_v)), x);
}

Matrix onehot_rows(const std::vector<int>& ids, int width) {
  Matrix m(static_cast<int>(ids.size()), width);
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= width)
      throw std::invalid_argument("onehot_rows: id " + std::to_string(ids[r]) +
                                  " out of range [0," + std::to_string(width) + ")");
    m(static_cast<int>(r), ids[r]) = 1.0;
  }
  return m;
}

Matrix onehot_tokens(const std::vector<std::uint32_t>& tokens, int width) {
  std::vector<int> ids(tokens.begin(), tokens.end());
  return onehot_rows(ids, width);
}

Value encode_text_global(Tape& tape, const std::vector<std::uint32_t>& tokens,
                         const TextEncoderP<Value>& enc, const RunConfig& config) {
  if (tokens.empty()) throw std::invalid_argument("encode_text_global: empty token sequence");
  const int len = static_cast<int>(tokens.size()) + 1;  // appended EOS
  if (len > config.max_len)
    throw std::invalid_argument("encode_text_global: " + std::to_string(tokens.size()) +
                                " tokens exceed max_len " + std::to_string(config.max_len) +
                                " minus EOS");

  std::vector<int> ids(tokens.begin(), tokens.end());
  ids.push_back(config.eos_token());
  Value tok_sel = tape.constant(onehot_rows(ids, config.vocab_size() + 1));

  std::vector<int> positions(len);
  for (int i = 0; i < len; ++i) positions[i] = i;
  Value pos_sel = tape.constant(onehot_rows(positions, config.max_len));

  Value x = add(matmul(tok_sel, enc.token_embedding), matmul(pos_sel, enc.position));
  Value h = attention_layer(x, enc.w_q, enc.w_k, enc.w_v);
  Value eos = select_row(h, len - 1);
  return l2_normalize_rows(matmul(eos, enc.out_proj));
}

Value encode_video_global(Tape& tape, const std::vector<std::vector<double>>& frames,
                          const VideoEncoderP<Value>& enc, const RunConfig& config) {
  if (frames.empty()) throw std::invalid_argument("encode_video_global: empty frame sequence");
  const int n = static_cast<int>(frames.size());
  if (n > config.max_frames)
    throw std::invalid_argument("encode_video_global: " + std::to_string(n) +
                                " frames exceed max_frames " + std::to_string(config.max_frames));

  Value frame_rows = tape.constant(Matrix::from_rows(frames));
  std::vector<int> positions(n);
  for (int i = 0; i < n; ++i) positions[i] = i;
  Value pos_sel = tape.constant(onehot_rows(positions, config.max_frames));

  Value x = add(matmul(frame_rows, enc.frame_projection), matmul(pos_sel, enc.frame_position));
  Value h = attention_layer(x, enc.w_q, enc.w_k, enc.w_v);
  Value pooled = mean_rows(h);
  return l2_normalize_rows(matmul(pooled, enc.out_proj));
}

Value affine(Value x, Value w, Value b) {
  const int rows = x.tape->value(x).rows();
  Value ones = x.tape->constant(Matrix::full(rows, 1, 1.0));
  return add(matmul(x, w), matmul(ones, b));
}

}  // namespace hise
