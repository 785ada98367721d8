#include "hise/params.hpp"

#include <cmath>

namespace hise {

namespace {

Matrix xavier(int rows, int cols, std::mt19937_64& rng) {
  return Matrix::gaussian(rows, cols, std::sqrt(2.0 / (rows + cols)), rng);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ModelParams make_model_params(const RunConfig& c) {
  const int d = c.d_model;
  ModelParams p;

  auto text_encoder = [&](TextEncoderP<Matrix>& e) {
    e.token_embedding = Matrix(c.vocab_size() + 1, d);
    e.position = Matrix(c.max_len, d);
    e.w_q = Matrix(d, d);
    e.w_k = Matrix(d, d);
    e.w_v = Matrix(d, d);
    e.out_proj = Matrix(d, d);
  };
  text_encoder(p.text);
  text_encoder(p.tse.occurrence);

  p.video.frame_projection = Matrix(c.d_frame, d);
  p.video.frame_position = Matrix(c.max_frames, d);
  p.video.w_q = Matrix(d, d);
  p.video.w_k = Matrix(d, d);
  p.video.w_v = Matrix(d, d);
  p.video.out_proj = Matrix(d, d);

  p.tse.relation_weights.assign(static_cast<size_t>(c.r_roles) + 1, Matrix(d, d));

  p.vse.concept_w = Matrix(d, d);
  p.vse.concept_b = Matrix(1, d);
  p.vse.appearance_proj = Matrix(c.d_roi, d);
  p.vse.position_proj = Matrix(4, d);
  p.vse.node_w = Matrix(2 * d, d);
  p.vse.node_b = Matrix(1, d);
  p.vse.affinity_query = Matrix(d, d);
  p.vse.affinity_key = Matrix(d, d);
  p.vse.gcn_w = Matrix(d, d);
  return p;
}

ModelParams init_model_params(const RunConfig& c, std::mt19937_64& rng) {
  ModelParams p = make_model_params(c);
  const double embed_dev = 1.0 / std::sqrt(static_cast<double>(c.d_model));
  for_each_param(p, [&](const std::string& name, Matrix& m) {
    if (ends_with(name, "_b")) return;  // biases start at zero
    if (ends_with(name, "token_embedding")) {
      m = Matrix::gaussian(m.rows(), m.cols(), embed_dev, rng);
    } else if (ends_with(name, "position")) {
      m = Matrix::gaussian(m.rows(), m.cols(), 0.01, rng);
    } else {
      m = xavier(m.rows(), m.cols(), rng);
    }
  });
  return p;
}

std::vector<Matrix*> parameter_list(ModelParams& params) {
  std::vector<Matrix*> out;
  for_each_param(params, [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

LiftedModel lift_model(Tape& tape, const ModelParams& params, bool needs_grad) {
  LiftedModel lifted;
  lifted.refs.tse.relation_weights.resize(params.tse.relation_weights.size());

  std::vector<Value*> slots;
  for_each_param(lifted.refs, [&](const std::string&, Value& v) { slots.push_back(&v); });

  size_t i = 0;
  for_each_param(params, [&](const std::string&, const Matrix& m) {
    Value v = tape.leaf(m, needs_grad);
    *slots[i++] = v;
    lifted.leaves.push_back(v);
  });
  return lifted;
}

}  // namespace hise
