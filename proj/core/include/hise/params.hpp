#pragma once

#include <random>
#include <string>
#include <vector>

#include "hise/config.hpp"
#include "hise/matrix.hpp"
#include "hise/tape.hpp"

namespace hise {

// Parameter containers are generic over the slot type so the same structure
// holds owned matrices (T = Matrix) or tape handles (T = Value).

template <typename T>
struct TextEncoderP {
  T token_embedding;  // (vocab+1) x d_model, last row is EOS
  T position;         // max_len x d_model
  T w_q, w_k, w_v;    // d_model x d_model
  T out_proj;         // d_model x d_model
};

template <typename T>
struct VideoEncoderP {
  T frame_projection;  // d_frame x d_model
  T frame_position;    // max_frames x d_model
  T w_q, w_k, w_v;
  T out_proj;
};

template <typename T>
struct TseP {
  // One weight per entity role plus the reserved action->occurrence relation.
  std::vector<T> relation_weights;  // (r_roles + 1) x [d_model x d_model]
  TextEncoderP<T> occurrence;       // separate encoder, not sharing weights
};

template <typename T>
struct VseP {
  T concept_w, concept_b;          // d_model x d_model, 1 x d_model
  T appearance_proj;               // d_roi x d_model
  T position_proj;                 // 4 x d_model
  T node_w, node_b;                // 2*d_model x d_model, 1 x d_model
  T affinity_query, affinity_key;  // d_model x d_model
  T gcn_w;                         // d_model x d_model
};

template <typename T>
struct ModelP {
  TextEncoderP<T> text;
  VideoEncoderP<T> video;
  TseP<T> tse;
  VseP<T> vse;
};

using ModelParams = ModelP<Matrix>;
using ModelRefs = ModelP<Value>;

// Visits every parameter slot in one fixed order with a stable name. All
// order-sensitive consumers (Adam, checkpoints, lifting) go through here.
template <typename T, typename F>
void for_each_param(ModelP<T>& p, F&& f) {
  auto text_encoder = [&](const std::string& prefix, TextEncoderP<T>& e) {
    f(prefix + ".token_embedding", e.token_embedding);
    f(prefix + ".position", e.position);
    f(prefix + ".w_q", e.w_q);
    f(prefix + ".w_k", e.w_k);
    f(prefix + ".w_v", e.w_v);
    f(prefix + ".out_proj", e.out_proj);
  };
  text_encoder("text", p.text);
  f("video.frame_projection", p.video.frame_projection);
  f("video.frame_position", p.video.frame_position);
  f("video.w_q", p.video.w_q);
  f("video.w_k", p.video.w_k);
  f("video.w_v", p.video.w_v);
  f("video.out_proj", p.video.out_proj);
  for (size_t r = 0; r < p.tse.relation_weights.size(); ++r)
    f("tse.relation_w" + std::to_string(r), p.tse.relation_weights[r]);
  text_encoder("tse.occurrence", p.tse.occurrence);
  f("vse.concept_w", p.vse.concept_w);
  f("vse.concept_b", p.vse.concept_b);
  f("vse.appearance_proj", p.vse.appearance_proj);
  f("vse.position_proj", p.vse.position_proj);
  f("vse.node_w", p.vse.node_w);
  f("vse.node_b", p.vse.node_b);
  f("vse.affinity_query", p.vse.affinity_query);
  f("vse.affinity_key", p.vse.affinity_key);
  f("vse.gcn_w", p.vse.gcn_w);
}

template <typename T, typename F>
void for_each_param(const ModelP<T>& p, F&& f) {
  for_each_param(const_cast<ModelP<T>&>(p),
                 [&](const std::string& name, T& slot) { f(name, const_cast<const T&>(slot)); });
}

// Allocates all parameter shapes for the configured dimensions (zeros).
ModelParams make_model_params(const RunConfig& config);

// Shape allocation plus the deterministic random initialization.
ModelParams init_model_params(const RunConfig& config, std::mt19937_64& rng);

std::vector<Matrix*> parameter_list(ModelParams& params);

struct LiftedModel {
  ModelRefs refs;
  std::vector<Value> leaves;  // for_each_param order
};

// Records every parameter as a tape leaf. Gradients are tracked only when
// needs_grad is set (momentum/eval forwards lift constants).
LiftedModel lift_model(Tape& tape, const ModelParams& params, bool needs_grad = true);

}  // namespace hise
