#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hise/config.hpp"
#include "hise/data.hpp"
#include "hise/encoders.hpp"

namespace hise {

// Detections pooled by (object_token, attribute_token) identity.
struct EntityGroup {
  std::uint32_t object_token = 0;
  std::uint32_t attribute_token = 0;
  int frequency = 0;
  double total_confidence = 0.0;
  std::vector<double> mean_roi;
  double mean_bbox[4] = {0, 0, 0, 0};
};

// Confidence filter, grouping, and ranking by (frequency desc, total
// confidence desc, object_token asc, attribute_token asc); keeps at most K.
std::vector<EntityGroup> select_topk_entities(const VideoRecord& video, int k,
                                              double conf_threshold);

struct VisualEntityNode {
  Value concept_rep;     // MLP(object embedding + attribute embedding)
  Value appearance;  // roi projection
  Value position;    // bbox projection
  Value init;        // MLP([concept, appearance + position])
  std::uint32_t object_token = 0;
  std::uint32_t attribute_token = 0;
  double total_confidence = 0.0;
};

VisualEntityNode entity_node_init(Tape& tape, const EntityGroup& group, const VseP<Value>& vse,
                                  Value base_token_embedding, const RunConfig& config);

// Pairwise affinity logits (E Wq)(E Wk)^T / sqrt(d_model); row-softmaxed
// unless raw is requested.
Value affinity_matrix(Value nodes, Value w_query, Value w_key, int d_model, bool raw = false);

// E = relu(H E^0 W + E^0)
Value gcn_layer(Value nodes, Value affinity, Value w);

struct VisualSemantics {
  std::optional<Value> vds;  // mean over entity node rows
  std::optional<Value> vhs;  // encoded caption, shared base text encoder
  std::optional<Value> vs;   // mean of the enabled components
};

// Full VSE path with the configured component and reasoning toggles. With
// visual_graph_reasoning off the GCN is bypassed and VDS becomes the mean of
// the initialized node rows.
VisualSemantics visual_semantics(Tape& tape, const VideoRecord& video,
                                 const ModelP<Value>& model, const RunConfig& config);

}  // namespace hise
