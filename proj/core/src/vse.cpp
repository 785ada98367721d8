#include "hise/vse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hise {

std::vector<EntityGroup> select_topk_entities(const VideoRecord& video, int k,
                                              double conf_threshold) {
  if (k < 1) throw std::invalid_argument("select_topk_entities: K must be >= 1");

  std::map<std::pair<std::uint32_t, std::uint32_t>, EntityGroup> groups;
  for (const auto& frame_dets : video.entities) {
    for (const EntityDetection& det : frame_dets) {
      if (det.confidence < conf_threshold) continue;
      EntityGroup& g = groups[{det.object_token, det.attribute_token}];
      if (g.frequency == 0) {
        g.object_token = det.object_token;
        g.attribute_token = det.attribute_token;
        g.mean_roi.assign(det.roi.size(), 0.0);
      }
      ++g.frequency;
      g.total_confidence += det.confidence;
      for (size_t i = 0; i < det.roi.size(); ++i) g.mean_roi[i] += det.roi[i];
      for (int i = 0; i < 4; ++i) g.mean_bbox[i] += det.bbox[i];
    }
  }
  if (groups.empty())
    throw std::runtime_error("video '" + video.video_id + "': no entities above threshold");

  std::vector<EntityGroup> ranked;
  ranked.reserve(groups.size());
  for (auto& [key, g] : groups) {
    for (double& x : g.mean_roi) x /= g.frequency;
    for (double& x : g.mean_bbox) x /= g.frequency;
    ranked.push_back(std::move(g));
  }
  std::sort(ranked.begin(), ranked.end(), [](const EntityGroup& a, const EntityGroup& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    if (a.total_confidence != b.total_confidence) return a.total_confidence > b.total_confidence;
    if (a.object_token != b.object_token) return a.object_token < b.object_token;
    return a.attribute_token < b.attribute_token;
  });
  if (static_cast<int>(ranked.size()) > k) ranked.resize(k);
  return ranked;
}

VisualEntityNode entity_node_init(Tape& tape, const EntityGroup& group, const VseP<Value>& vse,
                                  Value base_token_embedding, const RunConfig& config) {
  const int vocab_rows = config.vocab_size() + 1;

  VisualEntityNode node;
  node.object_token = group.object_token;
  node.attribute_token = group.attribute_token;
  node.total_confidence = group.total_confidence;

  Value obj = matmul(tape.constant(onehot_tokens({group.object_token}, vocab_rows)),
                     base_token_embedding);
  Value attr = matmul(tape.constant(onehot_tokens({group.attribute_token}, vocab_rows)),
                      base_token_embedding);
  node.concept_rep = relu(affine(add(obj, attr), vse.concept_w, vse.concept_b));

  Matrix roi(1, static_cast<int>(group.mean_roi.size()));
  for (size_t i = 0; i < group.mean_roi.size(); ++i) roi(0, static_cast<int>(i)) = group.mean_roi[i];
  node.appearance = matmul(tape.constant(std::move(roi)), vse.appearance_proj);

  Matrix bbox(1, 4);
  for (int i = 0; i < 4; ++i) bbox(0, i) = group.mean_bbox[i];
  node.position = matmul(tape.constant(std::move(bbox)), vse.position_proj);

  Value combined = concat_cols({node.concept_rep, add(node.appearance, node.position)});
  node.init = relu(affine(combined, vse.node_w, vse.node_b));
  return node;
}

Value affinity_matrix(Value nodes, Value w_query, Value w_key, int d_model, bool raw) {
  Value q = matmul(nodes, w_query);
  Value k = matmul(nodes, w_key);
  Value logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(d_model)));
  return raw ? logits : row_softmax(logits);
}

Value gcn_layer(Value nodes, Value affinity, Value w) {
  return relu(add(matmul(matmul(affinity, nodes), w), nodes));
}

VisualSemantics visual_semantics(Tape& tape, const VideoRecord& video,
                                 const ModelP<Value>& model, const RunConfig& config) {
  VisualSemantics out;
  if (!config.use_vds && !config.use_vhs) return out;

  if (config.use_vds) {
    std::vector<EntityGroup> groups =
        select_topk_entities(video, config.topk_entities, config.conf_threshold);
    std::vector<Value> rows;
    rows.reserve(groups.size());
    for (const EntityGroup& g : groups)
      rows.push_back(
          entity_node_init(tape, g, model.vse, model.text.token_embedding, config).init);
    Value nodes = concat_rows(rows);

    if (config.visual_graph_reasoning) {
      Value h = affinity_matrix(nodes, model.vse.affinity_query, model.vse.affinity_key,
                                config.d_model, config.raw_affinity);
      nodes = gcn_layer(nodes, h, model.vse.gcn_w);
    }
    out.vds = mean_rows(nodes);
  }

  if (config.use_vhs)
    out.vhs = encode_text_global(tape, video.caption_tokens, model.text, config);

  if (out.vds && out.vhs) {
    out.vs = scale(add(*out.vds, *out.vhs), 0.5);
  } else if (out.vds) {
    out.vs = out.vds;
  } else {
    out.vs = out.vhs;
  }
  return out;
}

}  // namespace hise
