#pragma once

#include <optional>
#include <vector>

#include "hise/config.hpp"
#include "hise/data.hpp"
#include "hise/encoders.hpp"

namespace hise {

struct TseStats {
  int empty_tds = 0;  // texts with neither actions nor entities
};

// Node matrix rows are ordered [occurrence; actions...; entities...].
// Returns the initialized (1 + A + E) x d_model matrix.
Value init_role_nodes(Tape& tape, const TextRecord& text, const TseP<Value>& tse,
                      Value base_token_embedding, const RunConfig& config);

// Typed adjacency, one matrix per relation. Entity<->action edges live in
// relations [0, r_roles); action<->occurrence edges in the reserved relation
// r_roles. Every matrix is row-normalized.
std::vector<Matrix> build_role_graph(const TextRecord& text, int r_roles);

// E^t = relu(sum_r G^r E^0 W^r + E^0)
Value rgcn_layer(Value nodes, const std::vector<Value>& graphs,
                 const std::vector<Value>& relation_weights);

struct TextualSemantics {
  std::optional<Value> ths;  // occurrence node after reasoning
  std::optional<Value> tds;  // sum over action + entity nodes
  std::optional<Value> ts;   // mean of the enabled components
};

// Full TSE path with the configured component and reasoning toggles. With
// textual_graph_reasoning off the R-GCN is bypassed and TDS becomes the mean
// of the initialized action/entity rows.
TextualSemantics textual_semantics(Tape& tape, const TextRecord& text, const ModelP<Value>& model,
                                   const RunConfig& config, TseStats* stats = nullptr);

}  // namespace hise
