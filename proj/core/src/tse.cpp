#include "hise/tse.hpp"

#include <stdexcept>

namespace hise {

namespace {

Value span_mean_embedding(Tape& tape, const std::vector<std::uint32_t>& tokens,
                          Value token_embedding, int vocab_rows) {
  Value sel = tape.constant(onehot_tokens(tokens, vocab_rows));
  return mean_rows(matmul(sel, token_embedding));
}

void normalize_rows_to_one(Matrix& g) {
  for (int r = 0; r < g.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < g.cols(); ++c) sum += g(r, c);
    if (sum == 0.0) continue;
    for (int c = 0; c < g.cols(); ++c) g(r, c) /= sum;
  }
}

}  // namespace

Value init_role_nodes(Tape& tape, const TextRecord& text, const TseP<Value>& tse,
                      Value base_token_embedding, const RunConfig& config) {
  const int vocab_rows = config.vocab_size() + 1;

  std::vector<Value> rows;
  rows.reserve(1 + text.actions.size() + text.entities.size());
  rows.push_back(encode_text_global(tape, text.occurrence_tokens(), tse.occurrence, config));

  for (size_t a = 0; a < text.actions.size(); ++a) {
    if (text.actions[a].empty())
      throw std::invalid_argument("text '" + text.text_id + "': action " + std::to_string(a) +
                                  " has an empty token span");
    rows.push_back(span_mean_embedding(tape, text.actions[a], base_token_embedding, vocab_rows));
  }
  for (size_t e = 0; e < text.entities.size(); ++e) {
    if (text.entities[e].tokens.empty())
      throw std::invalid_argument("text '" + text.text_id + "': entity " + std::to_string(e) +
                                  " has an empty token span");
    rows.push_back(
        span_mean_embedding(tape, text.entities[e].tokens, base_token_embedding, vocab_rows));
  }
  return concat_rows(rows);
}

std::vector<Matrix> build_role_graph(const TextRecord& text, int r_roles) {
  const int actions = static_cast<int>(text.actions.size());
  const int entities = static_cast<int>(text.entities.size());
  const int n = 1 + actions + entities;

  std::vector<Matrix> graphs(static_cast<size_t>(r_roles) + 1, Matrix(n, n));
  for (int e = 0; e < entities; ++e) {
    const RoleEntity& re = text.entities[e];
    const int entity_row = 1 + actions + e;
    const int action_row = 1 + static_cast<int>(re.action_index);
    Matrix& g = graphs[re.role_id];
    g(entity_row, action_row) = 1.0;
    g(action_row, entity_row) = 1.0;
  }
  Matrix& reserved = graphs[r_roles];
  for (int a = 0; a < actions; ++a) {
    reserved(0, 1 + a) = 1.0;
    reserved(1 + a, 0) = 1.0;
  }
  for (Matrix& g : graphs) normalize_rows_to_one(g);
  return graphs;
}

Value rgcn_layer(Value nodes, const std::vector<Value>& graphs,
                 const std::vector<Value>& relation_weights) {
  if (graphs.size() != relation_weights.size())
    throw std::invalid_argument("rgcn_layer: " + std::to_string(graphs.size()) +
                                " graphs vs " + std::to_string(relation_weights.size()) +
                                " relation weights");
  Value acc = nodes;  // residual
  for (size_t r = 0; r < graphs.size(); ++r)
    acc = add(acc, matmul(matmul(graphs[r], nodes), relation_weights[r]));
  return relu(acc);
}

TextualSemantics textual_semantics(Tape& tape, const TextRecord& text,
                                   const ModelP<Value>& model, const RunConfig& config,
                                   TseStats* stats) {
  TextualSemantics out;
  if (!config.use_ths && !config.use_tds) return out;

  Value nodes = init_role_nodes(tape, text, model.tse, model.text.token_embedding, config);
  const int n = tape.value(nodes).rows();
  const int discrete = n - 1;  // action + entity rows

  Value reasoned = nodes;
  if (config.textual_graph_reasoning) {
    std::vector<Matrix> graph_mats = build_role_graph(text, config.r_roles);
    std::vector<Value> graphs;
    graphs.reserve(graph_mats.size());
    for (Matrix& g : graph_mats) graphs.push_back(tape.constant(std::move(g)));
    reasoned = rgcn_layer(nodes, graphs, model.tse.relation_weights);
  }

  if (config.use_ths) out.ths = select_row(reasoned, 0);

  if (config.use_tds) {
    if (discrete == 0) {
      if (stats) ++stats->empty_tds;
      out.tds = tape.constant(Matrix(1, config.d_model));
    } else {
      // sum under graph reasoning, mean under the mean-pooling ablation
      const double weight = config.textual_graph_reasoning ? 1.0 : 1.0 / discrete;
      Matrix sel(1, n);
      for (int i = 1; i < n; ++i) sel(0, i) = weight;
      out.tds = matmul(tape.constant(std::move(sel)), reasoned);
    }
  }

  if (out.ths && out.tds) {
    out.ts = scale(add(*out.ths, *out.tds), 0.5);
  } else if (out.ths) {
    out.ts = out.ths;
  } else {
    out.ts = out.tds;
  }
  return out;
}

}  // namespace hise
