#pragma once

#include <cstdint>
#include <string>

namespace hise {

enum class LossKind { kHal, kBInfonce };

struct VocabCounts {
  int subjects = 8;
  int actions = 8;
  int objects = 8;
  int places = 8;
  int attributes = 8;

  int total() const { return subjects + actions + objects + places + attributes; }
  // token id layout: [subjects | actions | objects | places | attributes]
  int subject_base() const { return 0; }
  int action_base() const { return subjects; }
  int object_base() const { return subjects + actions; }
  int place_base() const { return subjects + actions + objects; }
  int attribute_base() const { return subjects + actions + objects + places; }
};

// One configuration drives fixture generation, the model, training and
// evaluation, so a single hash identifies a whole experiment.
struct RunConfig {
  std::uint64_t seed = 0;

  // fixture generation
  int d_frame = 16;
  int d_roi = 8;
  VocabCounts vocab;
  int pairs = 64;
  int frames_per_video = 8;
  double noise_sigma = 0.05;
  int distractors_per_frame = 2;
  double conf_threshold = 0.5;

  // model dimensions
  int d_model = 32;
  int max_len = 16;
  int max_frames = 16;
  int topk_entities = 8;
  int r_roles = 3;

  // semantic component toggles
  bool use_vds = true;
  bool use_vhs = true;
  bool use_tds = true;
  bool use_ths = true;
  bool visual_graph_reasoning = true;
  bool textual_graph_reasoning = true;
  bool raw_affinity = false;  // feed unnormalized affinity logits into the GCN

  // objective
  double alpha = 0.9;
  double gamma = 0.3;
  double mu = 0.1;
  double lambda1 = 10.0;
  double lambda2 = 0.1;
  LossKind loss = LossKind::kHal;
  double infonce_temperature = 0.07;

  // optimization
  double learning_rate = 1e-3;
  int epochs = 200;
  int batch_size = 16;
  int bank_capacity = 128;
  double momentum = 0.995;
  bool cosine_lr_schedule = false;
  int eval_every = 0;  // epochs between mid-training evaluations; 0 = final only

  int vocab_size() const { return vocab.total(); }
  int eos_token() const { return vocab_size(); }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  std::string to_json_text() const;
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_json_file(const std::string& path);

  // FNV-1a over the canonical JSON serialization.
  std::uint64_t hash() const;
};

const char* loss_kind_name(LossKind kind);

}  // namespace hise
