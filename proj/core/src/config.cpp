#include "hise/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hise {

using nlohmann::ordered_json;

const char* loss_kind_name(LossKind kind) {
  return kind == LossKind::kHal ? "hal" : "b-infonce";
}

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("config field '" + field + "' invalid: " + why);
  };
  auto positive = [&](const char* field, double v) {
    if (!(v > 0)) fail(field, "must be > 0");
  };

  if (vocab.subjects < 1) fail("vocab.subjects", "count must be >= 1");
  if (vocab.actions < 1) fail("vocab.actions", "count must be >= 1");
  if (vocab.objects < 1) fail("vocab.objects", "count must be >= 1");
  if (vocab.places < 1) fail("vocab.places", "count must be >= 1");
  if (vocab.attributes < 1) fail("vocab.attributes", "count must be >= 1");

  positive("d_frame", d_frame);
  positive("d_roi", d_roi);
  positive("d_model", d_model);
  positive("pairs", pairs);
  positive("frames_per_video", frames_per_video);
  if (noise_sigma < 0) fail("noise_sigma", "must be >= 0");
  if (distractors_per_frame < 0) fail("distractors_per_frame", "must be >= 0");
  if (conf_threshold < 0 || conf_threshold > 1) fail("conf_threshold", "must be in [0,1]");

  if (max_len < 2) fail("max_len", "needs room for at least one token plus EOS");
  positive("max_frames", max_frames);
  if (frames_per_video > max_frames) fail("frames_per_video", "exceeds max_frames");
  positive("topk_entities", topk_entities);
  if (r_roles < 1) fail("r_roles", "must be >= 1");

  if (alpha < 0 || alpha > 1) fail("alpha", "must be in [0,1]");
  if (!(mu > 0)) fail("mu", "must be > 0");
  if (lambda1 < 0) fail("lambda1", "must be >= 0");
  if (lambda2 < 0) fail("lambda2", "must be >= 0");
  positive("infonce_temperature", infonce_temperature);

  positive("learning_rate", learning_rate);
  if (epochs < 0) fail("epochs", "must be >= 0");
  positive("batch_size", batch_size);
  positive("bank_capacity", bank_capacity);
  if (momentum < 0 || momentum > 1) fail("momentum", "must be in [0,1]");
  if (eval_every < 0) fail("eval_every", "must be >= 0");
}

namespace {

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["d_frame"] = c.d_frame;
  j["d_roi"] = c.d_roi;
  j["vocab"] = {{"subjects", c.vocab.subjects},
                {"actions", c.vocab.actions},
                {"objects", c.vocab.objects},
                {"places", c.vocab.places},
                {"attributes", c.vocab.attributes}};
  j["pairs"] = c.pairs;
  j["frames_per_video"] = c.frames_per_video;
  j["noise_sigma"] = c.noise_sigma;
  j["distractors_per_frame"] = c.distractors_per_frame;
  j["conf_threshold"] = c.conf_threshold;
  j["d_model"] = c.d_model;
  j["max_len"] = c.max_len;
  j["max_frames"] = c.max_frames;
  j["topk_entities"] = c.topk_entities;
  j["r_roles"] = c.r_roles;
  j["use_vds"] = c.use_vds;
  j["use_vhs"] = c.use_vhs;
  j["use_tds"] = c.use_tds;
  j["use_ths"] = c.use_ths;
  j["visual_graph_reasoning"] = c.visual_graph_reasoning;
  j["textual_graph_reasoning"] = c.textual_graph_reasoning;
  j["raw_affinity"] = c.raw_affinity;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["mu"] = c.mu;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["loss"] = loss_kind_name(c.loss);
  j["infonce_temperature"] = c.infonce_temperature;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["bank_capacity"] = c.bank_capacity;
  j["momentum"] = c.momentum;
  j["cosine_lr_schedule"] = c.cosine_lr_schedule;
  j["eval_every"] = c.eval_every;
  return j;
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string RunConfig::to_json_text() const { return to_json(*this).dump(2) + "\n"; }

RunConfig RunConfig::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  static const std::set<std::string> known = {
      "seed", "d_frame", "d_roi", "vocab", "pairs", "frames_per_video", "noise_sigma",
      "distractors_per_frame", "conf_threshold", "d_model", "max_len", "max_frames",
      "topk_entities", "r_roles", "use_vds", "use_vhs", "use_tds", "use_ths",
      "visual_graph_reasoning", "textual_graph_reasoning", "raw_affinity", "alpha", "gamma",
      "mu", "lambda1", "lambda2", "loss", "infonce_temperature", "learning_rate", "epochs",
      "batch_size", "bank_capacity", "momentum", "cosine_lr_schedule", "eval_every"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("config field '" + it.key() + "' is not recognized");
  }

  RunConfig c;
  read_field(j, "seed", c.seed);
  read_field(j, "d_frame", c.d_frame);
  read_field(j, "d_roi", c.d_roi);
  if (j.contains("vocab")) {
    const auto& v = j.at("vocab");
    if (!v.is_object()) throw std::invalid_argument("config field 'vocab' must be an object");
    for (auto it = v.begin(); it != v.end(); ++it) {
      static const std::set<std::string> vk = {"subjects", "actions", "objects", "places",
                                               "attributes"};
      if (!vk.count(it.key()))
        throw std::invalid_argument("config field 'vocab." + it.key() + "' is not recognized");
    }
    read_field(v, "subjects", c.vocab.subjects);
    read_field(v, "actions", c.vocab.actions);
    read_field(v, "objects", c.vocab.objects);
    read_field(v, "places", c.vocab.places);
    read_field(v, "attributes", c.vocab.attributes);
  }
  read_field(j, "pairs", c.pairs);
  read_field(j, "frames_per_video", c.frames_per_video);
  read_field(j, "noise_sigma", c.noise_sigma);
  read_field(j, "distractors_per_frame", c.distractors_per_frame);
  read_field(j, "conf_threshold", c.conf_threshold);
  read_field(j, "d_model", c.d_model);
  read_field(j, "max_len", c.max_len);
  read_field(j, "max_frames", c.max_frames);
  read_field(j, "topk_entities", c.topk_entities);
  read_field(j, "r_roles", c.r_roles);
  read_field(j, "use_vds", c.use_vds);
  read_field(j, "use_vhs", c.use_vhs);
  read_field(j, "use_tds", c.use_tds);
  read_field(j, "use_ths", c.use_ths);
  read_field(j, "visual_graph_reasoning", c.visual_graph_reasoning);
  read_field(j, "textual_graph_reasoning", c.textual_graph_reasoning);
  read_field(j, "raw_affinity", c.raw_affinity);
  read_field(j, "alpha", c.alpha);
  read_field(j, "gamma", c.gamma);
  read_field(j, "mu", c.mu);
  read_field(j, "lambda1", c.lambda1);
  read_field(j, "lambda2", c.lambda2);
  if (j.contains("loss")) {
    const std::string kind = j.at("loss").get<std::string>();
    if (kind == "hal") {
      c.loss = LossKind::kHal;
    } else if (kind == "b-infonce") {
      c.loss = LossKind::kBInfonce;
    } else {
      throw std::invalid_argument("config field 'loss' must be \"hal\" or \"b-infonce\"");
    }
  }
  read_field(j, "infonce_temperature", c.infonce_temperature);
  read_field(j, "learning_rate", c.learning_rate);
  read_field(j, "epochs", c.epochs);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "bank_capacity", c.bank_capacity);
  read_field(j, "momentum", c.momentum);
  read_field(j, "cosine_lr_schedule", c.cosine_lr_schedule);
  read_field(j, "eval_every", c.eval_every);
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::uint64_t RunConfig::hash() const {
  const std::string text = to_json_text();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace hise
