#include "hise/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"

namespace hise {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<int> pairing_of(const DatasetSplit& split) {
  std::vector<int> video_of_text(split.texts.size());
  for (size_t r = 0; r < split.texts.size(); ++r) {
    const int q = split.video_index(split.texts[r].video_id);
    if (q < 0)
      throw TrainError("text '" + split.texts[r].text_id + "' references missing video");
    video_of_text[r] = q;
  }
  return video_of_text;
}

}  // namespace

TrainerState::TrainerState(const RunConfig& config)
    : adam(AdamConfig{.learning_rate = config.learning_rate}),
      video_bank(config.bank_capacity),
      text_bank(config.bank_capacity) {}

TrainerState make_trainer_state(const RunConfig& config) {
  config.validate();
  TrainerState state(config);
  std::mt19937_64 rng(config.seed);
  state.live = init_model_params(config, rng);
  state.momentum = state.live;
  return state;
}

int steps_per_epoch(const DatasetSplit& split, const RunConfig& config) {
  const int n = static_cast<int>(split.texts.size());
  return (n + config.batch_size - 1) / config.batch_size;
}

double train_step(TrainerState& state, const DatasetSplit& split,
                  const std::vector<int>& batch, const RunConfig& config) {
  const std::vector<int> video_of_text = pairing_of(split);

  Tape tape;
  LiftedModel lifted = lift_model(tape, state.live, /*needs_grad=*/true);

  const int q = static_cast<int>(batch.size());
  std::vector<Value> fused_v, fused_t, base_v, base_t;
  Matrix momentum_videos(q, config.d_model);
  Matrix momentum_texts(q, config.d_model);

  for (int i = 0; i < q; ++i) {
    const TextRecord& text = split.texts[batch[i]];
    const VideoRecord& video = split.videos[video_of_text[batch[i]]];

    ItemForward ft = forward_text(tape, text, lifted.refs, config, &state.tse_stats);
    ItemForward fv = forward_video(tape, video, lifted.refs, config);
    fused_t.push_back(ft.fused);
    fused_v.push_back(fv.fused);
    base_t.push_back(ft.base);
    base_v.push_back(fv.base);

    const Matrix mv = base_video_embedding(state.momentum, video, config);
    const Matrix mt = base_text_embedding(state.momentum, text, config);
    for (int c = 0; c < config.d_model; ++c) {
      momentum_videos(i, c) = mv(0, c);
      momentum_texts(i, c) = mt(0, c);
    }
  }

  ObjectiveInputs inputs{concat_rows(fused_v), concat_rows(fused_t), concat_rows(base_v),
                         concat_rows(base_t),  momentum_videos,      momentum_texts};
  Value loss = total_objective(tape, inputs, state.video_bank, state.text_bank, config);

  const double loss_value = tape.value(loss)(0, 0);
  if (!std::isfinite(loss_value))
    throw TrainError("non-finite loss at step " + std::to_string(state.step + 1));

  tape.backward(loss);

  std::vector<Matrix*> params = parameter_list(state.live);
  std::vector<const Matrix*> grads;
  grads.reserve(lifted.leaves.size());
  for (Value leaf : lifted.leaves) grads.push_back(&tape.grad(leaf));
  state.adam.step(params, grads);

  momentum_update(state.momentum, state.live, config.momentum);
  state.text_bank.push(momentum_texts);
  state.video_bank.push(momentum_videos);

  ++state.step;
  return loss_value;
}

TrainResult train(TrainerState& state, const DatasetSplit& split, const RunConfig& config,
                  std::ostream* progress, int until_epoch) {
  validate_split(split, FixtureLimits{config.vocab_size(), config.r_roles});
  if (until_epoch < 0) until_epoch = config.epochs;

  const int per_epoch = steps_per_epoch(split, config);
  const std::int64_t total_steps =
      static_cast<std::int64_t>(config.epochs) * per_epoch;

  TrainResult result;
  std::vector<int> order(split.texts.size());

  for (; state.epoch < until_epoch; ++state.epoch) {
    // each epoch's order is a pure function of (seed, epoch) so a reloaded
    // checkpoint resumes the exact sequence
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, static_cast<std::uint64_t>(state.epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    int steps = 0;
    for (size_t at = 0; at < order.size(); at += config.batch_size) {
      const size_t end = std::min(order.size(), at + config.batch_size);
      std::vector<int> batch(order.begin() + at, order.begin() + end);

      if (config.cosine_lr_schedule && total_steps > 0) {
        const double phase = static_cast<double>(state.step) / total_steps;
        state.adam.set_learning_rate(config.learning_rate * 0.5 *
                                     (1.0 + std::cos(3.14159265358979323846 * phase)));
      }
      epoch_loss += train_step(state, split, batch, config);
      ++steps;
    }

    TrainHistoryEntry entry;
    entry.epoch = state.epoch + 1;
    entry.mean_loss = steps > 0 ? epoch_loss / steps : 0.0;
    if (config.eval_every > 0 && (state.epoch + 1) % config.eval_every == 0)
      entry.metrics = evaluate(state.live, split, config);
    if (progress) {
      *progress << "epoch " << entry.epoch << " loss " << entry.mean_loss;
      if (entry.metrics)
        *progress << " t2v R@1 " << entry.metrics->t2v.r1 << " v2t R@1 "
                  << entry.metrics->v2t.r1;
      *progress << "\n";
    }
    result.history.push_back(std::move(entry));
  }

  result.final_metrics = evaluate(state.live, split, config);
  if (progress) {
    *progress << "final t2v R@1 " << result.final_metrics.t2v.r1 << " v2t R@1 "
              << result.final_metrics.v2t.r1 << " R@Sum " << result.final_metrics.r_sum << "\n";
    if (state.tse_stats.empty_tds > 0)
      *progress << "warning: " << state.tse_stats.empty_tds
                << " TDS evaluations had no action or entity nodes\n";
  }
  return result;
}

std::string train_history_json(const TrainResult& result) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : result.history) {
    nlohmann::ordered_json entry;
    entry["epoch"] = e.epoch;
    entry["loss"] = e.mean_loss;
    if (e.metrics) entry["metrics"] = nlohmann::ordered_json::parse(e.metrics->to_json_text());
    arr.push_back(std::move(entry));
  }
  nlohmann::ordered_json j;
  j["history"] = std::move(arr);
  j["final"] = nlohmann::ordered_json::parse(result.final_metrics.to_json_text());
  return j.dump(2) + "\n";
}

}  // namespace hise
