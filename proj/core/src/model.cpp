#include "hise/model.hpp"

namespace hise {

bool text_semantics_active(const RunConfig& config) {
  return (config.use_tds || config.use_ths) && config.alpha < 1.0;
}

bool video_semantics_active(const RunConfig& config) {
  return (config.use_vds || config.use_vhs) && config.alpha < 1.0;
}

ItemForward forward_text(Tape& tape, const TextRecord& text, const ModelP<Value>& model,
                         const RunConfig& config, TseStats* stats) {
  ItemForward out;
  out.base = encode_text_global(tape, text.tokens, model.text, config);
  out.fused = out.base;
  if (text_semantics_active(config)) {
    TextualSemantics sem = textual_semantics(tape, text, model, config, stats);
    out.fused = fuse(out.base, *sem.ts, config.alpha);
  }
  return out;
}

ItemForward forward_video(Tape& tape, const VideoRecord& video, const ModelP<Value>& model,
                          const RunConfig& config) {
  ItemForward out;
  out.base = encode_video_global(tape, video.frames, model.video, config);
  out.fused = out.base;
  if (video_semantics_active(config)) {
    VisualSemantics sem = visual_semantics(tape, video, model, config);
    out.fused = fuse(out.base, *sem.vs, config.alpha);
  }
  return out;
}

namespace {

template <typename F>
Matrix scratch_forward(const ModelParams& params, F&& run) {
  Tape tape;
  LiftedModel lifted = lift_model(tape, params, /*needs_grad=*/false);
  Value v = run(tape, lifted.refs);
  return tape.value(v);
}

}  // namespace

Matrix fused_text_embedding(const ModelParams& params, const TextRecord& text,
                            const RunConfig& config) {
  return scratch_forward(params, [&](Tape& tape, const ModelRefs& refs) {
    return forward_text(tape, text, refs, config).fused;
  });
}

Matrix fused_video_embedding(const ModelParams& params, const VideoRecord& video,
                             const RunConfig& config) {
  return scratch_forward(params, [&](Tape& tape, const ModelRefs& refs) {
    return forward_video(tape, video, refs, config).fused;
  });
}

Matrix base_text_embedding(const ModelParams& params, const TextRecord& text,
                           const RunConfig& config) {
  return scratch_forward(params, [&](Tape& tape, const ModelRefs& refs) {
    return encode_text_global(tape, text.tokens, refs.text, config);
  });
}

Matrix base_video_embedding(const ModelParams& params, const VideoRecord& video,
                            const RunConfig& config) {
  return scratch_forward(params, [&](Tape& tape, const ModelRefs& refs) {
    return encode_video_global(tape, video.frames, refs.video, config);
  });
}

}  // namespace hise
