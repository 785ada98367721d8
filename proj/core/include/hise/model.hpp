#pragma once

#include "hise/config.hpp"
#include "hise/data.hpp"
#include "hise/objective.hpp"
#include "hise/tse.hpp"
#include "hise/vse.hpp"

namespace hise {

struct ItemForward {
  Value base;
  Value fused;  // equals base when no semantic component is active
};

// Whether forward passes compute the semantic branch at all: some component
// must be toggled on and the fusion weight must leave it nonzero.
bool text_semantics_active(const RunConfig& config);
bool video_semantics_active(const RunConfig& config);

ItemForward forward_text(Tape& tape, const TextRecord& text, const ModelP<Value>& model,
                         const RunConfig& config, TseStats* stats = nullptr);
ItemForward forward_video(Tape& tape, const VideoRecord& video, const ModelP<Value>& model,
                          const RunConfig& config);

// Scratch-tape helpers: run a forward pass without tracking gradients and
// copy the result out.
Matrix fused_text_embedding(const ModelParams& params, const TextRecord& text,
                            const RunConfig& config);
Matrix fused_video_embedding(const ModelParams& params, const VideoRecord& video,
                             const RunConfig& config);
Matrix base_text_embedding(const ModelParams& params, const TextRecord& text,
                           const RunConfig& config);
Matrix base_video_embedding(const ModelParams& params, const VideoRecord& video,
                            const RunConfig& config);

}  // namespace hise
