#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hise/config.hpp"

namespace hise {

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct EntityDetection {
  std::uint32_t object_token = 0;
  std::uint32_t attribute_token = 0;
  std::vector<double> roi;   // d_roi
  double bbox[4] = {0, 0, 0, 0};  // x, y, w, h in [0,1]
  double confidence = 0.0;
};

struct VideoRecord {
  std::string video_id;
  std::vector<std::vector<double>> frames;              // N x d_frame
  std::vector<std::vector<EntityDetection>> entities;   // per frame
  std::vector<std::uint32_t> caption_tokens;
};

struct RoleEntity {
  std::vector<std::uint32_t> tokens;
  std::uint32_t role_id = 0;
  std::uint32_t action_index = 0;
};

struct TextRecord {
  std::string text_id;
  std::string video_id;
  std::vector<std::uint32_t> tokens;
  std::vector<std::vector<std::uint32_t>> actions;  // verb spans
  std::vector<RoleEntity> entities;

  // The occurrence node reads the whole sentence.
  const std::vector<std::uint32_t>& occurrence_tokens() const { return tokens; }
};

struct DatasetSplit {
  std::vector<VideoRecord> videos;
  std::vector<TextRecord> texts;

  int video_index(const std::string& video_id) const;  // -1 when absent
};

// Optional bounds applied during validation; zero disables a bound.
struct FixtureLimits {
  int vocab_size = 0;
  int r_roles = 0;
};

// Parses the JSON-Lines fixture pair, validates every record invariant and
// resolves text -> video references. Errors carry file:line or record ids.
DatasetSplit load_fixtures(const std::string& videos_path, const std::string& texts_path,
                           const FixtureLimits& limits = {});

// Validation shared by the loader and the generator.
void validate_split(const DatasetSplit& split, const FixtureLimits& limits = {});

// Deterministic correlated fixture generator. Each pair realizes a latent
// scene (subject, action, object, place, attribute): the text verbalizes it,
// the frames are a per-scene prototype plus noise, detections carry the
// scene tokens above the confidence threshold plus low-confidence
// distractors, and the caption re-verbalizes the scene.
DatasetSplit generate_synthetic(const RunConfig& config, std::uint64_t seed);

std::string to_jsonl(const std::vector<VideoRecord>& videos);
std::string to_jsonl(const std::vector<TextRecord>& texts);

}  // namespace hise
