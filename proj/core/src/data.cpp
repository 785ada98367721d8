#include "hise/data.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace hise {

using nlohmann::json;
using nlohmann::ordered_json;

int DatasetSplit::video_index(const std::string& video_id) const {
  for (size_t i = 0; i < videos.size(); ++i)
    if (videos[i].video_id == video_id) return static_cast<int>(i);
  return -1;
}

namespace {

[[noreturn]] void record_error(const std::string& id, const std::string& why) {
  throw DataError("record '" + id + "': " + why);
}

void validate_video(const VideoRecord& v, const FixtureLimits& limits) {
  if (v.frames.empty()) record_error(v.video_id, "needs at least one frame");
  const size_t d_frame = v.frames[0].size();
  if (d_frame == 0) record_error(v.video_id, "frame rows must be non-empty");
  for (const auto& row : v.frames)
    if (row.size() != d_frame) record_error(v.video_id, "inconsistent frame dimensions");
  if (v.entities.size() != v.frames.size())
    record_error(v.video_id, "entity lists must match frame count");
  size_t d_roi = 0;
  for (const auto& frame_dets : v.entities) {
    for (const auto& det : frame_dets) {
      if (d_roi == 0) d_roi = det.roi.size();
      if (det.roi.size() != d_roi) record_error(v.video_id, "inconsistent roi dimensions");
      for (double b : det.bbox)
        if (b < 0.0 || b > 1.0) record_error(v.video_id, "bbox coordinates must be in [0,1]");
      if (det.bbox[2] <= 0.0 || det.bbox[3] <= 0.0)
        record_error(v.video_id, "bbox width and height must be > 0");
      if (det.confidence < 0.0 || det.confidence > 1.0)
        record_error(v.video_id, "confidence must be in [0,1]");
      if (limits.vocab_size > 0 &&
          (det.object_token >= static_cast<std::uint32_t>(limits.vocab_size) ||
           det.attribute_token >= static_cast<std::uint32_t>(limits.vocab_size)))
        record_error(v.video_id, "detection token exceeds vocab size");
    }
  }
  if (v.caption_tokens.empty()) record_error(v.video_id, "caption_tokens must be non-empty");
  if (limits.vocab_size > 0) {
    for (auto t : v.caption_tokens)
      if (t >= static_cast<std::uint32_t>(limits.vocab_size))
        record_error(v.video_id, "caption token exceeds vocab size");
  }
}

void validate_text(const TextRecord& t, const FixtureLimits& limits) {
  if (t.tokens.empty()) record_error(t.text_id, "tokens must be non-empty");
  if (limits.vocab_size > 0) {
    auto check = [&](std::uint32_t tok) {
      if (tok >= static_cast<std::uint32_t>(limits.vocab_size))
        record_error(t.text_id, "token exceeds vocab size");
    };
    for (auto tok : t.tokens) check(tok);
    for (const auto& a : t.actions)
      for (auto tok : a) check(tok);
    for (const auto& e : t.entities)
      for (auto tok : e.tokens) check(tok);
  }
  for (const auto& e : t.entities) {
    if (e.action_index >= t.actions.size())
      record_error(t.text_id, "entity action_index " + std::to_string(e.action_index) +
                                  " out of range (" + std::to_string(t.actions.size()) +
                                  " actions)");
    if (limits.r_roles > 0 && e.role_id >= static_cast<std::uint32_t>(limits.r_roles))
      record_error(t.text_id, "entity role_id " + std::to_string(e.role_id) +
                                  " out of range (" + std::to_string(limits.r_roles) + " roles)");
  }
}

json parse_line(const std::string& path, int line_no, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(where + ": field '" + key + "' has the wrong type");
  }
}

VideoRecord video_from_json(const json& j, const std::string& where) {
  VideoRecord v;
  v.video_id = get_field<std::string>(j, "video_id", where);
  v.frames = get_field<std::vector<std::vector<double>>>(j, "frames", where);
  v.caption_tokens = get_field<std::vector<std::uint32_t>>(j, "caption_tokens", where);
  const json& per_frame = j.contains("entities") ? j.at("entities") : json::array();
  for (const auto& frame_dets : per_frame) {
    std::vector<EntityDetection> dets;
    for (const auto& d : frame_dets) {
      EntityDetection det;
      det.object_token = get_field<std::uint32_t>(d, "object", where);
      det.attribute_token = get_field<std::uint32_t>(d, "attribute", where);
      det.roi = get_field<std::vector<double>>(d, "roi", where);
      auto bbox = get_field<std::vector<double>>(d, "bbox", where);
      if (bbox.size() != 4) throw DataError(where + ": bbox must have 4 entries");
      std::copy(bbox.begin(), bbox.end(), det.bbox);
      det.confidence = get_field<double>(d, "conf", where);
      dets.push_back(std::move(det));
    }
    v.entities.push_back(std::move(dets));
  }
  return v;
}

TextRecord text_from_json(const json& j, const std::string& where) {
  TextRecord t;
  t.text_id = get_field<std::string>(j, "text_id", where);
  t.video_id = get_field<std::string>(j, "video_id", where);
  t.tokens = get_field<std::vector<std::uint32_t>>(j, "tokens", where);
  t.actions = get_field<std::vector<std::vector<std::uint32_t>>>(j, "actions", where);
  if (j.contains("entities")) {
    for (const auto& e : j.at("entities")) {
      RoleEntity re;
      re.tokens = get_field<std::vector<std::uint32_t>>(e, "tokens", where);
      re.role_id = get_field<std::uint32_t>(e, "role_id", where);
      re.action_index = get_field<std::uint32_t>(e, "action_index", where);
      t.entities.push_back(std::move(re));
    }
  }
  return t;
}

ordered_json detection_to_json(const EntityDetection& d) {
  return ordered_json{{"object", d.object_token},
                      {"attribute", d.attribute_token},
                      {"roi", d.roi},
                      {"bbox", {d.bbox[0], d.bbox[1], d.bbox[2], d.bbox[3]}},
                      {"conf", d.confidence}};
}

}  // namespace

void validate_split(const DatasetSplit& split, const FixtureLimits& limits) {
  if (split.texts.empty()) throw DataError("no text records");
  if (split.videos.empty()) throw DataError("no video records");

  std::unordered_map<std::string, int> by_id;
  for (size_t i = 0; i < split.videos.size(); ++i) {
    const auto& v = split.videos[i];
    if (by_id.count(v.video_id)) record_error(v.video_id, "duplicate video_id");
    by_id[v.video_id] = static_cast<int>(i);
    validate_video(v, limits);
  }

  std::unordered_set<std::string> text_ids;
  std::vector<int> texts_per_video(split.videos.size(), 0);
  for (const auto& t : split.texts) {
    if (!text_ids.insert(t.text_id).second) record_error(t.text_id, "duplicate text_id");
    validate_text(t, limits);
    auto it = by_id.find(t.video_id);
    if (it == by_id.end())
      throw DataError("text '" + t.text_id + "' references missing video '" + t.video_id + "'");
    ++texts_per_video[it->second];
  }
  for (size_t i = 0; i < texts_per_video.size(); ++i) {
    if (texts_per_video[i] == 0)
      record_error(split.videos[i].video_id, "video has no paired text");
  }
}

DatasetSplit load_fixtures(const std::string& videos_path, const std::string& texts_path,
                           const FixtureLimits& limits) {
  DatasetSplit split;

  auto load_lines = [](const std::string& path, auto&& consume) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fixture file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      consume(line_no, line);
    }
  };

  load_lines(videos_path, [&](int line_no, const std::string& line) {
    const std::string where = videos_path + ":" + std::to_string(line_no);
    split.videos.push_back(video_from_json(parse_line(videos_path, line_no, line), where));
  });
  load_lines(texts_path, [&](int line_no, const std::string& line) {
    const std::string where = texts_path + ":" + std::to_string(line_no);
    split.texts.push_back(text_from_json(parse_line(texts_path, line_no, line), where));
  });

  validate_split(split, limits);
  return split;
}

DatasetSplit generate_synthetic(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  const VocabCounts& vb = config.vocab;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto pick = [&](int base, int count) {
    return static_cast<std::uint32_t>(base + std::uniform_int_distribution<int>(0, count - 1)(rng));
  };

  struct Scene {
    std::uint32_t subject, action, object, place, attribute;
  };

  std::set<std::array<std::uint32_t, 5>> seen;
  std::vector<Scene> scenes;
  int attempts = 0;
  while (static_cast<int>(scenes.size()) < config.pairs) {
    if (++attempts > config.pairs * 1000)
      throw DataError("cannot draw " + std::to_string(config.pairs) +
                      " distinct scenes from the configured vocabulary");
    Scene s{pick(vb.subject_base(), vb.subjects), pick(vb.action_base(), vb.actions),
            pick(vb.object_base(), vb.objects), pick(vb.place_base(), vb.places),
            pick(vb.attribute_base(), vb.attributes)};
    if (seen.insert({s.subject, s.action, s.object, s.place, s.attribute}).second)
      scenes.push_back(s);
  }

  auto id_of = [](const char* prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
    return std::string(buf);
  };

  DatasetSplit split;
  for (int i = 0; i < config.pairs; ++i) {
    const Scene& s = scenes[i];

    VideoRecord video;
    video.video_id = id_of("v", i);
    std::vector<double> prototype(config.d_frame);
    for (double& x : prototype) x = gauss(rng);
    for (int f = 0; f < config.frames_per_video; ++f) {
      std::vector<double> row = prototype;
      if (config.noise_sigma > 0.0)
        for (double& x : row) x += config.noise_sigma * gauss(rng);
      video.frames.push_back(std::move(row));

      std::vector<EntityDetection> dets;
      auto informative = [&](std::uint32_t object_token) {
        EntityDetection d;
        d.object_token = object_token;
        d.attribute_token = s.attribute;
        d.roi.resize(config.d_roi);
        for (double& x : d.roi) x = gauss(rng);
        d.bbox[0] = 0.5 * unit(rng);
        d.bbox[1] = 0.5 * unit(rng);
        d.bbox[2] = 0.1 + 0.4 * unit(rng);
        d.bbox[3] = 0.1 + 0.4 * unit(rng);
        d.confidence = config.conf_threshold + (1.0 - config.conf_threshold) * unit(rng);
        return d;
      };
      dets.push_back(informative(s.subject));
      dets.push_back(informative(s.object));
      for (int k = 0; k < config.distractors_per_frame; ++k) {
        EntityDetection d;
        d.object_token = pick(0, vb.total());
        d.attribute_token = pick(vb.attribute_base(), vb.attributes);
        d.roi.resize(config.d_roi);
        for (double& x : d.roi) x = gauss(rng);
        d.bbox[0] = 0.5 * unit(rng);
        d.bbox[1] = 0.5 * unit(rng);
        d.bbox[2] = 0.1 + 0.4 * unit(rng);
        d.bbox[3] = 0.1 + 0.4 * unit(rng);
        d.confidence = config.conf_threshold * 0.9 * unit(rng);
        dets.push_back(std::move(d));
      }
      video.entities.push_back(std::move(dets));
    }
    video.caption_tokens = {s.attribute, s.subject, s.action, s.object, s.place};

    TextRecord text;
    text.text_id = id_of("t", i);
    text.video_id = video.video_id;
    text.tokens = {s.subject, s.action, s.object, s.place};
    text.actions = {{s.action}};
    text.entities = {{{s.subject}, 0, 0},   // agent
                     {{s.object}, 1, 0},    // patient
                     {{s.place}, 2, 0}};    // location

    split.videos.push_back(std::move(video));
    split.texts.push_back(std::move(text));
  }

  validate_split(split, FixtureLimits{config.vocab_size(), config.r_roles});
  return split;
}

std::string to_jsonl(const std::vector<VideoRecord>& videos) {
  std::ostringstream out;
  for (const auto& v : videos) {
    ordered_json j;
    j["video_id"] = v.video_id;
    j["frames"] = v.frames;
    ordered_json frames = ordered_json::array();
    for (const auto& dets : v.entities) {
      ordered_json arr = ordered_json::array();
      for (const auto& d : dets) arr.push_back(detection_to_json(d));
      frames.push_back(std::move(arr));
    }
    j["entities"] = std::move(frames);
    j["caption_tokens"] = v.caption_tokens;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::string to_jsonl(const std::vector<TextRecord>& texts) {
  std::ostringstream out;
  for (const auto& t : texts) {
    ordered_json j;
    j["text_id"] = t.text_id;
    j["video_id"] = t.video_id;
    j["tokens"] = t.tokens;
    j["actions"] = t.actions;
    ordered_json entities = ordered_json::array();
    for (const auto& e : t.entities) {
      entities.push_back(ordered_json{
          {"tokens", e.tokens}, {"role_id", e.role_id}, {"action_index", e.action_index}});
    }
    j["entities"] = std::move(entities);
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace hise
