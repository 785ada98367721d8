#include "hise/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hise/model.hpp"
#include "json.hpp"

namespace hise {

namespace {

double cosine(const Matrix& a, int ra, const Matrix& b, int rb) {
  const double na = a.row_norm(ra);
  const double nb = b.row_norm(rb);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot_rows(a, ra, b, rb) / (na * nb);
}

// scores over candidates for one query; ties broken by index ascending
int rank_of(const std::vector<double>& scores, int true_index) {
  const double target = scores[true_index];
  int rank = 1;
  for (int j = 0; j < static_cast<int>(scores.size()); ++j) {
    if (scores[j] > target) ++rank;
    else if (scores[j] == target && j < true_index) ++rank;
  }
  return rank;
}

std::vector<int> ranks(const Matrix& s, const std::vector<int>& video_of_text,
                       Direction direction) {
  if (static_cast<int>(video_of_text.size()) != s.cols())
    throw std::invalid_argument("metrics: pairing size must match text count");

  std::vector<int> out;
  if (direction == Direction::kTextToVideo) {
    for (int r = 0; r < s.cols(); ++r) {
      std::vector<double> scores(s.rows());
      for (int q = 0; q < s.rows(); ++q) scores[q] = s(q, r);
      out.push_back(rank_of(scores, video_of_text[r]));
    }
  } else {
    std::vector<int> text_of_video(s.rows(), -1);
    for (int r = 0; r < s.cols(); ++r) {
      if (video_of_text[r] < 0 || video_of_text[r] >= s.rows())
        throw std::invalid_argument("metrics: pairing index out of range");
      if (text_of_video[video_of_text[r]] != -1)
        throw std::invalid_argument("metrics: pairing must be bijective");
      text_of_video[video_of_text[r]] = r;
    }
    for (int q = 0; q < s.rows(); ++q) {
      if (text_of_video[q] == -1)
        throw std::invalid_argument("metrics: video " + std::to_string(q) + " has no text");
      std::vector<double> scores(s.cols());
      for (int r = 0; r < s.cols(); ++r) scores[r] = s(q, r);
      out.push_back(rank_of(scores, text_of_video[q]));
    }
  }
  return out;
}

}  // namespace

Matrix similarity_matrix(const Matrix& video_reps, const Matrix& text_reps) {
  if (video_reps.cols() != text_reps.cols())
    throw std::invalid_argument("similarity_matrix: dimension mismatch " +
                                video_reps.shape_str() + " vs " + text_reps.shape_str());
  Matrix s(video_reps.rows(), text_reps.rows());
  for (int q = 0; q < s.rows(); ++q)
    for (int r = 0; r < s.cols(); ++r) s(q, r) = cosine(video_reps, q, text_reps, r);
  return s;
}

double recall_at_k(const Matrix& similarities, const std::vector<int>& video_of_text, int k,
                   Direction direction) {
  const std::vector<int> rk = ranks(similarities, video_of_text, direction);
  int hits = 0;
  for (int r : rk)
    if (r <= k) ++hits;
  return 100.0 * hits / static_cast<double>(rk.size());
}

double median_rank(const Matrix& similarities, const std::vector<int>& video_of_text,
                   Direction direction) {
  std::vector<int> rk = ranks(similarities, video_of_text, direction);
  std::sort(rk.begin(), rk.end());
  const size_t n = rk.size();
  if (n % 2 == 1) return rk[n / 2];
  return (rk[n / 2 - 1] + rk[n / 2]) / 2.0;
}

MetricsReport compute_metrics(const Matrix& similarities,
                              const std::vector<int>& video_of_text) {
  MetricsReport report;
  report.items = similarities.cols();
  auto fill = [&](Direction dir, DirectionMetrics& m) {
    m.r1 = recall_at_k(similarities, video_of_text, 1, dir);
    m.r5 = recall_at_k(similarities, video_of_text, 5, dir);
    m.r10 = recall_at_k(similarities, video_of_text, 10, dir);
    m.mdr = median_rank(similarities, video_of_text, dir);
  };
  fill(Direction::kTextToVideo, report.t2v);
  fill(Direction::kVideoToText, report.v2t);
  report.r_sum = report.t2v.r1 + report.t2v.r5 + report.t2v.r10 + report.v2t.r1 +
                 report.v2t.r5 + report.v2t.r10;
  return report;
}

MetricsReport evaluate(const ModelParams& params, const DatasetSplit& split,
                       const RunConfig& config) {
  if (split.videos.empty() || split.texts.empty())
    throw std::invalid_argument("evaluate: empty split");

  Matrix video_reps(static_cast<int>(split.videos.size()), config.d_model);
  for (size_t q = 0; q < split.videos.size(); ++q) {
    const Matrix row = fused_video_embedding(params, split.videos[q], config);
    for (int c = 0; c < config.d_model; ++c) video_reps(static_cast<int>(q), c) = row(0, c);
  }
  Matrix text_reps(static_cast<int>(split.texts.size()), config.d_model);
  std::vector<int> video_of_text(split.texts.size());
  for (size_t r = 0; r < split.texts.size(); ++r) {
    const Matrix row = fused_text_embedding(params, split.texts[r], config);
    for (int c = 0; c < config.d_model; ++c) text_reps(static_cast<int>(r), c) = row(0, c);
    const int vid = split.video_index(split.texts[r].video_id);
    if (vid < 0)
      throw std::invalid_argument("evaluate: text '" + split.texts[r].text_id +
                                  "' references missing video");
    video_of_text[r] = vid;
  }

  return compute_metrics(similarity_matrix(video_reps, text_reps), video_of_text);
}

std::string MetricsReport::to_json_text() const {
  nlohmann::ordered_json j;
  j["items"] = items;
  j["t2v"] = {{"r1", t2v.r1}, {"r5", t2v.r5}, {"r10", t2v.r10}, {"mdr", t2v.mdr}};
  j["v2t"] = {{"r1", v2t.r1}, {"r5", v2t.r5}, {"r10", v2t.r10}, {"mdr", v2t.mdr}};
  j["r_sum"] = r_sum;
  return j.dump(2) + "\n";
}

std::string MetricsReport::to_table() const {
  char buf[256];
  std::string out;
  out += "          R@1     R@5    R@10     MdR\n";
  std::snprintf(buf, sizeof(buf), "t2v   %7.1f %7.1f %7.1f %7.1f\n", t2v.r1, t2v.r5, t2v.r10,
                t2v.mdr);
  out += buf;
  std::snprintf(buf, sizeof(buf), "v2t   %7.1f %7.1f %7.1f %7.1f\n", v2t.r1, v2t.r5, v2t.r10,
                v2t.mdr);
  out += buf;
  std::snprintf(buf, sizeof(buf), "R@Sum %7.1f\n", r_sum);
  out += buf;
  return out;
}

}  // namespace hise
