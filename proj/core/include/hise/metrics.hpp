#pragma once

#include <string>
#include <vector>

#include "hise/config.hpp"
#include "hise/data.hpp"
#include "hise/matrix.hpp"
#include "hise/params.hpp"

namespace hise {

enum class Direction { kTextToVideo, kVideoToText };

struct DirectionMetrics {
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
  double mdr = 0.0;
};

struct MetricsReport {
  DirectionMetrics t2v;
  DirectionMetrics v2t;
  double r_sum = 0.0;  // sum of all six recall percentages
  int items = 0;

  std::string to_json_text() const;
  std::string to_table() const;
};

// S[q][r] = cosine(video row q, text row r).
Matrix similarity_matrix(const Matrix& video_reps, const Matrix& text_reps);

// Rank of the true item = 1 + items strictly better + equal items with a
// smaller index; recall is the percentage of queries with rank <= K.
// video_of_text[r] names the ground-truth video of text r (bijective).
double recall_at_k(const Matrix& similarities, const std::vector<int>& video_of_text, int k,
                   Direction direction);
double median_rank(const Matrix& similarities, const std::vector<int>& video_of_text,
                   Direction direction);

MetricsReport compute_metrics(const Matrix& similarities,
                              const std::vector<int>& video_of_text);

// Fused embeddings for every item under the snapshot, then all metrics.
MetricsReport evaluate(const ModelParams& params, const DatasetSplit& split,
                       const RunConfig& config);

}  // namespace hise
