// Test-only reference implementations, kept independent of the tape and the
// production metric code: everything here is direct scalar arithmetic.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hise/matrix.hpp"

namespace oracle {

// Direct evaluation of the hubness-aware contrastive loss:
//   (mu/Q) sum_q [log(sum_{r != pos(q)} exp((S_qr - gamma)/mu) + 1)
//                 - log(S_{q,pos(q)} + 1)]
// plus the symmetric column-direction block.
inline double hal_loss(const hise::Matrix& s, const std::vector<int>& row_pos,
                       const std::vector<int>& col_pos, double gamma, double mu) {
  const int q = s.rows();
  const int r = s.cols();
  double row_block = 0.0;
  for (int i = 0; i < q; ++i) {
    double negs = 0.0;
    for (int j = 0; j < r; ++j)
      if (j != row_pos[i]) negs += std::exp((s(i, j) - gamma) / mu);
    row_block += std::log(negs + 1.0) - std::log(s(i, row_pos[i]) + 1.0);
  }
  double col_block = 0.0;
  for (int j = 0; j < r; ++j) {
    double negs = 0.0;
    for (int i = 0; i < q; ++i)
      if (i != col_pos[j]) negs += std::exp((s(i, j) - gamma) / mu);
    col_block += std::log(negs + 1.0) - std::log(s(col_pos[j], j) + 1.0);
  }
  return (mu / q) * row_block + (mu / r) * col_block;
}

inline double bank_hal_loss(const std::vector<double>& pos_cos,
                            const std::vector<std::vector<double>>& neg_cos, double gamma,
                            double mu) {
  const int q = static_cast<int>(pos_cos.size());
  double block = 0.0;
  for (int i = 0; i < q; ++i) {
    double negs = 0.0;
    for (double c : neg_cos[i]) negs += std::exp((c - gamma) / mu);
    block += std::log(negs + 1.0) - std::log(pos_cos[i] + 1.0);
  }
  return (mu / q) * block;
}

inline double infonce_loss(const hise::Matrix& s, const std::vector<int>& positives,
                           double temperature) {
  const int n = s.rows();
  std::vector<int> inverse(n, -1);  // positive row of each column
  for (int i = 0; i < n; ++i) inverse[positives[i]] = i;
  auto direction = [&](bool rows) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double denom = 0.0;
      for (int j = 0; j < n; ++j) denom += std::exp((rows ? s(i, j) : s(j, i)) / temperature);
      const int p = rows ? positives[i] : inverse[i];
      const double num = std::exp((rows ? s(i, p) : s(p, i)) / temperature);
      total += -std::log(num / denom);
    }
    return total / n;
  };
  return 0.5 * (direction(true) + direction(false));
}

// Full-sort ranking: sorts candidate indices by (score desc, index asc) and
// returns the 1-based position of the true index.
inline int rank_by_full_sort(const std::vector<double>& scores, int true_index) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  for (size_t pos = 0; pos < order.size(); ++pos)
    if (order[pos] == true_index) return static_cast<int>(pos) + 1;
  return -1;
}

// t2v = rank videos (rows) for each text column; v2t = rank texts per video.
inline std::vector<int> ranks_by_full_sort(const hise::Matrix& s,
                                           const std::vector<int>& video_of_text, bool t2v) {
  std::vector<int> out;
  if (t2v) {
    for (int r = 0; r < s.cols(); ++r) {
      std::vector<double> scores(s.rows());
      for (int q = 0; q < s.rows(); ++q) scores[q] = s(q, r);
      out.push_back(rank_by_full_sort(scores, video_of_text[r]));
    }
  } else {
    std::vector<int> text_of_video(s.rows(), -1);
    for (int r = 0; r < s.cols(); ++r) text_of_video[video_of_text[r]] = r;
    for (int q = 0; q < s.rows(); ++q) {
      std::vector<double> scores(s.cols());
      for (int r = 0; r < s.cols(); ++r) scores[r] = s(q, r);
      out.push_back(rank_by_full_sort(scores, text_of_video[q]));
    }
  }
  return out;
}

inline double recall_from_ranks(const std::vector<int>& ranks, int k) {
  int hits = 0;
  for (int r : ranks)
    if (r <= k) ++hits;
  return 100.0 * hits / static_cast<double>(ranks.size());
}

inline double median_from_ranks(std::vector<int> ranks) {
  std::sort(ranks.begin(), ranks.end());
  const size_t n = ranks.size();
  return n % 2 == 1 ? ranks[n / 2] : (ranks[n / 2 - 1] + ranks[n / 2]) / 2.0;
}

}  // namespace oracle
