// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hise/ablation.hpp"
#include "hise/gradsuite.hpp"
#include "hise/metrics.hpp"
#include "hise/training.hpp"
#include "hise/tse.hpp"
#include "hise/vse.hpp"
#include "oracles.hpp"

using namespace hise;

namespace {

struct Failure : std::runtime_error {
  explicit Failure(const std::string& what) : std::runtime_error(what) {}
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool params_bit_equal(const ModelParams& a, const ModelParams& b) {
  bool equal = true;
  std::vector<const Matrix*> rhs;
  for_each_param(b, [&](const std::string&, const Matrix& m) { rhs.push_back(&m); });
  size_t i = 0;
  for_each_param(a, [&](const std::string&, const Matrix& m) {
    if (!(m == *rhs[i++])) equal = false;
  });
  return equal;
}

// ---- criterion 1: gradient suite -------------------------------------------

std::string criterion_gradients() {
  const auto start = std::chrono::steady_clock::now();
  const GradSuiteReport report = run_grad_suite(/*seed=*/0, /*num_seeds=*/20);
  double worst_op = 0.0, worst_path = 0.0;
  for (const auto& e : report.entries) {
    expect(e.pass, e.name + " exceeded tolerance: " + fmt("%.3e > %.0e", e.max_rel_err, e.tolerance));
    if (e.name.rfind("op/", 0) == 0) worst_op = std::max(worst_op, e.max_rel_err);
    else worst_path = std::max(worst_path, e.max_rel_err);
  }
  const double elapsed = seconds_since(start);
  expect(elapsed < 120.0, fmt("runtime %.1fs exceeds the 2 minute budget", elapsed));
  return fmt("max op err %.2e, max path err %.2e, %d checks x 20 seeds, %.1fs",
             worst_op, worst_path, static_cast<int>(report.entries.size()), elapsed);
}

// ---- criterion 2: HAL oracle ------------------------------------------------

std::string criterion_hal_oracle() {
  Tape t;
  const double one = t.value(hal_loss(t, t.leaf(Matrix::from_rows({{1.0}})), {0}, {0}, 0.3, 0.1))(0, 0);
  expect(std::fabs(one - (-0.1386294)) < 1e-6, fmt("1x1 hand value: got %.9f", one));
  expect(std::fabs(one - (-0.13862943611198905)) < 1e-9, "1x1 exact value drifted");

  const double id2 = t.value(hal_loss(t, t.leaf(Matrix::identity(2)), {0, 1}, {0, 1}, 0.3, 0.1))(0, 0);
  expect(std::fabs(id2 - (-0.1289115)) < 1e-5, fmt("identity2 hand value: got %.9f", id2));
  expect(std::fabs(id2 - (-0.12891196579724068)) < 1e-9, "identity2 exact value drifted");

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int q = std::uniform_int_distribution<int>(1, 8)(rng);
    const int r = std::uniform_int_distribution<int>(1, 8)(rng);
    Matrix s(q, r);
    for (int i = 0; i < s.size(); ++i) s.data()[i] = u(rng);
    std::vector<int> row_pos(q), col_pos(r);
    for (int& p : row_pos) p = std::uniform_int_distribution<int>(0, r - 1)(rng);
    for (int& p : col_pos) p = std::uniform_int_distribution<int>(0, q - 1)(rng);

    Tape tape;
    const double got = tape.value(hal_loss(tape, tape.leaf(s), row_pos, col_pos, 0.3, 0.1))(0, 0);
    const double want = oracle::hal_loss(s, row_pos, col_pos, 0.3, 0.1);
    worst = std::max(worst, std::fabs(got - want));
  }
  expect(worst < 1e-9, fmt("oracle deviation %.3e exceeds 1e-9", worst));
  return fmt("100 random matrices within %.1e of direct evaluation; both hand values hit", worst);
}

// ---- criterion 3: metrics oracle --------------------------------------------

std::string criterion_metrics_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 12);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix s(20, 20);
    const bool ties = trial % 4 == 0;
    for (int i = 0; i < s.size(); ++i) s.data()[i] = ties ? coarse(rng) / 12.0 : u(rng);
    std::vector<int> pairing(20);
    for (int i = 0; i < 20; ++i) pairing[i] = i;
    std::shuffle(pairing.begin(), pairing.end(), rng);

    for (bool t2v : {true, false}) {
      const Direction dir = t2v ? Direction::kTextToVideo : Direction::kVideoToText;
      const auto ranks = oracle::ranks_by_full_sort(s, pairing, t2v);
      for (int k : {1, 5, 10}) {
        const double got = recall_at_k(s, pairing, k, dir);
        const double want = oracle::recall_from_ranks(ranks, k);
        expect(got == want, fmt("trial %d: R@%d %s mismatch: %f vs %f", trial, k,
                                t2v ? "t2v" : "v2t", got, want));
      }
      const double got_mdr = median_rank(s, pairing, dir);
      const double want_mdr = oracle::median_from_ranks(ranks);
      expect(got_mdr == want_mdr, fmt("trial %d: MdR mismatch: %f vs %f", trial, got_mdr, want_mdr));
    }
  }
  return "recall@{1,5,10} and MdR match full-sort ranking exactly on 100 random 20x20 matrices";
}

// ---- criterion 4: structural invariants --------------------------------------

RunConfig short_config() {
  RunConfig c;
  c.pairs = 8;
  c.batch_size = 4;
  c.epochs = 3;
  c.d_model = 8;
  c.d_frame = 6;
  c.d_roi = 4;
  c.vocab = VocabCounts{3, 3, 3, 3, 3};
  c.frames_per_video = 3;
  c.max_len = 10;
  c.max_frames = 6;
  c.topk_entities = 3;
  c.bank_capacity = 16;
  return c;
}

std::string criterion_structural() {
  std::mt19937_64 rng(11);

  // R-GCN: zero weights + nonnegative input -> identity
  {
    Tape t;
    Matrix e0 = Matrix::gaussian(4, 6, 1.0, rng);
    for (int i = 0; i < e0.size(); ++i) e0.data()[i] = std::fabs(e0.data()[i]);
    std::vector<Value> graphs = {t.constant(Matrix::identity(4)), t.constant(Matrix(4, 4))};
    std::vector<Value> weights = {t.leaf(Matrix(6, 6)), t.leaf(Matrix(6, 6))};
    expect(t.value(rgcn_layer(t.leaf(e0), graphs, weights)) == e0,
           "R-GCN zero-weight identity violated");
  }

  // GCN permutation equivariance
  {
    Matrix e0 = Matrix::gaussian(3, 5, 1.0, rng);
    Matrix h = Matrix::gaussian(3, 3, 1.0, rng);
    Matrix w = Matrix::gaussian(5, 5, 1.0, rng);
    Matrix p(3, 3);
    p(0, 2) = p(1, 0) = p(2, 1) = 1.0;
    Matrix pt(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) pt(c, r) = p(r, c);

    Tape t;
    const Matrix direct = t.value(
        gcn_layer(t.leaf(matmul(p, e0)), t.constant(matmul(matmul(p, h), pt)), t.leaf(w)));
    const Matrix expected = matmul(p, t.value(gcn_layer(t.leaf(e0), t.constant(h), t.leaf(w))));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 5; ++c)
        expect(std::fabs(direct(r, c) - expected(r, c)) < 1e-12,
               "GCN permutation equivariance violated");
  }

  // affinity rows sum to 1
  {
    Tape t;
    Value nodes = t.leaf(Matrix::gaussian(6, 8, 1.0, rng));
    const Matrix h = t.value(affinity_matrix(nodes, t.constant(Matrix::gaussian(8, 8, 1.0, rng)),
                                             t.constant(Matrix::gaussian(8, 8, 1.0, rng)), 8));
    for (int r = 0; r < h.rows(); ++r) {
      double sum = 0.0;
      for (int c = 0; c < h.cols(); ++c) sum += h(r, c);
      expect(std::fabs(sum - 1.0) < 1e-9, "affinity row does not sum to 1");
    }
  }

  // alpha = 1 is bit-identical to the semantics-disabled model
  {
    RunConfig at_one = short_config();
    at_one.alpha = 1.0;
    RunConfig disabled = short_config();
    disabled.use_vds = disabled.use_vhs = disabled.use_tds = disabled.use_ths = false;
    const DatasetSplit split = generate_synthetic(at_one, at_one.seed);

    TrainerState s1 = make_trainer_state(at_one);
    TrainerState s2 = make_trainer_state(disabled);
    const TrainResult r1 = train(s1, split, at_one);
    const TrainResult r2 = train(s2, split, disabled);
    expect(params_bit_equal(s1.live, s2.live), "alpha=1 parameters diverged");
    expect(r1.final_metrics.to_json_text() == r2.final_metrics.to_json_text(),
           "alpha=1 metrics diverged");
  }

  // FIFO eviction
  {
    MemoryBank bank(2);
    bank.push(Matrix::from_rows({{1.0, 0.0}}));
    bank.push(Matrix::from_rows({{0.0, 1.0}}));
    bank.push(Matrix::from_rows({{-1.0, 0.0}}));
    const Matrix snap = bank.snapshot();
    expect(snap.rows() == 2 && snap(0, 1) == 1.0 && snap(1, 0) == -1.0,
           "FIFO eviction order violated");
  }

  // momentum endpoints
  {
    RunConfig c = short_config();
    std::mt19937_64 init_rng(3);
    ModelParams live = init_model_params(c, init_rng);
    ModelParams frozen = make_model_params(c);
    const Matrix before = frozen.text.w_q;
    for (int i = 0; i < 5; ++i) momentum_update(frozen, live, 1.0);
    expect(frozen.text.w_q == before, "momentum m=1 drifted");
    momentum_update(frozen, live, 0.0);
    expect(params_bit_equal(frozen, live), "momentum m=0 did not copy");
  }

  return "R-GCN identity, GCN equivariance, affinity rows, alpha=1 bitwise, FIFO, momentum endpoints";
}

// ---- criterion 5: convergence -------------------------------------------------

std::string criterion_convergence() {
  const auto start = std::chrono::steady_clock::now();
  RunConfig c;  // standard synthetic benchmark: 64 pairs, d_model 32, 200 epochs
  c.seed = 0;
  const DatasetSplit split = generate_synthetic(c, c.seed);
  TrainerState state = make_trainer_state(c);
  const TrainResult result = train(state, split, c);
  const double elapsed = seconds_since(start);

  expect(result.final_metrics.t2v.r1 >= 95.0,
         fmt("t2v R@1 %.2f below 95", result.final_metrics.t2v.r1));
  expect(result.final_metrics.v2t.r1 >= 95.0,
         fmt("v2t R@1 %.2f below 95", result.final_metrics.v2t.r1));
  expect(elapsed < 300.0, fmt("runtime %.1fs exceeds the 5 minute budget", elapsed));
  return fmt("t2v R@1 %.1f, v2t R@1 %.1f, R@Sum %.1f after 200 epochs in %.1fs",
             result.final_metrics.t2v.r1, result.final_metrics.v2t.r1,
             result.final_metrics.r_sum, elapsed);
}

// ---- criterion 6: ablation direction -------------------------------------------

std::string criterion_ablation_direction() {
  RunConfig base;  // standard config, noise escalated until the baseline breaks
  base.seed = 0;

  double sigma_used = 0.0;
  MetricsReport baseline;
  DatasetSplit split;
  bool found = false;
  for (double sigma : {16.0, 32.0, 64.0, 128.0}) {
    RunConfig weak = base;
    weak.noise_sigma = sigma;
    weak.use_vds = weak.use_vhs = weak.use_tds = weak.use_ths = false;
    split = generate_synthetic(weak, weak.seed);
    TrainerState state = make_trainer_state(weak);
    baseline = train(state, split, weak).final_metrics;
    if (std::min(baseline.t2v.r1, baseline.v2t.r1) < 80.0) {
      sigma_used = sigma;
      found = true;
      break;
    }
  }
  expect(found, "baseline R@1 stayed >= 80 for every probed noise level");

  RunConfig full = base;
  full.noise_sigma = sigma_used;
  TrainerState full_state = make_trainer_state(full);
  const MetricsReport full_metrics = train(full_state, split, full).final_metrics;
  expect(full_metrics.r_sum >= baseline.r_sum,
         fmt("full model R@Sum %.1f < baseline %.1f at sigma %.0f", full_metrics.r_sum,
             baseline.r_sum, sigma_used));

  RunConfig pooled = full;
  pooled.visual_graph_reasoning = false;
  pooled.textual_graph_reasoning = false;
  TrainerState pooled_state = make_trainer_state(pooled);
  const MetricsReport pooled_metrics = train(pooled_state, split, pooled).final_metrics;

  std::string graph_note;
  if (full_metrics.r_sum >= pooled_metrics.r_sum) {
    graph_note = fmt("graph %.1f >= mean-pool %.1f", full_metrics.r_sum, pooled_metrics.r_sum);
  } else {
    graph_note = fmt("DISCREPANCY at seed %llu: mean-pool R@Sum %.1f > graph %.1f",
                     static_cast<unsigned long long>(base.seed), pooled_metrics.r_sum,
                     full_metrics.r_sum);
  }
  return fmt("sigma %.0f: baseline R@1 %.1f, full R@Sum %.1f >= baseline %.1f; %s", sigma_used,
             std::min(baseline.t2v.r1, baseline.v2t.r1), full_metrics.r_sum, baseline.r_sum,
             graph_note.c_str());
}

// ---- criterion 7: determinism ----------------------------------------------------

std::string criterion_determinism() {
  RunConfig c;  // the standard benchmark config, run twice end to end
  c.seed = 0;
  c.eval_every = 50;

  std::string first_history, first_final;
  for (int run = 0; run < 2; ++run) {
    const DatasetSplit split = generate_synthetic(c, c.seed);
    TrainerState state = make_trainer_state(c);
    const TrainResult result = train(state, split, c);
    const std::string history = train_history_json(result);
    const std::string final_json = result.final_metrics.to_json_text();
    if (run == 0) {
      first_history = history;
      first_final = final_json;
    } else {
      expect(history == first_history, "metrics history JSON differs between runs");
      expect(final_json == first_final, "final metrics JSON differs between runs");
    }
  }
  return fmt("two full 200-epoch train+eval runs: metric JSON byte-identical (%zu bytes)",
             first_history.size());
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient-suite", criterion_gradients},
      {"hal-oracle", criterion_hal_oracle},
      {"metrics-oracle", criterion_metrics_oracle},
      {"structural-invariants", criterion_structural},
      {"convergence", criterion_convergence},
      {"ablation-direction", criterion_ablation_direction},
      {"determinism", criterion_determinism},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = true;
    try {
      detail = criteria[i].run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    std::printf("[%zu/%zu] %-24s %s  %s\n", i + 1, criteria.size(), criteria[i].name,
                ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
