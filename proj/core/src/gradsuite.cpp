#include "hise/gradsuite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "hise/data.hpp"
#include "hise/gradcheck.hpp"
#include "hise/model.hpp"

namespace hise {

namespace {

constexpr double kOpH = 1e-5;
constexpr double kOpTol = 1e-4;
constexpr double kEndToEndH = 1e-4;
constexpr double kEndToEndTol = 1e-3;

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(std::uint64_t seed) : rng(seed) {}

  int dim(int lo = 2, int hi = 5) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Matrix gauss(int r, int c, double dev = 1.0) { return Matrix::gaussian(r, c, dev, rng); }
  // values bounded away from the ReLU kink
  Matrix away_from_zero(int r, int c) {
    Matrix m = gauss(r, c);
    for (int i = 0; i < m.size(); ++i) {
      const double v = m.data()[i];
      m.data()[i] = (v >= 0 ? 1.0 : -1.0) * (0.05 + std::fabs(v));
    }
    return m;
  }
  Matrix positive(int r, int c) {
    Matrix m = gauss(r, c);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = 0.2 + std::fabs(m.data()[i]);
    return m;
  }
  Matrix bounded(int r, int c, double lim) {
    Matrix m(r, c);
    std::uniform_real_distribution<double> u(-lim, lim);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  }
  Matrix unit_rows(int r, int c) {
    Matrix m = gauss(r, c);
    for (int i = 0; i < r; ++i) {
      const double norm = m.row_norm(i);
      for (int j = 0; j < c; ++j) m(i, j) /= norm;
    }
    return m;
  }
};

// Weighted sum-all so the upstream gradient of the checked op is non-uniform.
Value weighted_sum(Tape& tape, Value v, const Matrix& weights) {
  return sum_all(mul(v, tape.constant(weights)));
}

struct Check {
  std::string name;
  double h = kOpH;
  double tolerance = kOpTol;
  // evaluates one seeded instance, returns the max relative error
  std::function<double(std::uint64_t)> run;
};

double check_fn(const ScalarFn& f, const Matrix& x, double h) {
  return finite_difference_check(f, x, h).max_rel_err;
}

RunConfig tiny_config() {
  RunConfig c;
  c.d_frame = 6;
  c.d_roi = 5;
  c.vocab = VocabCounts{3, 3, 3, 3, 3};
  c.pairs = 2;
  c.frames_per_video = 3;
  c.noise_sigma = 0.1;
  c.distractors_per_frame = 1;
  c.d_model = 8;
  c.max_len = 8;
  c.max_frames = 6;
  c.topk_entities = 3;
  c.batch_size = 2;
  c.bank_capacity = 4;
  return c;
}

// Replaces one named parameter with the checked leaf; the rest enter as
// constants.
ScalarFn model_path_fn(const ModelParams& params, const std::string& target,
                       const RunConfig& config,
                       std::function<Value(Tape&, const ModelRefs&, const RunConfig&)> body) {
  return [params, target, config, body](Tape& tape, Value x) {
    ModelRefs refs;
    refs.tse.relation_weights.resize(params.tse.relation_weights.size());
    std::vector<Value*> slots;
    for_each_param(refs, [&](const std::string&, Value& v) { slots.push_back(&v); });
    size_t i = 0;
    bool found = false;
    for_each_param(params, [&](const std::string& name, const Matrix& m) {
      if (name == target) {
        *slots[i] = x;
        found = true;
      } else {
        *slots[i] = tape.constant(m);
      }
      ++i;
    });
    if (!found) throw std::invalid_argument("grad suite: unknown parameter " + target);
    return body(tape, refs, config);
  };
}

const Matrix& param_by_name(const ModelParams& params, const std::string& target) {
  const Matrix* out = nullptr;
  for_each_param(params, [&](const std::string& name, const Matrix& m) {
    if (name == target) out = &m;
  });
  if (!out) throw std::invalid_argument("grad suite: unknown parameter " + target);
  return *out;
}

std::vector<Check> op_checks() {
  std::vector<Check> checks;

  checks.push_back({"op/matmul", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    const int m = s.dim(), k = s.dim(), n = s.dim();
    Matrix a = s.gauss(m, k), b = s.gauss(k, n), w = s.gauss(m, n);
    double err = check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, matmul(x, t.constant(b)), w);
    }, a, kOpH);
    err = std::max(err, check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, matmul(t.constant(a), x), w);
    }, b, kOpH));
    return err;
  }});

  checks.push_back({"op/add", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    const int m = s.dim(), n = s.dim();
    Matrix a = s.gauss(m, n), b = s.gauss(m, n), w = s.gauss(m, n);
    double err = check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, add(x, t.constant(b)), w);
    }, a, kOpH);
    err = std::max(err, check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, add(t.constant(a), x), w);
    }, b, kOpH));
    return err;
  }});

  checks.push_back({"op/scale-by-constant", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    Matrix w = s.gauss(a.rows(), a.cols());
    const double c = std::uniform_real_distribution<double>(-2.0, 2.0)(s.rng);
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, scale(x, c), w); }, a, kOpH);
  }});

  checks.push_back({"op/concat-columns", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    const int m = s.dim();
    Matrix a = s.gauss(m, s.dim()), b = s.gauss(m, s.dim()), c = s.gauss(m, s.dim());
    Matrix w = s.gauss(m, a.cols() + b.cols() + c.cols());
    double err = check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, concat_cols({x, t.constant(b), t.constant(c)}), w);
    }, a, kOpH);
    err = std::max(err, check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, concat_cols({t.constant(a), x, t.constant(c)}), w);
    }, b, kOpH));
    return err;
  }});

  checks.push_back({"op/relu", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.away_from_zero(s.dim(), s.dim());
    Matrix w = s.gauss(a.rows(), a.cols());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, relu(x), w); }, a, kOpH);
  }});

  checks.push_back({"op/mean-rows", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    Matrix w = s.gauss(1, a.cols());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, mean_rows(x), w); }, a, kOpH);
  }});

  checks.push_back({"op/sum-all", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    return check_fn([&](Tape&, Value x) { return sum_all(x); }, a, kOpH);
  }});

  checks.push_back({"op/row-softmax", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    Matrix w = s.gauss(a.rows(), a.cols());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, row_softmax(x), w); }, a,
                    kOpH);
  }});

  checks.push_back({"op/l2-normalize-rows", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim(3, 5));
    Matrix w = s.gauss(a.rows(), a.cols());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, l2_normalize_rows(x), w); },
                    a, kOpH);
  }});

  checks.push_back({"op/elementwise-multiply", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    const int m = s.dim(), n = s.dim();
    Matrix a = s.gauss(m, n), b = s.gauss(m, n), w = s.gauss(m, n);
    double err = check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, mul(x, t.constant(b)), w);
    }, a, kOpH);
    err = std::max(err, check_fn([&](Tape& t, Value x) {
      return weighted_sum(t, mul(t.constant(a), x), w);
    }, b, kOpH));
    return err;
  }});

  checks.push_back({"op/transpose", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    Matrix w = s.gauss(a.cols(), a.rows());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, transpose(x), w); }, a, kOpH);
  }});

  checks.push_back({"op/log", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.positive(s.dim(), s.dim());
    Matrix w = s.gauss(a.rows(), a.cols());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, log(x), w); }, a, kOpH);
  }});

  checks.push_back({"op/exp", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    Matrix w = s.gauss(a.rows(), a.cols());
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, exp(x), w); }, a, kOpH);
  }});

  checks.push_back({"op/select-row", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix a = s.gauss(s.dim(), s.dim());
    Matrix w = s.gauss(1, a.cols());
    const int row = std::uniform_int_distribution<int>(0, a.rows() - 1)(s.rng);
    return check_fn([&](Tape& t, Value x) { return weighted_sum(t, select_row(x, row), w); },
                    a, kOpH);
  }});

  return checks;
}

std::vector<Check> path_checks() {
  std::vector<Check> checks;

  auto model_for = [](std::uint64_t seed, const RunConfig& config) {
    std::mt19937_64 rng(seed);
    return init_model_params(config, rng);
  };

  checks.push_back({"path/text-encoder", kOpH, kOpTol, [=](std::uint64_t seed) {
    const RunConfig config = tiny_config();
    ModelParams params = model_for(seed, config);
    DatasetSplit split = generate_synthetic(config, seed);
    double err = 0.0;
    for (const char* target : {"text.token_embedding", "text.w_q", "text.out_proj"}) {
      ScalarFn f = model_path_fn(params, target, config,
                                 [&split](Tape& t, const ModelRefs& refs, const RunConfig& c) {
        return sum_all(encode_text_global(t, split.texts[0].tokens, refs.text, c));
      });
      err = std::max(err, check_fn(f, param_by_name(params, target), kOpH));
    }
    return err;
  }});

  checks.push_back({"path/video-encoder", kOpH, kOpTol, [=](std::uint64_t seed) {
    const RunConfig config = tiny_config();
    ModelParams params = model_for(seed, config);
    DatasetSplit split = generate_synthetic(config, seed);
    double err = 0.0;
    for (const char* target : {"video.frame_projection", "video.w_v", "video.out_proj"}) {
      ScalarFn f = model_path_fn(params, target, config,
                                 [&split](Tape& t, const ModelRefs& refs, const RunConfig& c) {
        return sum_all(encode_video_global(t, split.videos[0].frames, refs.video, c));
      });
      err = std::max(err, check_fn(f, param_by_name(params, target), kOpH));
    }
    return err;
  }});

  checks.push_back({"path/tse", kOpH, kOpTol, [=](std::uint64_t seed) {
    const RunConfig config = tiny_config();
    ModelParams params = model_for(seed, config);
    DatasetSplit split = generate_synthetic(config, seed);
    double err = 0.0;
    for (const char* target :
         {"tse.relation_w0", "tse.relation_w3", "tse.occurrence.w_q", "text.token_embedding"}) {
      ScalarFn f = model_path_fn(params, target, config,
                                 [&split](Tape& t, const ModelRefs& refs, const RunConfig& c) {
        return sum_all(*textual_semantics(t, split.texts[0], refs, c).ts);
      });
      err = std::max(err, check_fn(f, param_by_name(params, target), kOpH));
    }
    return err;
  }});

  checks.push_back({"path/vse", kOpH, kOpTol, [=](std::uint64_t seed) {
    const RunConfig config = tiny_config();
    ModelParams params = model_for(seed, config);
    DatasetSplit split = generate_synthetic(config, seed);
    double err = 0.0;
    for (const char* target :
         {"vse.node_w", "vse.affinity_query", "vse.gcn_w", "vse.concept_b"}) {
      ScalarFn f = model_path_fn(params, target, config,
                                 [&split](Tape& t, const ModelRefs& refs, const RunConfig& c) {
        return sum_all(*visual_semantics(t, split.videos[0], refs, c).vs);
      });
      err = std::max(err, check_fn(f, param_by_name(params, target), kOpH));
    }
    return err;
  }});

  checks.push_back({"path/fusion", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    const int d = 6;
    Matrix base = s.gauss(1, d);
    Matrix semantic = s.gauss(1, d);
    Matrix w = s.gauss(1, d);
    double err = check_fn([&](Tape& t, Value x) {
      Value b = l2_normalize_rows(x);
      return weighted_sum(t, fuse(b, t.constant(semantic), 0.9), w);
    }, base, kOpH);
    err = std::max(err, check_fn([&](Tape& t, Value x) {
      Value b = l2_normalize_rows(t.constant(base));
      return weighted_sum(t, fuse(b, x, 0.9), w);
    }, semantic, kOpH));
    return err;
  }});

  checks.push_back({"path/hal", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix sims = s.bounded(4, 4, 0.9);
    const std::vector<int> diag = {0, 1, 2, 3};
    return check_fn([&](Tape& t, Value x) {
      return hal_loss(t, x, diag, diag, 0.3, 0.1);
    }, sims, kOpH);
  }});

  checks.push_back({"path/bank-hal", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    const int q = 3, d = 6;
    Matrix anchors = s.gauss(q, d);
    Matrix positives = s.unit_rows(q, d);
    MemoryBank bank(8);
    bank.push(s.unit_rows(4, d));
    return check_fn([&](Tape& t, Value x) {
      return bank_hal_loss(t, l2_normalize_rows(x), positives, bank, 0.3, 0.1);
    }, anchors, kOpH);
  }});

  checks.push_back({"path/infonce", kOpH, kOpTol, [](std::uint64_t seed) {
    Sampler s(seed);
    Matrix sims = s.bounded(4, 4, 0.9);
    const std::vector<int> diag = {0, 1, 2, 3};
    return check_fn([&](Tape& t, Value x) {
      return infonce_loss(t, x, diag, 0.3);
    }, sims, kOpH);
  }});

  checks.push_back({"path/total-objective", kEndToEndH, kEndToEndTol, [=](std::uint64_t seed) {
    const RunConfig config = tiny_config();
    ModelParams params = model_for(seed, config);
    DatasetSplit split = generate_synthetic(config, seed);
    Sampler s(seed ^ 0x5eedull);

    MemoryBank video_bank(4), text_bank(4);
    video_bank.push(s.unit_rows(3, config.d_model));
    text_bank.push(s.unit_rows(3, config.d_model));
    Matrix mom_v = s.unit_rows(2, config.d_model);
    Matrix mom_t = s.unit_rows(2, config.d_model);

    auto body = [&](Tape& t, const ModelRefs& refs, const RunConfig& c) {
      std::vector<Value> fv, ft, bv, bt;
      for (int i = 0; i < 2; ++i) {
        ItemForward text = forward_text(t, split.texts[i], refs, c, nullptr);
        ItemForward video = forward_video(t, split.videos[i], refs, c);
        ft.push_back(text.fused);
        fv.push_back(video.fused);
        bt.push_back(text.base);
        bv.push_back(video.base);
      }
      ObjectiveInputs inputs{concat_rows(fv), concat_rows(ft), concat_rows(bv),
                             concat_rows(bt), mom_v,           mom_t};
      return total_objective(t, inputs, video_bank, text_bank, c);
    };

    double err = 0.0;
    for (const char* target : {"text.w_q", "video.frame_projection", "tse.relation_w0",
                               "vse.node_w", "text.token_embedding"}) {
      ScalarFn f = model_path_fn(params, target, config, body);
      err = std::max(err, check_fn(f, param_by_name(params, target), kEndToEndH));
    }
    return err;
  }});

  return checks;
}

}  // namespace

GradSuiteReport run_grad_suite(std::uint64_t seed, int num_seeds, bool corrupt) {
  const auto start = std::chrono::steady_clock::now();

  std::vector<Check> checks = op_checks();
  std::vector<Check> paths = path_checks();
  checks.insert(checks.end(), paths.begin(), paths.end());

  GradSuiteReport report;
  report.pass = true;
  for (const Check& check : checks) {
    GradSuiteEntry entry{check.name, 0.0, check.tolerance, check.h, false};
    for (int k = 0; k < num_seeds; ++k)
      entry.max_rel_err = std::max(entry.max_rel_err, check.run(seed + 1000ull * k));
    entry.pass = entry.max_rel_err <= entry.tolerance;
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }

  if (corrupt) {
    // The product's second factor is re-baked from the perturbed input at
    // every evaluation, so the recorded gradient (x) disagrees with the
    // evaluated function (x^2). The checker must flag it.
    Sampler s(seed);
    Matrix a = s.positive(3, 3);
    GradSuiteEntry entry{"negative-control/detached-product", 0.0, kOpTol, kOpH, false};
    entry.max_rel_err = check_fn([](Tape& t, Value x) {
      return sum_all(mul(x, t.constant(t.value(x))));
    }, a, kOpH);
    entry.pass = entry.max_rel_err <= entry.tolerance;
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }

  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string GradSuiteReport::to_table() const {
  char buf[160];
  std::string out = "check                                max-rel-err    tolerance  result\n";
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%-36s %12.3e %12.0e  %s\n", e.name.c_str(), e.max_rel_err,
                  e.tolerance, e.pass ? "pass" : "FAIL");
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%s in %.1fs\n", pass ? "all checks passed" : "CHECKS FAILED",
                seconds);
  out += buf;
  return out;
}

}  // namespace hise
