#include "hise/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace hise {

namespace {

constexpr char kMagic[8] = {'H', 'I', 'S', 'E', 'C', 'K', 'P', '1'};
constexpr std::uint64_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw CheckpointError("cannot open checkpoint for writing: " + path);
  }
  void bytes(const void* p, size_t n) { out_.write(static_cast<const char*>(p), n); }
  void u64(std::uint64_t v) { bytes(&v, sizeof(v)); }
  void i64(std::int64_t v) { bytes(&v, sizeof(v)); }
  void i32(std::int32_t v) { bytes(&v, sizeof(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void matrix(const Matrix& m) {
    i32(m.rows());
    i32(m.cols());
    bytes(m.data(), static_cast<size_t>(m.size()) * sizeof(double));
  }
  void close() {
    out_.flush();
    if (!out_) throw CheckpointError("checkpoint write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw CheckpointError("cannot open checkpoint: " + path);
  }
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), n);
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw CheckpointError("checkpoint truncated or corrupted: " + path_);
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof(v));
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    bytes(&v, sizeof(v));
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    bytes(&v, sizeof(v));
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > (1ull << 30)) throw CheckpointError("checkpoint corrupted: " + path_);
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Matrix matrix() {
    const std::int32_t rows = i32();
    const std::int32_t cols = i32();
    if (rows < 0 || cols < 0 || static_cast<std::int64_t>(rows) * cols > (1ll << 28))
      throw CheckpointError("checkpoint corrupted: " + path_);
    Matrix m(rows, cols);
    bytes(m.data(), static_cast<size_t>(m.size()) * sizeof(double));
    return m;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

void write_params(Writer& w, const ModelParams& params) {
  std::uint64_t count = 0;
  for_each_param(params, [&](const std::string&, const Matrix&) { ++count; });
  w.u64(count);
  for_each_param(params, [&](const std::string& name, const Matrix& m) {
    w.str(name);
    w.matrix(m);
  });
}

void read_params(Reader& r, ModelParams& params) {
  const std::uint64_t count = r.u64();
  std::uint64_t expected = 0;
  for_each_param(params, [&](const std::string&, const Matrix&) { ++expected; });
  if (count != expected)
    throw CheckpointError("checkpoint parameter count mismatch: stored " +
                          std::to_string(count) + ", model has " + std::to_string(expected));
  for_each_param(params, [&](const std::string& name, Matrix& m) {
    const std::string stored = r.str();
    if (stored != name)
      throw CheckpointError("checkpoint parameter order mismatch: expected '" + name +
                            "', found '" + stored + "'");
    Matrix loaded = r.matrix();
    if (!loaded.same_shape(m))
      throw CheckpointError("checkpoint shape mismatch for '" + name + "': stored " +
                            loaded.shape_str() + ", model expects " + m.shape_str());
    m = std::move(loaded);
  });
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainerState& state,
                     const RunConfig& config) {
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u64(kVersion);
  w.u64(config.hash());
  w.str(config.to_json_text());
  w.i64(state.step);
  w.i64(state.epoch);

  write_params(w, state.live);
  write_params(w, state.momentum);

  w.i64(state.adam.step_count());
  w.u64(state.adam.first_moments().size());
  for (const Matrix& m : state.adam.first_moments()) w.matrix(m);
  for (const Matrix& m : state.adam.second_moments()) w.matrix(m);

  w.matrix(state.video_bank.snapshot());
  w.matrix(state.text_bank.snapshot());
  w.bytes(kMagic, sizeof(kMagic));
  w.close();
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("not a checkpoint file: " + path);
  const std::uint64_t version = r.u64();
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  const std::uint64_t stored_hash = r.u64();
  RunConfig config = RunConfig::from_json_text(r.str());
  config.validate();

  LoadedCheckpoint out{config, TrainerState(config), stored_hash};
  out.state.step = r.i64();
  out.state.epoch = static_cast<int>(r.i64());

  out.state.live = make_model_params(config);
  out.state.momentum = make_model_params(config);
  read_params(r, out.state.live);
  read_params(r, out.state.momentum);

  const std::int64_t adam_step = r.i64();
  const std::uint64_t moments = r.u64();
  std::vector<Matrix> m1, m2;
  for (std::uint64_t i = 0; i < moments; ++i) m1.push_back(r.matrix());
  for (std::uint64_t i = 0; i < moments; ++i) m2.push_back(r.matrix());
  if (moments > 0) out.state.adam.restore(std::move(m1), std::move(m2), adam_step);

  const Matrix video_rows = r.matrix();
  const Matrix text_rows = r.matrix();
  if (video_rows.rows() > 0) out.state.video_bank.restore(video_rows);
  if (text_rows.rows() > 0) out.state.text_bank.restore(text_rows);

  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("checkpoint trailer corrupted: " + path);
  return out;
}

}  // namespace hise
