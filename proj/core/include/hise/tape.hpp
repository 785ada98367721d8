#pragma once

#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hise/matrix.hpp"

namespace hise {

// Closed catalog of recorded operations.
enum class OpKind {
  kLeaf,
  kMatmul,
  kAdd,
  kScale,          // scale-by-constant, attribute: scalar
  kConcatCols,     // n-ary column concatenation
  kRelu,
  kMeanRows,       // 1 x cols mean row
  kSumAll,         // 1 x 1
  kRowSoftmax,
  kL2NormalizeRows,
  kMul,            // elementwise
  kTranspose,
  kLog,
  kExp,
  kSelectRow,      // attribute: row index
};

const char* op_kind_name(OpKind kind);

struct TapeError : std::runtime_error {
  explicit TapeError(const std::string& what) : std::runtime_error(what) {}
};

class Tape;

// Handle to a value recorded on a tape. data/grad live in the tape node.
struct Value {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

struct OpAttr {
  double scalar = 1.0;  // kScale
  int row = -1;         // kSelectRow
};

// One recording: an append-only, topologically ordered list of operations.
// A tape is built fresh for every forward pass and discarded after backward.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value leaf(Matrix data, bool needs_grad = true);
  Value constant(Matrix data) { return leaf(std::move(data), false); }

  Value apply(OpKind kind, const std::vector<Value>& inputs, OpAttr attr = {});

  // Zeroes all grads, seeds the 1x1 root with 1 and runs the chain rule in
  // reverse recording order. Safe to call more than once on the same tape.
  void backward(Value root);

  const Matrix& value(Value v) const;
  const Matrix& grad(Value v) const;
  bool needs_grad(Value v) const;

  int size() const { return static_cast<int>(nodes_.size()); }
  std::uint64_t id() const { return id_; }
  int zero_row_normalizations() const { return zero_row_warnings_; }

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::vector<int> inputs;
    Matrix value;
    Matrix grad;
    OpAttr attr;
    bool needs_grad = false;
  };

  const Node& node_of(Value v, const char* ctx) const;
  Matrix forward(OpKind kind, const std::vector<const Matrix*>& in, const OpAttr& attr);
  void backprop(int node_id);

  std::deque<Node> nodes_;
  std::uint64_t id_ = 0;
  int zero_row_warnings_ = 0;
};

// Convenience wrappers; every one records a catalog op on the inputs' tape.
Value matmul(Value a, Value b);
Value add(Value a, Value b);
Value scale(Value a, double c);
Value concat_cols(const std::vector<Value>& parts);
Value relu(Value a);
Value mean_rows(Value a);
Value sum_all(Value a);
Value row_softmax(Value a);
Value l2_normalize_rows(Value a);
Value mul(Value a, Value b);
Value transpose(Value a);
Value log(Value a);
Value exp(Value a);
Value select_row(Value a, int row);

// Row stacking composed from catalog ops (transpose / concat / transpose).
Value concat_rows(const std::vector<Value>& parts);

}  // namespace hise
