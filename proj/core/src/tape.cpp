#include "hise/tape.hpp"

#include <atomic>
#include <cmath>

namespace hise {

namespace {

std::atomic<std::uint64_t> g_next_tape_id{1};

// C += A * B^T
void matmul_nt_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j);
      double s = 0.0;
      for (int p = 0; p < a.cols(); ++p) s += arow[p] * brow[p];
      crow[j] += s;
    }
  }
}

// C += A^T * B
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (int p = 0; p < a.cols(); ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c.row(p);
      for (int j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
    }
  }
}

[[noreturn]] void shape_error(OpKind kind, const std::string& detail) {
  throw TapeError(std::string(op_kind_name(kind)) + ": " + detail);
}

void expect_arity(OpKind kind, const std::vector<const Matrix*>& in, size_t n) {
  if (in.size() != n)
    shape_error(kind, "expected " + std::to_string(n) + " inputs, got " + std::to_string(in.size()));
}

}  // namespace

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kScale: return "scale-by-constant";
    case OpKind::kConcatCols: return "concat-columns";
    case OpKind::kRelu: return "relu";
    case OpKind::kMeanRows: return "mean-rows";
    case OpKind::kSumAll: return "sum-all";
    case OpKind::kRowSoftmax: return "row-softmax";
    case OpKind::kL2NormalizeRows: return "l2-normalize-rows";
    case OpKind::kMul: return "elementwise-multiply";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kLog: return "log";
    case OpKind::kExp: return "exp";
    case OpKind::kSelectRow: return "select-row";
  }
  return "unknown";
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

const Tape::Node& Tape::node_of(Value v, const char* ctx) const {
  if (v.tape != this)
    throw TapeError(std::string(ctx) + ": value does not belong to this tape");
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw TapeError(std::string(ctx) + ": invalid value id");
  return nodes_[v.id];
}

Value Tape::leaf(Matrix data, bool needs_grad) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.grad = Matrix(data.rows(), data.cols());
  n.value = std::move(data);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Value Tape::apply(OpKind kind, const std::vector<Value>& inputs, OpAttr attr) {
  if (kind == OpKind::kLeaf)
    throw TapeError("apply: leaf is not an applicable op");
  if (inputs.empty()) throw TapeError(std::string(op_kind_name(kind)) + ": no inputs");

  std::vector<const Matrix*> in;
  std::vector<int> ids;
  bool needs_grad = false;
  in.reserve(inputs.size());
  for (const Value& v : inputs) {
    const Node& n = node_of(v, op_kind_name(kind));
    in.push_back(&n.value);
    ids.push_back(v.id);
    needs_grad = needs_grad || n.needs_grad;
  }

  Node out;
  out.kind = kind;
  out.inputs = std::move(ids);
  out.attr = attr;
  out.value = forward(kind, in, attr);
  out.grad = Matrix(out.value.rows(), out.value.cols());
  out.needs_grad = needs_grad;
  nodes_.push_back(std::move(out));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

Matrix Tape::forward(OpKind kind, const std::vector<const Matrix*>& in, const OpAttr& attr) {
  switch (kind) {
    case OpKind::kMatmul: {
      expect_arity(kind, in, 2);
      const Matrix& a = *in[0];
      const Matrix& b = *in[1];
      if (a.cols() != b.rows())
        shape_error(kind, a.shape_str() + " incompatible with " + b.shape_str());
      return matmul(a, b);
    }
    case OpKind::kAdd: {
      expect_arity(kind, in, 2);
      if (!in[0]->same_shape(*in[1]))
        shape_error(kind, in[0]->shape_str() + " vs " + in[1]->shape_str());
      Matrix out = *in[0];
      const double* b = in[1]->data();
      for (int i = 0; i < out.size(); ++i) out.data()[i] += b[i];
      return out;
    }
    case OpKind::kScale: {
      expect_arity(kind, in, 1);
      Matrix out = *in[0];
      for (int i = 0; i < out.size(); ++i) out.data()[i] *= attr.scalar;
      return out;
    }
    case OpKind::kConcatCols: {
      int rows = in[0]->rows();
      int cols = 0;
      for (const Matrix* m : in) {
        if (m->rows() != rows)
          shape_error(kind, "row mismatch: " + in[0]->shape_str() + " vs " + m->shape_str());
        cols += m->cols();
      }
      Matrix out(rows, cols);
      int at = 0;
      for (const Matrix* m : in) {
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < m->cols(); ++c) out(r, at + c) = (*m)(r, c);
        at += m->cols();
      }
      return out;
    }
    case OpKind::kRelu: {
      expect_arity(kind, in, 1);
      Matrix out = *in[0];
      for (int i = 0; i < out.size(); ++i)
        if (out.data()[i] < 0.0) out.data()[i] = 0.0;
      return out;
    }
    case OpKind::kMeanRows: {
      expect_arity(kind, in, 1);
      const Matrix& a = *in[0];
      if (a.rows() < 1) shape_error(kind, "needs at least one row, got " + a.shape_str());
      Matrix out(1, a.cols());
      for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) out(0, c) += a(r, c);
      for (int c = 0; c < a.cols(); ++c) out(0, c) /= a.rows();
      return out;
    }
    case OpKind::kSumAll: {
      expect_arity(kind, in, 1);
      Matrix out(1, 1);
      for (int i = 0; i < in[0]->size(); ++i) out(0, 0) += in[0]->data()[i];
      return out;
    }
    case OpKind::kRowSoftmax: {
      expect_arity(kind, in, 1);
      Matrix out = *in[0];
      for (int r = 0; r < out.rows(); ++r) {
        double* p = out.row(r);
        double mx = p[0];
        for (int c = 1; c < out.cols(); ++c) mx = std::max(mx, p[c]);
        double sum = 0.0;
        for (int c = 0; c < out.cols(); ++c) {
          p[c] = std::exp(p[c] - mx);
          sum += p[c];
        }
        for (int c = 0; c < out.cols(); ++c) p[c] /= sum;
      }
      return out;
    }
    case OpKind::kL2NormalizeRows: {
      expect_arity(kind, in, 1);
      Matrix out = *in[0];
      for (int r = 0; r < out.rows(); ++r) {
        const double norm = out.row_norm(r);
        if (norm == 0.0) {
          // Zero rows pass through unscaled; only degenerate inputs hit this.
          ++zero_row_warnings_;
          continue;
        }
        double* p = out.row(r);
        for (int c = 0; c < out.cols(); ++c) p[c] /= norm;
      }
      return out;
    }
    case OpKind::kMul: {
      expect_arity(kind, in, 2);
      if (!in[0]->same_shape(*in[1]))
        shape_error(kind, in[0]->shape_str() + " vs " + in[1]->shape_str());
      Matrix out = *in[0];
      const double* b = in[1]->data();
      for (int i = 0; i < out.size(); ++i) out.data()[i] *= b[i];
      return out;
    }
    case OpKind::kTranspose: {
      expect_arity(kind, in, 1);
      const Matrix& a = *in[0];
      Matrix out(a.cols(), a.rows());
      for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
      return out;
    }
    case OpKind::kLog: {
      expect_arity(kind, in, 1);
      Matrix out = *in[0];
      for (int i = 0; i < out.size(); ++i) out.data()[i] = std::log(out.data()[i]);
      return out;
    }
    case OpKind::kExp: {
      expect_arity(kind, in, 1);
      Matrix out = *in[0];
      for (int i = 0; i < out.size(); ++i) out.data()[i] = std::exp(out.data()[i]);
      return out;
    }
    case OpKind::kSelectRow: {
      expect_arity(kind, in, 1);
      const Matrix& a = *in[0];
      if (attr.row < 0 || attr.row >= a.rows())
        shape_error(kind, "row " + std::to_string(attr.row) + " out of range for " + a.shape_str());
      Matrix out(1, a.cols());
      for (int c = 0; c < a.cols(); ++c) out(0, c) = a(attr.row, c);
      return out;
    }
    default:
      throw TapeError("unknown op_kind " + std::to_string(static_cast<int>(kind)));
  }
}

void Tape::backward(Value root) {
  const Node& r = node_of(root, "backward");
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw TapeError("backward: root must be a 1x1 scalar, got " + r.value.shape_str());

  for (Node& n : nodes_) n.grad.fill(0.0);
  nodes_[root.id].grad(0, 0) = 1.0;

  for (int i = root.id; i >= 0; --i) {
    if (!nodes_[i].needs_grad || nodes_[i].kind == OpKind::kLeaf) continue;
    backprop(i);
  }
}

void Tape::backprop(int node_id) {
  Node& n = nodes_[node_id];
  const Matrix& g = n.grad;
  const Matrix& y = n.value;

  auto input = [&](int k) -> Node& { return nodes_[n.inputs[k]]; };
  auto wants = [&](int k) { return nodes_[n.inputs[k]].needs_grad; };

  switch (n.kind) {
    case OpKind::kMatmul: {
      if (wants(0)) matmul_nt_accumulate(g, input(1).value, input(0).grad);
      if (wants(1)) matmul_tn_accumulate(input(0).value, g, input(1).grad);
      break;
    }
    case OpKind::kAdd: {
      for (int k = 0; k < 2; ++k) {
        if (!wants(k)) continue;
        Matrix& d = input(k).grad;
        for (int i = 0; i < d.size(); ++i) d.data()[i] += g.data()[i];
      }
      break;
    }
    case OpKind::kScale: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      for (int i = 0; i < d.size(); ++i) d.data()[i] += n.attr.scalar * g.data()[i];
      break;
    }
    case OpKind::kConcatCols: {
      int at = 0;
      for (size_t k = 0; k < n.inputs.size(); ++k) {
        Matrix& d = input(static_cast<int>(k)).grad;
        if (wants(static_cast<int>(k))) {
          for (int r = 0; r < d.rows(); ++r)
            for (int c = 0; c < d.cols(); ++c) d(r, c) += g(r, at + c);
        }
        at += input(static_cast<int>(k)).value.cols();
      }
      break;
    }
    case OpKind::kRelu: {
      if (!wants(0)) break;
      const Matrix& x = input(0).value;
      Matrix& d = input(0).grad;
      // subgradient at 0 is 0
      for (int i = 0; i < d.size(); ++i)
        if (x.data()[i] > 0.0) d.data()[i] += g.data()[i];
      break;
    }
    case OpKind::kMeanRows: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      const double inv = 1.0 / d.rows();
      for (int r = 0; r < d.rows(); ++r)
        for (int c = 0; c < d.cols(); ++c) d(r, c) += g(0, c) * inv;
      break;
    }
    case OpKind::kSumAll: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      const double gv = g(0, 0);
      for (int i = 0; i < d.size(); ++i) d.data()[i] += gv;
      break;
    }
    case OpKind::kRowSoftmax: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      for (int r = 0; r < d.rows(); ++r) {
        double gy = 0.0;
        for (int c = 0; c < d.cols(); ++c) gy += g(r, c) * y(r, c);
        for (int c = 0; c < d.cols(); ++c) d(r, c) += y(r, c) * (g(r, c) - gy);
      }
      break;
    }
    case OpKind::kL2NormalizeRows: {
      if (!wants(0)) break;
      const Matrix& x = input(0).value;
      Matrix& d = input(0).grad;
      for (int r = 0; r < d.rows(); ++r) {
        const double norm = x.row_norm(r);
        if (norm == 0.0) continue;  // forward passed the zero row through
        double gy = 0.0;
        for (int c = 0; c < d.cols(); ++c) gy += g(r, c) * y(r, c);
        for (int c = 0; c < d.cols(); ++c) d(r, c) += (g(r, c) - gy * y(r, c)) / norm;
      }
      break;
    }
    case OpKind::kMul: {
      for (int k = 0; k < 2; ++k) {
        if (!wants(k)) continue;
        Matrix& d = input(k).grad;
        const Matrix& other = input(1 - k).value;
        for (int i = 0; i < d.size(); ++i) d.data()[i] += g.data()[i] * other.data()[i];
      }
      break;
    }
    case OpKind::kTranspose: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      for (int r = 0; r < d.rows(); ++r)
        for (int c = 0; c < d.cols(); ++c) d(r, c) += g(c, r);
      break;
    }
    case OpKind::kLog: {
      if (!wants(0)) break;
      const Matrix& x = input(0).value;
      Matrix& d = input(0).grad;
      for (int i = 0; i < d.size(); ++i) d.data()[i] += g.data()[i] / x.data()[i];
      break;
    }
    case OpKind::kExp: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      for (int i = 0; i < d.size(); ++i) d.data()[i] += g.data()[i] * y.data()[i];
      break;
    }
    case OpKind::kSelectRow: {
      if (!wants(0)) break;
      Matrix& d = input(0).grad;
      for (int c = 0; c < d.cols(); ++c) d(n.attr.row, c) += g(0, c);
      break;
    }
    default:
      throw TapeError("backward: unknown op_kind");
  }
}

const Matrix& Tape::value(Value v) const { return node_of(v, "value").value; }
const Matrix& Tape::grad(Value v) const { return node_of(v, "grad").grad; }
bool Tape::needs_grad(Value v) const { return node_of(v, "needs_grad").needs_grad; }

namespace {
Tape& tape_of(Value a, const char* ctx) {
  if (!a.valid()) throw TapeError(std::string(ctx) + ": invalid value");
  return *a.tape;
}
}  // namespace

Value matmul(Value a, Value b) { return tape_of(a, "matmul").apply(OpKind::kMatmul, {a, b}); }
Value add(Value a, Value b) { return tape_of(a, "add").apply(OpKind::kAdd, {a, b}); }
Value scale(Value a, double c) {
  return tape_of(a, "scale").apply(OpKind::kScale, {a}, OpAttr{.scalar = c});
}
Value concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) throw TapeError("concat-columns: no inputs");
  return tape_of(parts[0], "concat-columns").apply(OpKind::kConcatCols, parts);
}
Value relu(Value a) { return tape_of(a, "relu").apply(OpKind::kRelu, {a}); }
Value mean_rows(Value a) { return tape_of(a, "mean-rows").apply(OpKind::kMeanRows, {a}); }
Value sum_all(Value a) { return tape_of(a, "sum-all").apply(OpKind::kSumAll, {a}); }
Value row_softmax(Value a) { return tape_of(a, "row-softmax").apply(OpKind::kRowSoftmax, {a}); }
Value l2_normalize_rows(Value a) {
  return tape_of(a, "l2-normalize-rows").apply(OpKind::kL2NormalizeRows, {a});
}
Value mul(Value a, Value b) { return tape_of(a, "elementwise-multiply").apply(OpKind::kMul, {a, b}); }
Value transpose(Value a) { return tape_of(a, "transpose").apply(OpKind::kTranspose, {a}); }
Value log(Value a) { return tape_of(a, "log").apply(OpKind::kLog, {a}); }
Value exp(Value a) { return tape_of(a, "exp").apply(OpKind::kExp, {a}); }
Value select_row(Value a, int row) {
  return tape_of(a, "select-row").apply(OpKind::kSelectRow, {a}, OpAttr{.row = row});
}

Value concat_rows(const std::vector<Value>& parts) {
  if (parts.empty()) throw TapeError("concat_rows: no inputs");
  if (parts.size() == 1) return parts[0];
  std::vector<Value> cols;
  cols.reserve(parts.size());
  for (Value p : parts) cols.push_back(transpose(p));
  return transpose(concat_cols(cols));
}

}  // namespace hise
