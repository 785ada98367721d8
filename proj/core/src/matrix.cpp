#include "hise/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace hise {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
  v_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Matrix Matrix::full(int rows, int cols, double value) {
  Matrix m(rows, cols);
  m.fill(value);
  return m;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows(); ++r) {
    if (static_cast<int>(rows[r].size()) != m.cols())
      throw std::invalid_argument("Matrix::from_rows: ragged rows");
    for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Matrix Matrix::gaussian(int rows, int cols, double stddev, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, stddev);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double value) {
  for (auto& x : v_) x = value;
}

bool Matrix::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Matrix::row_norm(int r) const {
  double s = 0.0;
  const double* p = row(r);
  for (int c = 0; c < cols_; ++c) s += p[c] * p[c];
  return std::sqrt(s);
}

void matmul_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: " + a.shape_str() + " incompatible with " + b.shape_str());
  Matrix c(a.rows(), b.cols());
  matmul_accumulate(a, b, c);
  return c;
}

double dot_rows(const Matrix& a, int ra, const Matrix& b, int rb) {
  double s = 0.0;
  const double* pa = a.row(ra);
  const double* pb = b.row(rb);
  for (int c = 0; c < a.cols(); ++c) s += pa[c] * pb[c];
  return s;
}

}  // namespace hise
