#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hise {

// Dense row-major matrix of doubles. All model state and tape values use
// this one shape-checked container; everything runs in 64-bit.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-filled

  static Matrix full(int rows, int cols, double value);
  static Matrix identity(int n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix gaussian(int rows, int cols, double stddev, std::mt19937_64& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double* row(int r) { return v_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return v_.data() + static_cast<size_t>(r) * cols_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  void fill(double value);
  bool all_finite() const;
  double row_norm(int r) const;

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && v_ == other.v_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

// C += A * B with plain loops; shapes must already agree.
void matmul_accumulate(const Matrix& a, const Matrix& b, Matrix& c);
Matrix matmul(const Matrix& a, const Matrix& b);

double dot_rows(const Matrix& a, int ra, const Matrix& b, int rb);

}  // namespace hise
