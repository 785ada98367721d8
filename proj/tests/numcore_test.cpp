#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "hise/adam.hpp"
#include "hise/gradcheck.hpp"
#include "hise/tape.hpp"

using namespace hise;

TEST_SUITE_BEGIN("numcore");

TEST_CASE("matmul against identity") {
  Tape t;
  Value a = t.leaf(Matrix::from_rows({{1, 2}, {3, 4}}));
  Value out = matmul(a, t.constant(Matrix::identity(2)));
  CHECK(t.value(out) == t.value(a));
}

TEST_CASE("relu clips negatives") {
  Tape t;
  Value out = relu(t.leaf(Matrix::from_rows({{0.5, -0.2}})));
  CHECK(t.value(out)(0, 0) == 0.5);
  CHECK(t.value(out)(0, 1) == 0.0);
}

TEST_CASE("row-softmax of equal logits is uniform") {
  Tape t;
  Value out = row_softmax(t.leaf(Matrix::from_rows({{0.0, 0.0}})));
  CHECK(t.value(out)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.value(out)(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("row-softmax rows sum to one and are shift-invariant") {
  std::mt19937_64 rng(11);
  Matrix x = Matrix::gaussian(5, 7, 2.0, rng);
  Matrix shifted = x;
  for (int i = 0; i < shifted.size(); ++i) shifted.data()[i] += 13.75;

  Tape t;
  const Matrix& a = t.value(row_softmax(t.leaf(x)));
  const Matrix& b = t.value(row_softmax(t.leaf(shifted)));
  for (int r = 0; r < a.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < a.cols(); ++c) {
      sum += a(r, c);
      CHECK(a(r, c) == doctest::Approx(b(r, c)).epsilon(1e-9));
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("l2-normalize produces unit rows and passes zero rows through") {
  std::mt19937_64 rng(3);
  Matrix x = Matrix::gaussian(6, 5, 3.0, rng);
  for (int c = 0; c < x.cols(); ++c) x(2, c) = 0.0;  // one all-zero row

  Tape t;
  Value out = l2_normalize_rows(t.leaf(x));
  const Matrix& y = t.value(out);
  for (int r = 0; r < y.rows(); ++r) {
    if (r == 2) {
      CHECK(y.row_norm(r) == 0.0);
    } else {
      CHECK(y.row_norm(r) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK(t.zero_row_normalizations() == 1);
}

TEST_CASE("backward: relu subgradient is zero at negatives") {
  Tape t;
  Value x = t.leaf(Matrix::from_rows({{2.0, -1.0}}));
  t.backward(sum_all(relu(x)));
  CHECK(t.grad(x)(0, 0) == 1.0);
  CHECK(t.grad(x)(0, 1) == 0.0);
}

TEST_CASE("backward: matmul row-sum pattern matches finite differences") {
  std::mt19937_64 rng(5);
  const Matrix w = Matrix::gaussian(2, 2, 1.0, rng);
  const Matrix x0 = Matrix::gaussian(1, 2, 1.0, rng);

  auto f = [&](Tape& t, Value x) { return sum_all(matmul(x, t.constant(w))); };
  CHECK(finite_difference_check(f, x0, 1e-5).max_rel_err <= 1e-10);

  // grad(x) = row sums of W^T, i.e. grad[j] = sum_k W[j][k]
  Tape t;
  Value x = t.leaf(x0);
  t.backward(f(t, x));
  CHECK(t.grad(x)(0, 0) == doctest::Approx(w(0, 0) + w(0, 1)).epsilon(1e-12));
  CHECK(t.grad(x)(0, 1) == doctest::Approx(w(1, 0) + w(1, 1)).epsilon(1e-12));
}

TEST_CASE("backward: d(x^2)/dx = 2x via elementwise multiply") {
  Tape t;
  Value x = t.leaf(Matrix::from_rows({{3.0}}));
  t.backward(sum_all(mul(x, x)));
  CHECK(t.grad(x)(0, 0) == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("backward: gradient of the root scalar is one") {
  Tape t;
  Value x = t.leaf(Matrix::from_rows({{1.0, 2.0}}));
  Value root = sum_all(x);
  t.backward(root);
  CHECK(t.grad(root)(0, 0) == 1.0);
}

TEST_CASE("backward is deterministic and repeatable") {
  std::mt19937_64 rng(17);
  Tape t;
  Value x = t.leaf(Matrix::gaussian(4, 4, 1.0, rng));
  Value y = t.leaf(Matrix::gaussian(4, 4, 1.0, rng));
  Value root = sum_all(row_softmax(matmul(relu(x), transpose(y))));

  t.backward(root);
  Matrix first = t.grad(x);
  t.backward(root);
  const Matrix& second = t.grad(x);
  CHECK(std::memcmp(first.data(), second.data(), first.size() * sizeof(double)) == 0);
}

TEST_CASE("shape errors name the op and dimensions") {
  Tape t;
  Value a = t.leaf(Matrix(2, 3));
  Value b = t.leaf(Matrix(4, 5));
  CHECK_THROWS_WITH_AS(matmul(a, b), "matmul: 2x3 incompatible with 4x5", TapeError);
  CHECK_THROWS_AS(add(a, b), TapeError);
  CHECK_THROWS_AS(select_row(a, 7), TapeError);
}

TEST_CASE("unknown op kind and non-scalar root are rejected") {
  Tape t;
  Value a = t.leaf(Matrix(2, 2));
  CHECK_THROWS_AS(t.apply(static_cast<OpKind>(99), {a}), TapeError);
  CHECK_THROWS_AS(t.backward(a), TapeError);
}

TEST_CASE("values from different tapes cannot be combined") {
  Tape t1, t2;
  Value a = t1.leaf(Matrix(2, 2));
  Value b = t2.leaf(Matrix(2, 2));
  CHECK_THROWS_AS(add(a, b), TapeError);
}

TEST_CASE("constants receive no gradient") {
  Tape t;
  Value x = t.leaf(Matrix::from_rows({{1.0, 2.0}}));
  Value c = t.constant(Matrix::from_rows({{3.0, 4.0}}));
  t.backward(sum_all(mul(x, c)));
  CHECK(t.grad(x)(0, 0) == 3.0);
  CHECK(t.grad(c)(0, 0) == 0.0);
  CHECK(t.grad(c)(0, 1) == 0.0);
}

TEST_CASE("every catalog op matches finite differences over 100 random instances") {
  // same ground as the production grad suite, at a 100-instance sweep
  std::mt19937_64 seeds(99);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t seed = seeds();
    std::mt19937_64 rng(seed);
    const int m = std::uniform_int_distribution<int>(2, 4)(rng);
    const int n = std::uniform_int_distribution<int>(2, 4)(rng);
    Matrix x = Matrix::gaussian(m, n, 1.0, rng);
    Matrix weights = Matrix::gaussian(m, n, 1.0, rng);
    Matrix away = x;
    for (int k = 0; k < away.size(); ++k) {
      const double v = away.data()[k];
      away.data()[k] = (v >= 0 ? 1.0 : -1.0) * (0.05 + std::fabs(v));
    }
    Matrix positive = x;
    for (int k = 0; k < positive.size(); ++k)
      positive.data()[k] = 0.2 + std::fabs(positive.data()[k]);

    auto weighted = [&](Tape& t, Value v) { return sum_all(mul(v, t.constant(weights))); };
    auto check = [&](const ScalarFn& f, const Matrix& at) {
      CAPTURE(seed);
      CHECK(finite_difference_check(f, at, 1e-5).max_rel_err <= 1e-4);
    };

    check([&](Tape& t, Value v) { return weighted(t, relu(v)); }, away);
    check([&](Tape& t, Value v) { return weighted(t, row_softmax(v)); }, x);
    check([&](Tape& t, Value v) { return weighted(t, l2_normalize_rows(v)); }, away);
    check([&](Tape& t, Value v) { return weighted(t, hise::log(v)); }, positive);
    check([&](Tape& t, Value v) { return weighted(t, hise::exp(v)); }, x);
    const Matrix addend = Matrix::gaussian(m, n, 1.0, rng);
    check([&](Tape& t, Value v) { return weighted(t, add(v, t.constant(addend))); }, x);
    check([&](Tape& t, Value v) { return weighted(t, mul(v, t.constant(addend))); }, x);
    const double c = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    check([&](Tape& t, Value v) { return weighted(t, scale(v, c)); }, x);
    const Matrix wide = Matrix::gaussian(m, 2 * n, 1.0, rng);
    check([&](Tape& t, Value v) {
      return sum_all(mul(concat_cols({v, t.constant(addend)}), t.constant(wide)));
    }, x);
    const Matrix wrow = Matrix::gaussian(1, n, 1.0, rng);
    check([&](Tape& t, Value v) { return sum_all(mul(mean_rows(v), t.constant(wrow))); }, x);
    const int row = std::uniform_int_distribution<int>(0, m - 1)(rng);
    check([&](Tape& t, Value v) {
      return sum_all(mul(select_row(v, row), t.constant(wrow)));
    }, x);
    const Matrix weights_t = Matrix::gaussian(n, m, 1.0, rng);
    check([&](Tape& t, Value v) {
      return sum_all(mul(transpose(v), t.constant(weights_t)));
    }, x);
    const Matrix rhs = Matrix::gaussian(n, 3, 1.0, rng);
    const Matrix w2 = Matrix::gaussian(m, 3, 1.0, rng);
    check([&](Tape& t, Value v) {
      return sum_all(mul(matmul(v, t.constant(rhs)), t.constant(w2)));
    }, x);
  }
}

TEST_CASE("adam: hand-evaluated first step") {
  Matrix theta(1, 1);
  Matrix grad = Matrix::from_rows({{2.0}});
  AdamState adam(AdamConfig{.learning_rate = 1e-3});
  adam.step({&theta}, {&grad});
  CHECK(theta(0, 0) == doctest::Approx(-0.000999999995).epsilon(1e-12));
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::mt19937_64 rng(4);
  Matrix theta = Matrix::gaussian(3, 3, 1.0, rng);
  const Matrix before = theta;
  Matrix grad(3, 3);
  AdamState adam;
  adam.step({&theta}, {&grad});
  CHECK(theta == before);
}

TEST_CASE("adam: two steps of constant gradient have non-increasing magnitude") {
  Matrix theta(1, 1);
  Matrix grad = Matrix::from_rows({{0.7}});
  AdamState adam(AdamConfig{.learning_rate = 1e-3});
  adam.step({&theta}, {&grad});
  const double d1 = std::fabs(theta(0, 0));
  const double t1 = theta(0, 0);
  adam.step({&theta}, {&grad});
  const double d2 = std::fabs(theta(0, 0) - t1);
  CHECK(d2 <= d1 + 1e-15);
}

TEST_CASE("adam: shape mismatch is rejected") {
  Matrix theta(2, 2);
  Matrix grad(3, 3);
  AdamState adam;
  CHECK_THROWS_AS(adam.step({&theta}, {&grad}), std::invalid_argument);
}

TEST_CASE("finite differences on a linear function are essentially exact") {
  std::mt19937_64 rng(8);
  Matrix x = Matrix::gaussian(3, 4, 1.0, rng);
  auto f = [](Tape&, Value v) { return sum_all(v); };
  CHECK(finite_difference_check(f, x, 1e-5).max_rel_err <= 1e-10);
}

TEST_CASE("finite_difference_check rejects non-finite values") {
  Matrix x = Matrix::from_rows({{-1.0}});
  auto f = [](Tape&, Value v) { return sum_all(hise::log(v)); };
  CHECK_THROWS_AS(finite_difference_check(f, x, 1e-5), std::runtime_error);
}

TEST_SUITE_END();
