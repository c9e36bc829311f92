// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <random>

#include "asem/embedding.hpp"
#include "asem/error.hpp"
#include "asem/matrix.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asem;

TEST_CASE("matrix constructors enforce shape and finiteness") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), Error);
  try {
    Matrix(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()});
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
  }
  CHECK_THROWS_AS((Matrix{{1.0, INFINITY}}), Error);
  CHECK_THROWS_AS((Matrix{{1.0, 2.0}, {3.0}}), Error);
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  CHECK(m(1, 2) == 6.0);
  CHECK(m.transposed()(2, 1) == 6.0);
}

TEST_CASE("matmul") {
  SUBCASE("identity") {
    const Matrix m{{1, 2}, {3, 4}};
    CHECK(matmul(Matrix::identity(2), m) == m);
  }
  SUBCASE("row times column") {
    const Matrix c = matmul(Matrix{{1, 2}}, Matrix{{3}, {4}});
    CHECK(c.rows() == 1);
    CHECK(c.cols() == 1);
    CHECK(c(0, 0) == 11.0);
  }
  SUBCASE("matches naive triple loop") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix a = oracle::random_matrix(3, 4, rng);
      const Matrix b = oracle::random_matrix(4, 2, rng);
      const auto expected = oracle::naive_matmul(oracle::to_grid(a), oracle::to_grid(b));
      const Matrix c = matmul(a, b);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(c(i, j) - expected[i][j]) < 1e-12);
      const Matrix at_b = matmul_at_b(a.transposed(), b);
      const Matrix a_bt = matmul_a_bt(a, b.transposed());
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          CHECK(std::abs(at_b(i, j) - expected[i][j]) < 1e-12);
          CHECK(std::abs(a_bt(i, j) - expected[i][j]) < 1e-12);
        }
      }
    }
  }
  SUBCASE("shape mismatch") {
    try {
      matmul(Matrix(2, 3), Matrix(2, 3));
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
  }
}

TEST_CASE("l2_normalize_rows") {
  SUBCASE("3-4-5") {
    const auto n = l2_normalize_rows(Matrix{{3, 4}});
    REQUIRE(n.ok());
    CHECK(n.rows(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n.rows(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("unit row unchanged") {
    const auto n = l2_normalize_rows(Matrix{{1, 0, 0}});
    CHECK(n.value() == Matrix{{1, 0, 0}});
  }
  SUBCASE("two rows against per-row division") {
    const Matrix m{{2, 2}, {-1, 1}};
    const auto n = l2_normalize_rows(m).value();
    for (std::size_t r = 0; r < 2; ++r) {
      const double norm = std::hypot(m(r, 0), m(r, 1));
      CHECK(std::abs(n(r, 0) - m(r, 0) / norm) < 1e-15);
      CHECK(std::abs(n(r, 1) - m(r, 1) / norm) < 1e-15);
    }
    CHECK(std::abs(n(0, 0) - 0.70710678) < 1e-8);
    CHECK(std::abs(n(1, 0) + 0.70710678) < 1e-8);
  }
  SUBCASE("zero-norm row flagged and left as is") {
    const auto n = l2_normalize_rows(Matrix{{3, 4}, {0, 0}, {1e-13, 0}});
    CHECK_FALSE(n.ok());
    CHECK(n.zero_norm_rows == std::vector<std::size_t>{1, 2});
    CHECK(n.rows(2, 0) == 1e-13);
    CHECK(n.rows(0, 0) == doctest::Approx(0.6));
    try {
      n.value();
      FAIL("expected ZeroNormRow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroNormRow);
    }
  }
  SUBCASE("zero columns rejected") { CHECK_THROWS_AS(l2_normalize_rows(Matrix(2, 0)), Error); }
}

TEST_CASE("cosine_similarity_matrix examples") {
  CHECK(cosine_similarity_matrix(Matrix{{1, 0}}, Matrix{{1, 0}}).scores() == Matrix{{1.0}});
  CHECK(cosine_similarity_matrix(Matrix{{1, 0}, {0, 1}}, Matrix{{0, 1}, {1, 0}}).scores() ==
        (Matrix{{0, 1}, {1, 0}}));
  const double v = cosine_similarity_matrix(Matrix{{1, 1}}, Matrix{{1, 0}})(0, 0);
  CHECK(std::abs(v - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(v - 0.70710678) < 1e-8);
}

TEST_CASE("cosine_similarity_matrix errors") {
  try {
    cosine_similarity_matrix(Matrix(2, 3), Matrix(3, 3));
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  try {
    cosine_similarity_matrix(Matrix{{1, 0}, {0, 0}}, Matrix{{1, 0}, {0, 1}});
    FAIL("expected ZeroNormRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroNormRow);
  }
  CHECK_THROWS_AS(SimilarityMatrix(Matrix(2, 3)), Error);
  CHECK_THROWS_AS(SimilarityMatrix(Matrix{{1.1}}), Error);
  CHECK_NOTHROW(SimilarityMatrix(Matrix{{1.0 + 5e-10}}));
}

TEST_CASE("cosine similarity properties over random batches") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 12);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = dim(rng);
    const std::size_t d = dim(rng);
    const Matrix a = oracle::random_matrix(b, d, rng);
    const Matrix t = oracle::random_matrix(b, d, rng);
    const auto s = cosine_similarity_matrix(a, t);
    const auto expected = oracle::cosine(oracle::to_grid(a), oracle::to_grid(t));

    // Scale invariance.
    Matrix scaled = a;
    const double c = scale(rng);
    for (double& v : scaled.values()) v *= c;
    const auto s_scaled = cosine_similarity_matrix(scaled, t);
    // Transpose duality, exact.
    const auto s_swapped = cosine_similarity_matrix(t, a);
    // Unit rows: cosine equals dot product.
    const Matrix an = l2_normalize_rows(a).value();
    const Matrix tn = l2_normalize_rows(t).value();
    const Matrix dots = matmul_a_bt(an, tn);

    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        CHECK(std::abs(s(i, j)) <= 1.0 + kCosineSlack);
        CHECK(std::abs(s(i, j) - expected[i][j]) < 1e-12);
        CHECK(std::abs(s_scaled(i, j) - s(i, j)) < 1e-9);
        CHECK(s_swapped(j, i) == s(i, j));
        CHECK(std::abs(cosine_similarity_matrix(an, tn)(i, j) - dots(i, j)) < 1e-12);
      }
    }
  }
}
