#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <gmrf/linalg.hpp>

#include "test_util.hpp"

using namespace gmrf;
using testutil::random_pd;

TEST_CASE("cholesky identity and known factor") {
  CHECK(sup_norm_deviation(cholesky(Matrix::Identity(3, 3)), Matrix::Identity(3, 3)) == 0.0);

  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  const Matrix l = cholesky(m);
  CHECK(l(0, 0) == Catch::Approx(2.0));
  CHECK(l(1, 0) == Catch::Approx(1.0));
  CHECK(l(1, 1) == Catch::Approx(std::sqrt(2.0)));
  CHECK(sup_norm_deviation((l * l.transpose()).eval(), m) < 1e-10);
}

TEST_CASE("cholesky rejects indefinite input") {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3, -1
  CHECK_THROWS_AS(cholesky(m), NotPositiveDefinite);
}

TEST_CASE("log_det_pd") {
  CHECK(log_det_pd(Matrix::Identity(5, 5)) == Catch::Approx(0.0).margin(1e-14));
  CHECK(log_det_pd(2.0 * Matrix::Identity(2, 2)) == Catch::Approx(2.0 * std::log(2.0)));
  Matrix m(2, 2);
  m << 4, 2, 2, 3;  // det = 8
  CHECK(log_det_pd(m) == Catch::Approx(std::log(8.0)));
}

TEST_CASE("invert_pd examples") {
  CHECK(sup_norm_deviation(invert_pd(Matrix::Identity(4, 4)), Matrix::Identity(4, 4)) < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  const Matrix di = invert_pd(d);
  CHECK(di(0, 0) == Catch::Approx(0.5));
  CHECK(di(1, 1) == Catch::Approx(0.25));

  Matrix m(2, 2);
  m << 1, 0.5, 0.5, 1;
  Matrix expect(2, 2);
  expect << 1, -0.5, -0.5, 1;
  expect /= 0.75;
  CHECK(sup_norm_deviation(invert_pd(m), expect) < 1e-12);
}

TEST_CASE("invert_pd residual up to p = 20") {
  SplitMix64 rng(11);
  for (int p = 1; p <= 20; ++p) {
    const Matrix m = random_pd(p, rng);
    const Matrix w = invert_pd(m);
    CHECK(sup_norm_deviation((m * w).eval(), Matrix::Identity(p, p)) <= 1e-9);
  }
}

TEST_CASE("pd_interval_for_pair") {
  const auto [lo0, hi0] = pd_interval_for_pair(Matrix::Identity(3, 3), 0, 2);
  CHECK(lo0 == Catch::Approx(-1.0));
  CHECK(hi0 == Catch::Approx(1.0));

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 1;
  const auto [lo1, hi1] = pd_interval_for_pair(d, 0, 1);
  CHECK(lo1 == Catch::Approx(-0.5));
  CHECK(hi1 == Catch::Approx(0.5));

  Matrix w(2, 2);
  w << 1, 0.5, 0.5, 1;
  const auto [lo2, hi2] = pd_interval_for_pair(w, 0, 1);
  CHECK(lo2 == Catch::Approx(-2.0 / 3.0));
  CHECK(hi2 == Catch::Approx(2.0));
}

TEST_CASE("pd interval endpoints bracket the PD cone") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 9);
    const Matrix theta = random_pd(p, rng);
    const Matrix w = invert_pd(theta);
    const int i = static_cast<int>(rng.next_u64() % p);
    int j = static_cast<int>(rng.next_u64() % p);
    if (j == i) j = (j + 1) % p;
    const auto [lo, hi] = pd_interval_for_pair(w, i, j);
    Matrix inside = theta;
    inside(i, j) += hi - 1e-9;
    inside(j, i) = inside(i, j);
    CHECK_NOTHROW(cholesky(inside));
    Matrix outside = theta;
    outside(i, j) += hi + 1e-3;
    outside(j, i) = outside(i, j);
    CHECK_THROWS_AS(cholesky(outside), NotPositiveDefinite);
  }
}

TEST_CASE("pair_update_inverse examples") {
  CHECK(sup_norm_deviation(pair_update_inverse(Matrix::Identity(3, 3), 0, 1, 0.0),
                           Matrix::Identity(3, 3)) == 0.0);

  Matrix theta(2, 2);
  theta << 1, 0.5, 0.5, 1;
  const Matrix w = pair_update_inverse(Matrix::Identity(2, 2), 0, 1, 0.5);
  CHECK(sup_norm_deviation(w, invert_pd(theta)) < 1e-12);

  CHECK_THROWS_AS(pair_update_inverse(Matrix::Identity(2, 2), 0, 1, 1.0), SingularUpdate);
}

TEST_CASE("pair_update_inverse matches full inversion on random instances") {
  SplitMix64 rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 9);
    const Matrix theta = random_pd(p, rng);
    const Matrix w = invert_pd(theta);
    const int i = static_cast<int>(rng.next_u64() % p);
    int j = static_cast<int>(rng.next_u64() % p);
    if (j == i) j = (j + 1) % p;
    const auto [lo, hi] = pd_interval_for_pair(w, i, j);
    const double alpha = lo + (hi - lo) * (0.05 + 0.9 * rng.next_uniform());
    Matrix updated = theta;
    updated(i, j) += alpha;
    updated(j, i) = updated(i, j);
    worst = std::max(worst,
                     sup_norm_deviation(pair_update_inverse(w, i, j, alpha), invert_pd(updated)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("determinant identity for pair updates") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 9);
    const Matrix theta = random_pd(p, rng);
    const Matrix w = invert_pd(theta);
    const int i = static_cast<int>(rng.next_u64() % p);
    int j = static_cast<int>(rng.next_u64() % p);
    if (j == i) j = (j + 1) % p;
    const auto [lo, hi] = pd_interval_for_pair(w, i, j);
    const double alpha = lo + (hi - lo) * (0.05 + 0.9 * rng.next_uniform());
    Matrix updated = theta;
    updated(i, j) += alpha;
    updated(j, i) = updated(i, j);
    const double factor = (1 + alpha * w(i, j)) * (1 + alpha * w(i, j)) -
                          alpha * alpha * w(i, i) * w(j, j);
    CHECK(log_det_pd(updated) - log_det_pd(theta) ==
          Catch::Approx(std::log(factor)).margin(1e-9));
  }
}

TEST_CASE("sup_norm_deviation") {
  CHECK(sup_norm_deviation(Matrix::Identity(3, 3), Matrix::Identity(3, 3)) == 0.0);
  CHECK(sup_norm_deviation(Matrix::Identity(2, 2), Matrix::Zero(2, 2)) == 1.0);
  Matrix a(2, 2);
  a << 1, 0.3, 0.3, 1;
  CHECK(sup_norm_deviation(a, Matrix::Identity(2, 2)) == Catch::Approx(0.3));
  CHECK_THROWS_AS(sup_norm_deviation(Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                  DimensionMismatch);
}
