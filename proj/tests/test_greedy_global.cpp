#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <gmrf/greedy_global.hpp>
#include <gmrf/models.hpp>

#include "test_util.hpp"

using namespace gmrf;
using testutil::golden_section_min;
using testutil::random_pd;

TEST_CASE("gaussian_loss examples") {
  CHECK(gaussian_loss(Matrix::Identity(3, 3), Matrix::Identity(3, 3)) == Catch::Approx(3.0));
  CHECK(gaussian_loss(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)) ==
        Catch::Approx(4.0 - 2.0 * std::log(2.0)));
  Matrix sigma(2, 2);
  sigma << 1, 0.5, 0.5, 1;
  CHECK(gaussian_loss(invert_pd(sigma), sigma) == Catch::Approx(2.0 + std::log(0.75)));
}

namespace {

double g_restriction(const Matrix& w, double s, int i, int j, double a) {
  return 2.0 * a * s -
         std::log((1 + a * w(i, j)) * (1 + a * w(i, j)) - a * a * w(i, i) * w(j, j));
}

}  // namespace

TEST_CASE("single_pair_min anchored cases") {
  const Matrix w = Matrix::Identity(2, 2);
  Matrix sigma = Matrix::Identity(2, 2);

  auto step0 = single_pair_min(w, sigma, 0, 1);
  CHECK(step0.alpha == Catch::Approx(0.0).margin(1e-14));
  CHECK(step0.gain == Catch::Approx(0.0).margin(1e-14));

  sigma(0, 1) = sigma(1, 0) = 0.5;
  auto step1 = single_pair_min(w, sigma, 0, 1);
  CHECK(step1.alpha == Catch::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-10));
  // closed form: sqrt(2) - 1 + log(2 (sqrt(2) - 1)) = 0.2259872...
  const double gain1 = std::sqrt(2.0) - 1.0 + std::log(2.0 * (std::sqrt(2.0) - 1.0));
  CHECK(step1.gain == Catch::Approx(gain1).epsilon(1e-10));

  sigma(0, 1) = sigma(1, 0) = -0.5;
  auto step2 = single_pair_min(w, sigma, 0, 1);
  CHECK(step2.alpha == Catch::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-10));
  CHECK(step2.gain == Catch::Approx(step1.gain).epsilon(1e-12));
}

TEST_CASE("single_pair_min agrees with golden-section oracle") {
  SplitMix64 rng(31);
  double worst_alpha = 0.0, worst_gain = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 9);
    const Matrix theta = random_pd(p, rng);
    const Matrix w = invert_pd(theta);
    const Matrix sigma = random_pd(p, rng);
    const int i = static_cast<int>(rng.next_u64() % p);
    int j = static_cast<int>(rng.next_u64() % p);
    if (j == i) j = (j + 1) % p;
    const auto step = single_pair_min(w, sigma, i, j);
    const auto [lo, hi] = pd_interval_for_pair(w, i, j);
    const double span = hi - lo;
    const double oracle = golden_section_min(
        [&](double a) { return g_restriction(w, sigma(i, j), i, j, a); },
        lo + 1e-12 * span, hi - 1e-12 * span);
    worst_alpha = std::max(worst_alpha, std::abs(step.alpha - oracle));
    worst_gain = std::max(
        worst_gain, std::abs(step.gain + g_restriction(w, sigma(i, j), i, j, oracle)));
  }
  CHECK(worst_alpha <= 1e-7);
  CHECK(worst_gain <= 1e-9);
}

TEST_CASE("forward_scan tie-break and families") {
  GreedyConfig cfg;

  // all gains zero -> lexicographically smallest pair
  auto st = initial_state(Matrix::Identity(3, 3));
  auto f = forward_scan(st, Matrix::Identity(3, 3), cfg);
  CHECK(f.i == 0);
  CHECK(f.j == 1);
  CHECK(f.gain == Catch::Approx(0.0).margin(1e-14));

  // chain ends are symmetric; the tie goes to (0,1)
  const Matrix chain = make_chain_cov(3, 0.5);
  auto st2 = initial_state(chain);
  auto f2 = forward_scan(st2, chain, cfg);
  CHECK(f2.i == 0);
  CHECK(f2.j == 1);
  const auto s01 = single_pair_min(st2.w, chain, 0, 1);
  const auto s12 = single_pair_min(st2.w, chain, 1, 2);
  CHECK(s01.gain == Catch::Approx(s12.gain).epsilon(1e-12));

  // star: first pick is a hub edge
  const Matrix star = make_star_cov(4, 0.4);
  auto st3 = initial_state(star);
  auto f3 = forward_scan(st3, star, cfg);
  CHECK(f3.i == 0);
}

TEST_CASE("parallel forward_scan equals sequential") {
  SplitMix64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 10);
    const Matrix sigma = random_pd(p, rng);
    auto st = initial_state(sigma);
    // randomize the state a little
    const int i = static_cast<int>(rng.next_u64() % p);
    int j = static_cast<int>(rng.next_u64() % p);
    if (j == i) j = (j + 1) % p;
    GreedyConfig cfg;
    st.support.insert(i, j);
    detail::apply_pair(st, sigma, i, j, 0.05, cfg);

    cfg.threads = 1;
    const auto seq = forward_scan(st, sigma, cfg);
    cfg.threads = 7;
    const auto par = forward_scan(st, sigma, cfg);
    CHECK(seq.i == par.i);
    CHECK(seq.j == par.j);
    CHECK(seq.alpha == par.alpha);
  }
}

TEST_CASE("refit_support examples") {
  GreedyConfig cfg;

  auto st = refit_support(Matrix::Identity(2, 2), EdgeSet{2, {}}, cfg,
                          initial_state(Matrix::Identity(2, 2)));
  CHECK(sup_norm_deviation(st.theta, Matrix::Identity(2, 2)) < 1e-12);
  CHECK(st.loss == Catch::Approx(2.0));

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  auto st2 = refit_support(d, EdgeSet{2, {}}, cfg, initial_state(d));
  CHECK(st2.theta(0, 0) == Catch::Approx(0.5));
  CHECK(st2.theta(1, 1) == Catch::Approx(0.25));

  Matrix sigma(2, 2);
  sigma << 1, 0.5, 0.5, 1;
  EdgeSet full{2, {{0, 1}}};
  GreedyConfig tight = cfg;
  tight.refit_tol = 1e-14;  // loss gap ~ deviation^2
  auto st3 = refit_support(sigma, full, tight, initial_state(sigma));
  CHECK(sup_norm_deviation(st3.theta, invert_pd(sigma)) < 1e-6);
}

TEST_CASE("backward_scan identifies the weakest edge") {
  GreedyConfig cfg;
  const Matrix sigma = make_chain_cov(4, 0.5);
  EdgeSet s{4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}};
  auto st = refit_support(sigma, s, cfg, initial_state(sigma));

  // oracle: evaluate all four removals directly
  double best_incr = 1e300;
  Edge best_edge{-1, -1};
  for (const auto& [i, j] : s.pairs) {
    Matrix reduced = st.theta;
    reduced(i, j) = reduced(j, i) = 0.0;
    const double incr = gaussian_loss(reduced, sigma) - gaussian_loss(st.theta, sigma);
    if (incr < best_incr) {
      best_incr = incr;
      best_edge = {i, j};
    }
  }
  CHECK(best_edge == Edge{0, 3});  // the spurious edge

  const auto b = backward_scan(st, sigma);
  CHECK(Edge{b.i, b.j} == best_edge);
  CHECK(b.loss_increase == Catch::Approx(best_incr).margin(1e-9));

  // zeroing an already-zero pair costs nothing
  auto st0 = initial_state(sigma);
  st0.support.insert(0, 1);
  const auto b0 = backward_scan(st0, sigma);
  CHECK(b0.loss_increase == Catch::Approx(0.0).margin(1e-14));

  PrecisionState empty = initial_state(sigma);
  CHECK_THROWS_AS(backward_scan(empty, sigma), EmptySupport);
}

TEST_CASE("fit_global_greedy population exactness") {
  GreedyConfig cfg;
  cfg.eps_stop = 1e-6;

  auto st = fit_global_greedy(Matrix::Identity(4, 4), cfg);
  CHECK(st.support.pairs.empty());
  CHECK(sup_norm_deviation(st.theta, Matrix::Identity(4, 4)) < 1e-9);

  auto chain = fit_global_greedy(make_chain_cov(10, 0.5), cfg);
  CHECK(chain.support == chain_edges(10));

  auto diamond = fit_global_greedy(make_diamond_cov(0.3), cfg);
  CHECK(diamond.support == diamond_edges());
}

TEST_CASE("fit keeps the state consistent") {
  GreedyConfig cfg;
  cfg.eps_stop = 1e-6;
  const Matrix sigma = make_star_cov(8, 0.4);
  const auto st = fit_global_greedy(sigma, cfg);
  CHECK(st.support == star_edges(8));
  // invariants: off-support zeros, inverse maintained, loss consistent
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      if (!st.support.contains(i, j)) CHECK(st.theta(i, j) == 0.0);
  CHECK(sup_norm_deviation((st.theta * st.w).eval(), Matrix::Identity(8, 8)) <= 1e-6);
  CHECK(st.loss == Catch::Approx(gaussian_loss(st.theta, sigma)).margin(1e-8));
  CHECK(is_positive_definite(st.theta));
}

TEST_CASE("loss gradient finite-difference check") {
  SplitMix64 rng(41);
  const int p = 6;
  const Matrix theta = random_pd(p, rng);
  const Matrix sigma = random_pd(p, rng);
  const Matrix w = invert_pd(theta);
  const double h = 1e-6;
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      Matrix up = theta, dn = theta;
      up(i, j) += h;
      dn(i, j) -= h;
      if (i != j) {
        up(j, i) = up(i, j);
        dn(j, i) = dn(i, j);
      }
      const double fd = (gaussian_loss(up, sigma) - gaussian_loss(dn, sigma)) / (2 * h);
      const double analytic =
          i == j ? sigma(i, i) - w(i, i) : 2.0 * (sigma(i, j) - w(i, j));
      CHECK(fd == Catch::Approx(analytic).epsilon(1e-5));
    }
  }
}

TEST_CASE("scalar remainder sandwich on (0, 1]") {
  for (int k = 1; k <= 1000; ++k) {
    const double gamma = k / 1000.0;
    const double r = gamma - std::log(1.0 + gamma);
    CHECK(r >= gamma * gamma / 4.0);
    CHECK(r <= gamma * gamma / 2.0);
  }
}

TEST_CASE("loss decreases across greedy iterations") {
  GreedyConfig cfg;
  cfg.eps_stop = 1e-5;
  const Matrix sigma = make_chain_cov(8, 0.5);
  const auto st = fit_global_greedy(sigma, cfg);
  const double final_loss = st.loss;
  const double initial_loss = gaussian_loss(Matrix::Identity(8, 8), sigma);
  CHECK(final_loss < initial_loss);
  // each completed outer iteration must net more than (1 - nu) eps
  const double min_total =
      (1.0 - cfg.nu) * cfg.eps_stop * static_cast<double>(st.support.size());
  CHECK(initial_loss - final_loss > min_total);
}
