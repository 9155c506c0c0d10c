#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <gmrf/conditions.hpp>
#include <gmrf/models.hpp>

using namespace gmrf;

TEST_CASE("glasso irrepresentability anchors") {
  CHECK(glasso_irrepresentability(Matrix::Identity(4, 4), EdgeSet{4, {}}) ==
        Catch::Approx(0.0).margin(1e-12));

  // star family closed form |tau| (|tau| + 2)
  CHECK(glasso_irrepresentability(make_star_cov(4, 0.2), star_edges(4)) ==
        Catch::Approx(0.44).margin(1e-6));

  // diamond family closed form 4 |tau| (|tau| + 1)
  CHECK(glasso_irrepresentability(make_diamond_cov(0.1), diamond_edges()) ==
        Catch::Approx(0.44).margin(1e-6));

  CHECK_THROWS_AS(glasso_irrepresentability(Matrix::Identity(41, 41), EdgeSet{41, {}}),
                  DimensionTooLarge);
}

TEST_CASE("glasso irrepresentability matches the star formula across tau") {
  for (int p : {4, 9}) {
    for (double tau = 0.05; tau <= 0.451; tau += 0.05) {
      const double v = glasso_irrepresentability(make_star_cov(p, tau), star_edges(p));
      CHECK(v == Catch::Approx(tau * (tau + 2.0)).margin(1e-6));
    }
  }
}

TEST_CASE("nbd irrepresentability anchors") {
  CHECK(nbd_irrepresentability(Matrix::Identity(4, 4), EdgeSet{4, {}}) == 0.0);
  CHECK(nbd_irrepresentability(make_diamond_cov(0.2), diamond_edges()) ==
        Catch::Approx(0.4).margin(1e-9));
  CHECK(nbd_irrepresentability(make_chain_cov(6, 0.5), chain_edges(6)) < 1.0);
}

TEST_CASE("restricted extreme eigenvalues") {
  const auto [c_id, r_id] = restricted_extreme_eigs(Matrix::Identity(6, 6), 3);
  CHECK(c_id == Catch::Approx(1.0));
  CHECK(r_id == Catch::Approx(1.0));

  const auto [c_chain, r_chain] = restricted_extreme_eigs(make_chain_cov(4, 0.5), 2);
  CHECK(c_chain == Catch::Approx(0.5));  // 1 - tau on adjacent pairs

  const Matrix diamond = make_diamond_cov(0.3);
  const auto [c_dia, r_dia] = restricted_extreme_eigs(diamond, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(diamond);
  CHECK(c_dia == Catch::Approx(es.eigenvalues().minCoeff()));
  CHECK(r_dia * c_dia == Catch::Approx(es.eigenvalues().maxCoeff()));

  CHECK_THROWS_AS(restricted_extreme_eigs(Matrix::Identity(40, 40), 20), CombinatorialBlowup);
}

TEST_CASE("theorem thresholds") {
  TheoryParams tp;
  tp.c = 1;
  tp.eta = 10;
  tp.rho = 1;
  tp.cmin = 1;
  tp.d = 2;
  tp.p = 36;
  tp.n = 1000;

  const auto global = theorem_thresholds(tp, TheoremKind::Global);
  CHECK(global.eps_min == Catch::Approx(0.143342).margin(1e-5));
  CHECK(global.signal_min == Catch::Approx(1.070857).margin(1e-5));

  const auto nbd = theorem_thresholds(tp, TheoremKind::Neighborhood);
  CHECK(nbd.eps_min == Catch::Approx(0.573366).margin(1e-5));
  CHECK(nbd.signal_min == Catch::Approx(4.283427).margin(1e-5));

  CHECK(eta_lower_bound(1.0, 2) == Catch::Approx(10.0));
  tp.eta = 9.0;  // below the bound at rho = 1
  CHECK_THROWS_AS(theorem_thresholds(tp, TheoremKind::Global), InvalidParameter);
}

TEST_CASE("threshold bisection") {
  const auto star = threshold_bisect(Family::Star, 9, IrrepMetric::Glasso);
  CHECK(star.crossed);
  CHECK(star.tau_star == Catch::Approx(std::sqrt(2.0) - 1.0).margin(1e-3));

  const auto dia_nbd = threshold_bisect(Family::Diamond, 4, IrrepMetric::Nbd);
  CHECK(dia_nbd.crossed);
  CHECK(dia_nbd.tau_star == Catch::Approx(0.5).margin(1e-3));

  const auto dia_gl = threshold_bisect(Family::Diamond, 4, IrrepMetric::Glasso);
  CHECK(dia_gl.crossed);
  CHECK(dia_gl.tau_star == Catch::Approx((std::sqrt(2.0) - 1.0) / 2.0).margin(1e-3));

  // nbd metric on a chain never crosses 1 inside the PD range
  const auto chain_nbd = threshold_bisect(Family::Chain, 6, IrrepMetric::Nbd);
  CHECK_FALSE(chain_nbd.crossed);
  CHECK(chain_nbd.tau_star == Catch::Approx(1.0));
}

TEST_CASE("restricted eigs of the sample covariance approach the population values") {
  const Matrix sigma = make_chain_cov(8, 0.5);
  const auto [cmin_pop, rho_pop] = restricted_extreme_eigs(sigma, 3);
  int close = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const SampleSet xs = sample_gaussian(sigma, 20000, 400 + t);
    const auto [cmin_hat, rho_hat] = restricted_extreme_eigs(sample_covariance(xs), 3);
    if (std::abs(cmin_hat - cmin_pop) <= 0.1) ++close;
  }
  CHECK(close >= 18);  // >= 90%
}

TEST_CASE("condition report") {
  const auto rep = condition_report(make_diamond_cov(0.2), diamond_edges(), 2);
  CHECK(rep.nbd_irrep == Catch::Approx(0.4).margin(1e-9));
  CHECK(rep.nbd_admissible);
  CHECK(rep.rho_hat >= 1.0);
  CHECK(rep.cmin_hat > 0.0);
}
