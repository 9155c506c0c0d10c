#pragma once

// L1 baselines: proximal-gradient l1-regularized Gaussian MLE (off-diagonal
// penalty) and nodewise lasso by cyclic coordinate descent, plus k-fold CV
// over the scale constant of lambda = c sqrt(log p / n).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gmrf/errors.hpp"
#include "gmrf/greedy_nbd.hpp"
#include "gmrf/linalg.hpp"
#include "gmrf/models.hpp"

namespace gmrf {

struct LassoConfig {
  double lambda = 0.0;
  double tol = 1e-7;
  int max_iter = 20000;

  void validate() const {
    if (lambda < 0) throw InvalidParameter("lambda must be >= 0");
    if (tol <= 0) throw InvalidParameter("tol must be > 0");
  }
};

inline double scaled_lambda(double c, int p, int n) {
  return c * std::sqrt(std::log(static_cast<double>(p)) / n);
}

inline double glasso_objective(const Matrix& theta, const Matrix& sigma, double lambda) {
  double pen = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
  return gaussian_loss(theta, sigma) + lambda * pen;
}

namespace detail {

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

/// Max KKT residual of the glasso optimum conditions, given W = Theta^{-1}.
inline double glasso_kkt_residual(const Matrix& theta, const Matrix& w, const Matrix& sigma,
                                  double lambda) {
  const int p = static_cast<int>(theta.rows());
  double res = 0.0;
  for (int i = 0; i < p; ++i) {
    res = std::max(res, std::abs(sigma(i, i) - w(i, i)));
    for (int j = i + 1; j < p; ++j) {
      const double grad = sigma(i, j) - w(i, j);
      if (theta(i, j) != 0.0)
        res = std::max(res, std::abs(grad + lambda * (theta(i, j) > 0 ? 1.0 : -1.0)));
      else
        res = std::max(res, std::max(0.0, std::abs(grad) - lambda));
    }
  }
  return res;
}

}  // namespace detail

namespace detail {

/// Exact minimizer over a of
///   2 a sigma_ij - log((1+a Wij)^2 - a^2 Wii Wjj) + 2 lambda |theta_ij + a|
/// on the PD interval. Convexity: if the one-sided minimizer lands on its
/// own side it is global, otherwise the kink a = -theta_ij is.
inline double penalized_pair_step(const Matrix& w, double sij, double tij, double lambda, int i,
                                  int j) {
  if (lambda == 0.0) return single_pair_min_s(w, sij, i, j).alpha;
  const double a_plus = single_pair_min_s(w, sij + lambda, i, j).alpha;
  if (tij + a_plus > 0.0) return a_plus;
  const double a_minus = single_pair_min_s(w, sij - lambda, i, j).alpha;
  if (tij + a_minus < 0.0) return a_minus;
  return -tij;
}

}  // namespace detail

/// Cyclic exact coordinate minimization of
/// tr(Theta Sigma) - log det Theta + lambda |Theta|_{1,off}; W = Theta^{-1}
/// is maintained by rank-one updates and refactorized once per sweep.
/// Convergence: stationarity (KKT) residual <= tol.
inline Matrix fit_glasso(const Matrix& sigma, const LassoConfig& cfg) {
  cfg.validate();
  const int p = static_cast<int>(sigma.rows());
  Matrix theta = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    if (sigma(i, i) <= 0) throw InvalidParameter("fit_glasso: nonpositive diagonal");
    theta(i, i) = 1.0 / sigma(i, i);
  }
  Matrix w = invert_pd(theta);
  for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
    if (detail::glasso_kkt_residual(theta, w, sigma, cfg.lambda) <= cfg.tol) return theta;
    for (int i = 0; i < p; ++i) {
      const double b = 1.0 / sigma(i, i) - 1.0 / w(i, i);
      if (b != 0.0) {
        const double denom = 1.0 + b * w(i, i);
        if (std::abs(denom) < 1e-12) throw SingularUpdate();
        Vector wc = w.col(i);
        w.noalias() -= (b / denom) * (wc * wc.transpose());
        theta(i, i) += b;
      }
    }
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        const double a =
            detail::penalized_pair_step(w, sigma(i, j), theta(i, j), cfg.lambda, i, j);
        if (a == 0.0) continue;
        w = pair_update_inverse(w, i, j, a);
        theta(i, j) = (a == -theta(i, j)) ? 0.0 : theta(i, j) + a;
        theta(j, i) = theta(i, j);
      }
    }
    w = invert_pd(theta);  // clear rank-one drift before the KKT check
  }
  throw NonConvergence("fit_glasso: iteration cap reached");
}

/// Cyclic coordinate descent for
/// (1/2n) |x_r - X gamma|^2 + lambda |gamma|_1 with soft thresholding.
/// Returns a length-p vector with entry r fixed at 0.
inline Vector fit_lasso_cd(const SampleSet& xs, int r, const LassoConfig& cfg) {
  cfg.validate();
  const int p = xs.p();
  const int n = xs.n();
  Vector gamma = Vector::Zero(p);
  Vector residual = xs.x.col(r);
  Vector col_sq(p);
  for (int t = 0; t < p; ++t) col_sq(t) = xs.x.col(t).squaredNorm() / n;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    double max_change = 0.0;
    for (int t = 0; t < p; ++t) {
      if (t == r || col_sq(t) < 1e-14) continue;
      const double old = gamma(t);
      const double c = xs.x.col(t).dot(residual) / n + col_sq(t) * old;
      const double next = detail::soft_threshold(c, cfg.lambda) / col_sq(t);
      if (next != old) {
        residual -= (next - old) * xs.x.col(t);
        gamma(t) = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    if (max_change <= cfg.tol) return gamma;
  }
  throw NonConvergence("fit_lasso_cd: iteration cap reached");
}

/// Per-node lasso neighborhoods (nonzeros above 1e-8) combined into a graph.
inline GraphEstimate fit_nbd_lasso(const SampleSet& xs, const LassoConfig& cfg) {
  std::vector<NeighborhoodState> states;
  states.reserve(xs.p());
  for (int r = 0; r < xs.p(); ++r) {
    const Vector gamma = fit_lasso_cd(xs, r, cfg);
    NeighborhoodState st;
    st.node = r;
    for (int t = 0; t < xs.p(); ++t)
      if (t != r && std::abs(gamma(t)) > 1e-8) st.active.push_back(t);
    states.push_back(std::move(st));
  }
  return combine_neighborhoods(states);
}

enum class CvMethod { Glasso, Nbd };

/// k-fold CV over the constant c in lambda = c sqrt(log p / n_train):
/// held-out negative log-likelihood for glasso, held-out squared error
/// (summed over nodes) for the nodewise lasso. Ties go to the smallest c.
inline double select_lambda_cv(const SampleSet& xs, int k, std::vector<double> grid,
                               CvMethod method, double tol = 1e-6) {
  if (k < 2) throw InvalidParameter("select_lambda_cv: k must be >= 2");
  if (grid.empty()) throw InvalidParameter("select_lambda_cv: empty grid");
  if (xs.n() < k) throw InvalidParameter("select_lambda_cv: n < k");
  std::sort(grid.begin(), grid.end());
  const int n = xs.n();
  const int p = xs.p();

  // contiguous folds
  std::vector<std::pair<int, int>> folds;  // [begin, end)
  for (int f = 0; f < k; ++f)
    folds.emplace_back(f * n / k, (f + 1) * n / k);

  double best_c = grid.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (double c : grid) {
    double score = 0.0;
    bool failed = false;
    for (const auto& [b, e] : folds) {
      SampleSet train, test;
      train.x.resize(n - (e - b), p);
      test.x = xs.x.middleRows(b, e - b);
      if (b > 0) train.x.topRows(b) = xs.x.topRows(b);
      if (e < n) train.x.bottomRows(n - e) = xs.x.bottomRows(n - e);
      const double lambda = scaled_lambda(c, p, train.n());
      LassoConfig cfg;
      cfg.lambda = lambda;
      cfg.tol = tol;
      try {
        if (method == CvMethod::Glasso) {
          const Matrix theta = fit_glasso(sample_covariance(train), cfg);
          score += gaussian_loss(theta, sample_covariance(test));
        } else {
          for (int r2 = 0; r2 < p; ++r2) {
            const Vector gamma = fit_lasso_cd(train, r2, cfg);
            const Vector res = test.x.col(r2) - test.x * gamma;
            score += res.squaredNorm() / (2.0 * test.n());
          }
        }
      } catch (const Error&) {
        failed = true;
        break;
      }
    }
    if (failed) continue;
    if (score < best_score) {
      best_score = score;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace gmrf
