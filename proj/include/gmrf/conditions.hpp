#pragma once

// Sparsistency-condition calculators: irrepresentability values for the two
// l1 methods, restricted extreme eigenvalues over k-subsets, theorem
// threshold formulas, and admissible-tau bisection for the analytic families.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gmrf/edge_set.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/linalg.hpp"
#include "gmrf/models.hpp"

namespace gmrf {

/// Edge-based irrepresentability of the l1-regularized Gaussian MLE:
/// infinity-norm of Gamma_{S^c S} (Gamma_SS)^{-1} where Gamma = Sigma (x) Sigma
/// (Kronecker product, entry [(a,b),(c,d)] = Sigma_ac Sigma_bd) and
/// S = {(a,b) : a == b or {a,b} in E}. Condition holds iff the value < 1.
inline double glasso_irrepresentability(const Matrix& sigma, const EdgeSet& edges) {
  const int p = static_cast<int>(sigma.rows());
  if (p > 40) throw DimensionTooLarge("glasso_irrepresentability: p must be <= 40");
  std::vector<std::pair<int, int>> s_idx, sc_idx;
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      if (a == b || edges.contains(a, b))
        s_idx.emplace_back(a, b);
      else
        sc_idx.emplace_back(a, b);
    }
  }
  if (sc_idx.empty()) return 0.0;
  const int ns = static_cast<int>(s_idx.size());
  Matrix gss(ns, ns);
  for (int u = 0; u < ns; ++u)
    for (int v = 0; v < ns; ++v)
      gss(u, v) = sigma(s_idx[u].first, s_idx[v].first) * sigma(s_idx[u].second, s_idx[v].second);
  Matrix gss_inv = invert_pd(gss);
  double worst = 0.0;
  Eigen::RowVectorXd row(ns);
  for (const auto& [a, b] : sc_idx) {
    for (int v = 0; v < ns; ++v)
      row(v) = sigma(a, s_idx[v].first) * sigma(b, s_idx[v].second);
    worst = std::max(worst, (row * gss_inv).cwiseAbs().sum());
  }
  return worst;
}

/// Neighborhood-lasso irrepresentability: max over nodes r and non-neighbors
/// t != r of || Sigma_{t,N} (Sigma_{N,N})^{-1} ||_1 with N = N*(r).
inline double nbd_irrepresentability(const Matrix& sigma, const EdgeSet& edges) {
  const int p = static_cast<int>(sigma.rows());
  double worst = 0.0;
  for (int r = 0; r < p; ++r) {
    const std::vector<int> nb = edges.neighbors(r);
    if (nb.empty()) continue;
    const int k = static_cast<int>(nb.size());
    Matrix snn(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) snn(a, b) = sigma(nb[a], nb[b]);
    const Matrix snn_inv = invert_pd(snn);
    Eigen::RowVectorXd row(k);
    for (int t = 0; t < p; ++t) {
      if (t == r || std::binary_search(nb.begin(), nb.end(), t)) continue;
      for (int a = 0; a < k; ++a) row(a) = sigma(t, nb[a]);
      worst = std::max(worst, (row * snn_inv).cwiseAbs().sum());
    }
  }
  return worst;
}

/// Extreme eigenvalues of k x k principal submatrices over all supports:
/// returns (cmin_hat, rho_hat) with cmin_hat the smallest sigma_min and
/// rho_hat * cmin_hat the largest sigma_max. Exhaustive enumeration.
inline std::pair<double, double> restricted_extreme_eigs(const Matrix& sigma, int k) {
  const int p = static_cast<int>(sigma.rows());
  if (k < 1 || k > p) throw InvalidParameter("restricted_extreme_eigs: bad k");
  // subset-count guard
  double count = 1.0;
  for (int i = 0; i < k; ++i) count *= double(p - i) / double(i + 1);
  if (count > 1e5) throw CombinatorialBlowup();

  double cmin = std::numeric_limits<double>::infinity();
  double cmax = 0.0;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  Matrix sub(k, k);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  while (true) {
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) sub(a, b) = sigma(idx[a], idx[b]);
    es.compute(sub, Eigen::EigenvaluesOnly);
    cmin = std::min(cmin, es.eigenvalues().minCoeff());
    cmax = std::max(cmax, es.eigenvalues().maxCoeff());
    // next combination
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == p - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int q = pos + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
  }
  return {cmin, cmax / cmin};
}

struct TheoryParams {
  double rho = 1.0;    // restricted smoothness/eigenvalue ratio, >= 1
  double cmin = 1.0;   // restricted eigenvalue lower constant
  double eta = 10.0;   // sparsity inflation factor
  double c = 1.0;      // deviation constant
  int d = 1;           // max degree
  int p = 2;
  int n = 2;
};

inline double eta_lower_bound(double rho, int d) {
  const double t = std::sqrt((rho * rho - rho) / d) + std::sqrt(2.0);
  return 2.0 + 4.0 * rho * rho * t * t;
}

enum class TheoremKind { Global, Neighborhood };

struct Thresholds {
  double eps_min = 0.0;
  double signal_min = 0.0;
};

/// Global:       eps >= (2 c eta / rho^2) d log(p)/n, signal >= sqrt(8 eps / rho^2).
/// Neighborhood: eps >= (8 c rho eta / cmin) d log(p)/n, signal >= sqrt(32 rho eps / cmin).
inline Thresholds theorem_thresholds(const TheoryParams& tp, TheoremKind kind) {
  if (tp.rho < 1.0 || tp.cmin <= 0 || tp.n < 1 || tp.p < 2 || tp.d < 1 || tp.c <= 0)
    throw InvalidParameter("theorem_thresholds: bad parameters");
  if (tp.eta < eta_lower_bound(tp.rho, tp.d) - 1e-9)
    throw InvalidParameter("theorem_thresholds: eta below its lower bound");
  const double dlp_n = tp.d * std::log(static_cast<double>(tp.p)) / tp.n;
  Thresholds out;
  if (kind == TheoremKind::Global) {
    out.eps_min = (2.0 * tp.c * tp.eta / (tp.rho * tp.rho)) * dlp_n;
    out.signal_min = std::sqrt(8.0 * out.eps_min / (tp.rho * tp.rho));
  } else {
    out.eps_min = (8.0 * tp.c * tp.rho * tp.eta / tp.cmin) * dlp_n;
    out.signal_min = std::sqrt(32.0 * tp.rho * out.eps_min / tp.cmin);
  }
  return out;
}

enum class IrrepMetric { Glasso, Nbd };

struct BisectResult {
  double tau_star = 0.0;
  bool crossed = false;    // metric reached 1 inside the PD range
  bool monotone = true;    // grid pre-check; bisection untrusted when false
};

namespace detail {

inline double family_tau_max(Family f) {
  switch (f) {
    case Family::Diamond: return 1.0 / std::sqrt(2.0);
    default: return 1.0;
  }
}

inline double irrep_metric_at(Family f, int p, IrrepMetric m, double tau) {
  Matrix sigma;
  EdgeSet edges;
  switch (f) {
    case Family::Chain:
      sigma = make_chain_cov(p, tau);
      edges = chain_edges(p);
      break;
    case Family::Star:
      sigma = make_star_cov(p, tau);
      edges = star_edges(p);
      break;
    case Family::Diamond:
      sigma = make_diamond_cov(tau);
      edges = diamond_edges();
      break;
    default:
      throw InvalidParameter("threshold_bisect: family must be chain/star/diamond");
  }
  return m == IrrepMetric::Glasso ? glasso_irrepresentability(sigma, edges)
                                  : nbd_irrepresentability(sigma, edges);
}

}  // namespace detail

/// Smallest tau in (0, tau_max_PD) where the chosen irrepresentability
/// metric reaches 1, bisected to 1e-4. When the metric never crosses, the
/// PD boundary is returned with crossed = false.
inline BisectResult threshold_bisect(Family family, int p, IrrepMetric metric) {
  // pulled off the PD boundary far enough that the metric solves stay
  // well conditioned (a chain at tau = 1 - 1e-9 rounds its metric past 1)
  const double tau_max = detail::family_tau_max(family) * (1.0 - 1e-6);
  auto value = [&](double tau) {
    try {
      return detail::irrep_metric_at(family, p, metric, tau);
    } catch (const NotPositiveDefinite&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  BisectResult out;
  // monotonicity guard on a coarse grid
  const int grid_n = 32;
  double prev = -std::numeric_limits<double>::infinity();
  for (int g = 1; g <= grid_n; ++g) {
    const double v = value(tau_max * g / (grid_n + 1));
    if (v < prev - 1e-9) out.monotone = false;
    prev = v;
  }

  double lo = 0.0, hi = tau_max;
  if (value(hi) < 1.0) {
    out.tau_star = detail::family_tau_max(family);
    out.crossed = false;
    return out;
  }
  out.crossed = true;
  while (hi - lo > 1e-4 / 2) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) >= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  out.tau_star = 0.5 * (lo + hi);
  return out;
}

struct ConditionReport {
  double glasso_irrep = 0.0;
  double nbd_irrep = 0.0;
  double cmin_hat = 0.0;
  double rho_hat = 1.0;
  bool glasso_admissible = false;
  bool nbd_admissible = false;
};

inline ConditionReport condition_report(const Matrix& sigma, const EdgeSet& edges, int k) {
  ConditionReport r;
  r.glasso_irrep = glasso_irrepresentability(sigma, edges);
  r.nbd_irrep = nbd_irrepresentability(sigma, edges);
  std::tie(r.cmin_hat, r.rho_hat) = restricted_extreme_eigs(sigma, k);
  r.glasso_admissible = r.glasso_irrep < 1.0;
  r.nbd_admissible = r.nbd_irrep < 1.0;
  return r;
}

}  // namespace gmrf
