#pragma once

// Per-node forward-backward greedy least squares for neighborhood recovery,
// plus AND/OR symmetrization into a graph estimate. A population-moment mode
// runs the same greedy on exact second moments (the n -> infinity limit).

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gmrf/edge_set.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/greedy_global.hpp"  // GreedyConfig
#include "gmrf/linalg.hpp"
#include "gmrf/models.hpp"

namespace gmrf {

struct NeighborhoodState {
  int node = 0;
  std::vector<int> active;  // sorted feature indices, excludes node
  Vector gamma;             // coefficients aligned with active
  Vector residual;          // empty in population-moment mode
  double loss = 0.0;
  std::vector<double> forward_gains;  // stack
};

/// (1/2n) sum_i (x_r^i - sum_t gamma_t x_t^i)^2 for coefficients on `active`.
inline double ls_loss(const Vector& gamma, const std::vector<int>& active, const SampleSet& xs,
                      int r) {
  Vector res = xs.x.col(r);
  for (std::size_t k = 0; k < active.size(); ++k) res -= gamma(k) * xs.x.col(active[k]);
  return res.squaredNorm() / (2.0 * xs.n());
}

struct ForwardGain {
  double alpha = 0.0;
  double gain = 0.0;
};

/// Best single-coordinate step for feature column x_t against the residual:
/// alpha* = <x_t, res>/|x_t|^2, gain = <x_t, res>^2 / (2 n |x_t|^2).
inline ForwardGain forward_gain(const Vector& residual, const Vector& x_t, int n) {
  const double nrm2 = x_t.squaredNorm();
  if (nrm2 < 1e-14) throw ZeroColumn();
  const double ip = x_t.dot(residual);
  return {ip / nrm2, ip * ip / (2.0 * n * nrm2)};
}

/// Exact least squares of column r on the active columns via column-pivoted
/// QR. RankDeficient when the R-diagonal condition estimate exceeds 1e12.
inline NeighborhoodState refit_ls(const SampleSet& xs, int r, const std::vector<int>& active) {
  NeighborhoodState st;
  st.node = r;
  st.active = active;
  std::sort(st.active.begin(), st.active.end());
  const int n = xs.n();
  const int k = static_cast<int>(st.active.size());
  const Vector y = xs.x.col(r);
  if (k == 0) {
    st.gamma = Vector();
    st.residual = y;
    st.loss = y.squaredNorm() / (2.0 * n);
    return st;
  }
  if (k > n) throw RankDeficient("more active features than samples");
  Matrix a(n, k);
  for (int c = 0; c < k; ++c) a.col(c) = xs.x.col(st.active[c]);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Vector rdiag = qr.matrixR().diagonal().head(k).cwiseAbs();
  if (rdiag.minCoeff() <= 0 || rdiag.maxCoeff() / rdiag.minCoeff() > 1e12)
    throw RankDeficient();
  st.gamma = qr.solve(y);
  st.residual = y - a * st.gamma;
  st.loss = st.residual.squaredNorm() / (2.0 * n);
  return st;
}

/// Algorithm: forward-add the max-gain feature while the gain exceeds
/// eps_stop; after each addition + exact refit, backward-remove features
/// whose zeroing (no refit) costs <= nu times the matching forward gain.
inline NeighborhoodState fit_neighborhood(const SampleSet& xs, int r, const GreedyConfig& cfg) {
  cfg.validate();
  if (xs.n() < 2) throw InvalidParameter("fit_neighborhood: need n >= 2");
  const int p = xs.p();
  const int n = xs.n();
  NeighborhoodState st = refit_ls(xs, r, {});
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    // forward scan
    int best_t = -1;
    ForwardGain best;
    for (int t = 0; t < p; ++t) {
      if (t == r || std::binary_search(st.active.begin(), st.active.end(), t)) continue;
      ForwardGain g;
      try {
        g = forward_gain(st.residual, xs.x.col(t), n);
      } catch (const ZeroColumn&) {
        continue;
      }
      if (best_t < 0 || g.gain > best.gain) {
        best_t = t;
        best = g;
      }
    }
    if (best_t < 0 || best.gain <= cfg.eps_stop) return st;
    if (static_cast<int>(st.active.size()) >= cfg.max_active) return st;

    std::vector<int> act = st.active;
    act.push_back(best_t);
    std::vector<double> gains = st.forward_gains;
    gains.push_back(best.gain);
    st = refit_ls(xs, r, act);
    st.forward_gains = std::move(gains);

    // backward removals
    while (!st.active.empty() && !st.forward_gains.empty()) {
      int worst_k = -1;
      double worst_incr = 0.0;
      for (std::size_t k2 = 0; k2 < st.active.size(); ++k2) {
        const Vector& xt = xs.x.col(st.active[k2]);
        const double g = st.gamma(k2);
        // loss change of zeroing gamma_t without refit
        const double incr =
            std::max(0.0, (2.0 * g * xt.dot(st.residual) + g * g * xt.squaredNorm()) / (2.0 * n));
        if (worst_k < 0 || incr < worst_incr) {
          worst_k = static_cast<int>(k2);
          worst_incr = incr;
        }
      }
      if (worst_k < 0 || worst_incr > cfg.nu * st.forward_gains.back()) break;
      std::vector<int> reduced = st.active;
      reduced.erase(reduced.begin() + worst_k);
      std::vector<double> g2 = st.forward_gains;
      g2.pop_back();
      st = refit_ls(xs, r, reduced);
      st.forward_gains = std::move(g2);
    }
  }
  throw NonConvergence("fit_neighborhood: iteration cap reached");
}

/// Population-moment mode: identical greedy on exact second moments M
/// (M = Sigma, or any p x p second-moment matrix). Residual correlations
/// c_t = M_tr - M_tA gamma replace inner products; loss is in the same
/// (1/2n)-scaled units.
inline NeighborhoodState fit_neighborhood_population(const Matrix& m, int r,
                                                     const GreedyConfig& cfg) {
  cfg.validate();
  const int p = static_cast<int>(m.rows());
  NeighborhoodState st;
  st.node = r;
  st.loss = m(r, r) / 2.0;

  auto resid_corr = [&](int t) {
    double c = m(t, r);
    for (std::size_t k = 0; k < st.active.size(); ++k) c -= st.gamma(k) * m(t, st.active[k]);
    return c;
  };
  auto refit = [&](std::vector<int> act) {
    std::sort(act.begin(), act.end());
    const int k = static_cast<int>(act.size());
    Vector gamma(k);
    if (k > 0) {
      Matrix maa(k, k);
      Vector mar(k);
      for (int a = 0; a < k; ++a) {
        mar(a) = m(act[a], r);
        for (int b = 0; b < k; ++b) maa(a, b) = m(act[a], act[b]);
      }
      Eigen::LDLT<Matrix> ldlt(maa);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw RankDeficient("singular active moment block");
      gamma = ldlt.solve(mar);
      st.loss = (m(r, r) - gamma.dot(mar)) / 2.0;
    } else {
      st.loss = m(r, r) / 2.0;
    }
    st.active = std::move(act);
    st.gamma = std::move(gamma);
  };

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    int best_t = -1;
    double best_gain = 0.0, best_c = 0.0;
    for (int t = 0; t < p; ++t) {
      if (t == r || std::binary_search(st.active.begin(), st.active.end(), t)) continue;
      if (m(t, t) < 1e-14) continue;
      const double c = resid_corr(t);
      const double gain = c * c / (2.0 * m(t, t));
      if (best_t < 0 || gain > best_gain) {
        best_t = t;
        best_gain = gain;
        best_c = c;
      }
    }
    (void)best_c;
    if (best_t < 0 || best_gain <= cfg.eps_stop) return st;
    if (static_cast<int>(st.active.size()) >= cfg.max_active) return st;

    std::vector<int> act = st.active;
    act.push_back(best_t);
    st.forward_gains.push_back(best_gain);
    refit(std::move(act));

    while (!st.active.empty() && !st.forward_gains.empty()) {
      int worst_k = -1;
      double worst_incr = 0.0;
      for (std::size_t k2 = 0; k2 < st.active.size(); ++k2) {
        const int t = st.active[k2];
        const double g = st.gamma(k2);
        const double incr = std::max(0.0, g * resid_corr(t) + g * g * m(t, t) / 2.0);
        if (worst_k < 0 || incr < worst_incr) {
          worst_k = static_cast<int>(k2);
          worst_incr = incr;
        }
      }
      if (worst_k < 0 || worst_incr > cfg.nu * st.forward_gains.back()) break;
      std::vector<int> reduced = st.active;
      reduced.erase(reduced.begin() + worst_k);
      st.forward_gains.pop_back();
      refit(std::move(reduced));
    }
  }
  throw NonConvergence("fit_neighborhood_population: iteration cap reached");
}

enum class CombineRule { And, Or };

struct GraphEstimate {
  int p = 0;
  std::vector<std::vector<int>> neighborhoods;
  EdgeSet edges_and;
  EdgeSet edges_or;
};

inline GraphEstimate combine_neighborhoods(const std::vector<NeighborhoodState>& states) {
  GraphEstimate g;
  g.p = static_cast<int>(states.size());
  g.edges_and.p = g.p;
  g.edges_or.p = g.p;
  g.neighborhoods.resize(g.p);
  for (const auto& st : states) g.neighborhoods[st.node] = st.active;
  auto has = [&](int r, int t) {
    const auto& nb = g.neighborhoods[r];
    return std::binary_search(nb.begin(), nb.end(), t);
  };
  for (int i = 0; i < g.p; ++i) {
    for (int j = i + 1; j < g.p; ++j) {
      const bool ij = has(i, j), ji = has(j, i);
      if (ij && ji) g.edges_and.insert(i, j);
      if (ij || ji) g.edges_or.insert(i, j);
    }
  }
  return g;
}

inline GraphEstimate fit_nbd_greedy(const SampleSet& xs, const GreedyConfig& cfg) {
  std::vector<NeighborhoodState> states;
  states.reserve(xs.p());
  for (int r = 0; r < xs.p(); ++r) states.push_back(fit_neighborhood(xs, r, cfg));
  return combine_neighborhoods(states);
}

inline GraphEstimate fit_nbd_greedy_population(const Matrix& sigma, const GreedyConfig& cfg) {
  const int p = static_cast<int>(sigma.rows());
  std::vector<NeighborhoodState> states;
  states.reserve(p);
  for (int r = 0; r < p; ++r) states.push_back(fit_neighborhood_population(sigma, r, cfg));
  return combine_neighborhoods(states);
}

}  // namespace gmrf
