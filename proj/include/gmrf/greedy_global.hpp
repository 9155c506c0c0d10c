#pragma once

// Global forward-backward greedy minimization of the Gaussian loss
// L(Theta) = tr(Theta Sigma_hat) - log det(Theta) over PD matrices with a
// sparse off-diagonal support. Single-pair steps use the determinant
// identity det(Theta + a(e_ij+e_ji)) = det(Theta) ((1+a W_ij)^2 - a^2 W_ii W_jj)
// so the scan never refactorizes; W = Theta^{-1} is maintained by
// Sherman-Morrison pair updates with periodic full re-inversion.

#include <cmath>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "gmrf/edge_set.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/linalg.hpp"

namespace gmrf {

struct GreedyConfig {
  double eps_stop = 1e-6;  // forward stopping threshold
  double nu = 0.5;         // backward step factor, in (0,1)
  double refit_tol = 1e-10;
  int max_active = 1 << 20;
  int refactor_period = 50;  // full W re-inversion every this many accepted updates
  int max_iter = 100000;
  int max_refit_cycles = 1000;
  int threads = 1;  // candidate-scan fan-out; result independent of the value

  void validate() const {
    if (eps_stop <= 0) throw InvalidParameter("eps_stop must be > 0");
    if (nu <= 0 || nu >= 1) throw InvalidParameter("nu must be in (0,1)");
    if (refit_tol <= 0) throw InvalidParameter("refit_tol must be > 0");
  }
};

struct PrecisionState {
  Matrix theta;
  Matrix w;  // maintained theta^{-1}
  EdgeSet support;
  double loss = 0.0;
  std::vector<double> forward_gains;  // stack; popped when a backward step undoes a level
  int updates_since_refactor = 0;
};

inline double gaussian_loss(const Matrix& theta, const Matrix& sigma) {
  if (theta.rows() != sigma.rows()) throw DimensionMismatch("gaussian_loss: unequal dimensions");
  return theta.cwiseProduct(sigma).sum() - log_det_pd(theta);
}

/// Loss change of Theta -> Theta + a (e_ij + e_ji), from W alone.
inline double pair_loss_delta(const Matrix& w, double sigma_ij, int i, int j, double a) {
  const double factor =
      (1.0 + a * w(i, j)) * (1.0 + a * w(i, j)) - a * a * w(i, i) * w(j, j);
  return 2.0 * a * sigma_ij - std::log(factor);
}

struct PairStep {
  double alpha = 0.0;
  double gain = 0.0;  // loss decrease, >= 0
};

/// Exact minimizer of g(a) = 2 a s - log((1+a w_ij)^2 - a^2 w_ii w_jj) over
/// the PD interval, via the stationarity quadratic
///   s D a^2 - (D + 2 w_ij s) a + (w_ij - s) = 0,  D = w_ii w_jj - w_ij^2,
/// with a safeguarded bisection fallback on g'.
inline PairStep single_pair_min_s(const Matrix& w, double s, int i, int j) {
  const double wij = w(i, j);
  const double wii = w(i, i);
  const double wjj = w(j, j);
  const double d = wii * wjj - wij * wij;
  const auto [lo, hi] = pd_interval_for_pair(w, i, j);

  auto gprime = [&](double a) {
    const double f = (1.0 + a * wij) * (1.0 + a * wij) - a * a * wii * wjj;
    return 2.0 * s - (2.0 * (1.0 + a * wij) * wij - 2.0 * a * wii * wjj) / f;
  };

  double alpha;
  bool found = false;
  if (std::abs(s) < 1e-300) {
    alpha = wij / d;
    found = alpha > lo && alpha < hi;
  } else {
    const double qa = s * d;
    const double qb = -(d + 2.0 * wij * s);
    const double qc = wij - s;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0 && std::abs(qa) > 1e-300) {
      const double sq = std::sqrt(disc);
      // numerically stable root pair
      const double q = -0.5 * (qb + (qb >= 0 ? sq : -sq));
      const double r1 = q / qa;
      const double r2 = (q != 0.0) ? qc / q : r1;
      const bool in1 = r1 > lo && r1 < hi;
      const bool in2 = r2 > lo && r2 < hi;
      if (in1 && !in2) {
        alpha = r1;
        found = true;
      } else if (in2 && !in1) {
        alpha = r2;
        found = true;
      } else if (in1 && in2) {
        // degenerate double root; either works
        alpha = std::abs(gprime(r1)) <= std::abs(gprime(r2)) ? r1 : r2;
        found = true;
      }
    }
  }
  if (!found) {
    // g is strictly convex on (lo, hi) and diverges at both ends, so g'
    // crosses zero exactly once; bisect between points pushed off the ends.
    const double span = hi - lo;
    double a = lo + 1e-12 * span, b = hi - 1e-12 * span;
    double fa = gprime(a), fb = gprime(b);
    if (fa > 0) {
      alpha = lo <= 0 && hi >= 0 ? 0.0 : a;  // clipped; gradient points outward
    } else if (fb < 0) {
      alpha = b;
    } else {
      for (int it = 0; it < 200 && b - a > 1e-15 * span; ++it) {
        const double m = 0.5 * (a + b);
        if (gprime(m) <= 0)
          a = m;
        else
          b = m;
      }
      alpha = 0.5 * (a + b);
    }
  }
  PairStep step;
  step.alpha = alpha;
  step.gain = std::max(0.0, -pair_loss_delta(w, s, i, j, alpha));
  return step;
}

inline PairStep single_pair_min(const Matrix& w, const Matrix& sigma, int i, int j) {
  return single_pair_min_s(w, sigma(i, j), i, j);
}

namespace detail {

struct ScanBest {
  bool valid = false;
  int i = 0, j = 0;
  double alpha = 0.0;
  double gain = -1.0;

  void offer(int ci, int cj, const PairStep& s) {
    if (!valid || s.gain > gain ||
        (s.gain == gain && std::make_pair(ci, cj) < std::make_pair(i, j))) {
      valid = true;
      i = ci;
      j = cj;
      alpha = s.alpha;
      gain = s.gain;
    }
  }

  void merge(const ScanBest& o) {
    if (o.valid) offer(o.i, o.j, PairStep{o.alpha, o.gain});
  }
};

}  // namespace detail

struct ForwardChoice {
  int i = 0, j = 0;
  double alpha = 0.0;
  double gain = 0.0;
};

/// Best off-support pair by loss decrease; lexicographic tie-break.
/// Parallel fan-out reduces chunks in index order, so the result is
/// identical for any thread count.
inline ForwardChoice forward_scan(const PrecisionState& state, const Matrix& sigma,
                                  const GreedyConfig& cfg = {}) {
  const int p = static_cast<int>(state.theta.rows());
  if (static_cast<int>(state.support.size()) >= cfg.max_active)
    throw NoCandidates("active set saturated max_active");
  std::vector<std::pair<int, int>> cands;
  cands.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (!state.support.contains(i, j)) cands.emplace_back(i, j);
  if (cands.empty()) throw NoCandidates();

  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cands.size())));
  std::vector<detail::ScanBest> bests(nthreads);
  auto work = [&](int t) {
    const std::size_t chunk = (cands.size() + nthreads - 1) / nthreads;
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(cands.size(), b + chunk);
    for (std::size_t k = b; k < e; ++k) {
      const auto [i, j] = cands[k];
      bests[t].offer(i, j, single_pair_min(state.w, sigma, i, j));
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  detail::ScanBest best;
  for (const auto& b : bests) best.merge(b);
  return {best.i, best.j, best.alpha, best.gain};
}

namespace detail {

/// Theta(i,j) += a with W and loss maintained; periodic full refactorization.
inline void apply_pair(PrecisionState& st, const Matrix& sigma, int i, int j, double a,
                       const GreedyConfig& cfg) {
  if (a == 0.0) return;
  st.loss += pair_loss_delta(st.w, sigma(i, j), i, j, a);
  st.w = pair_update_inverse(st.w, i, j, a);
  st.theta(i, j) += a;
  st.theta(j, i) = st.theta(i, j);
  if (++st.updates_since_refactor >= cfg.refactor_period) {
    st.w = invert_pd(st.theta);
    st.loss = gaussian_loss(st.theta, sigma);
    st.updates_since_refactor = 0;
  }
}

/// Theta(i,i) += b via one Sherman-Morrison correction.
inline void apply_diag(PrecisionState& st, const Matrix& sigma, int i, double b,
                       const GreedyConfig& cfg) {
  if (b == 0.0) return;
  const double denom = 1.0 + b * st.w(i, i);
  if (std::abs(denom) < 1e-12) throw SingularUpdate();
  st.loss += b * sigma(i, i) - std::log(denom);
  Vector wc = st.w.col(i);
  st.w.noalias() -= (b / denom) * (wc * wc.transpose());
  st.theta(i, i) += b;
  if (++st.updates_since_refactor >= cfg.refactor_period) {
    st.w = invert_pd(st.theta);
    st.loss = gaussian_loss(st.theta, sigma);
    st.updates_since_refactor = 0;
  }
}

}  // namespace detail

inline PrecisionState initial_state(const Matrix& sigma) {
  const int p = static_cast<int>(sigma.rows());
  PrecisionState st;
  st.theta = Matrix::Identity(p, p);
  st.w = Matrix::Identity(p, p);
  st.support.p = p;
  st.loss = gaussian_loss(st.theta, sigma);
  return st;
}

/// Cyclic exact coordinate descent over all diagonals and the pairs in S.
/// Diagonal steps use the closed form b* = 1/sigma_ii - 1/W_ii; pair steps
/// reuse single_pair_min. Stops when a full cycle improves < refit_tol.
inline PrecisionState refit_support(const Matrix& sigma, const EdgeSet& s,
                                    const GreedyConfig& cfg, PrecisionState warm) {
  const int p = static_cast<int>(sigma.rows());
  warm.support = s;
  std::vector<Edge> pairs(s.pairs.begin(), s.pairs.end());
  for (int cycle = 0; cycle < cfg.max_refit_cycles; ++cycle) {
    const double loss_before = warm.loss;
    for (int i = 0; i < p; ++i) {
      const double b = 1.0 / sigma(i, i) - 1.0 / warm.w(i, i);
      detail::apply_diag(warm, sigma, i, b, cfg);
    }
    for (const auto& [i, j] : pairs) {
      const PairStep ps = single_pair_min(warm.w, sigma, i, j);
      detail::apply_pair(warm, sigma, i, j, ps.alpha, cfg);
    }
    if (loss_before - warm.loss < cfg.refit_tol) return warm;
  }
  throw NonConvergence("refit_support: cycle cap reached");
}

struct BackwardChoice {
  int i = 0, j = 0;
  double loss_increase = 0.0;
};

/// Supported pair whose zeroing (no refit) increases the loss least.
inline BackwardChoice backward_scan(const PrecisionState& state, const Matrix& sigma) {
  if (state.support.pairs.empty()) throw EmptySupport();
  bool have = false;
  BackwardChoice best;
  for (const auto& [i, j] : state.support.pairs) {
    const double a = -state.theta(i, j);
    const double incr = std::max(0.0, pair_loss_delta(state.w, sigma(i, j), i, j, a));
    if (!have || incr < best.loss_increase) {
      have = true;
      best = {i, j, incr};
    }
  }
  return best;
}

/// Forward-backward greedy fit. Forward stops when the best gain drops to
/// <= eps_stop; after each accepted addition and refit, backward removals
/// run while the cheapest zeroing costs <= nu times the matching forward
/// gain (stack discipline over forward_gains).
inline PrecisionState fit_global_greedy(const Matrix& sigma, const GreedyConfig& cfg) {
  cfg.validate();
  PrecisionState st = initial_state(sigma);
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    ForwardChoice fwd;
    try {
      fwd = forward_scan(st, sigma, cfg);
    } catch (const NoCandidates&) {
      return st;
    }
    if (fwd.gain <= cfg.eps_stop) return st;

    st.support.insert(fwd.i, fwd.j);
    detail::apply_pair(st, sigma, fwd.i, fwd.j, fwd.alpha, cfg);
    st.forward_gains.push_back(fwd.gain);
    {
      const EdgeSet sup = st.support;
      st = refit_support(sigma, sup, cfg, std::move(st));
    }

    while (!st.support.pairs.empty() && !st.forward_gains.empty()) {
      const BackwardChoice bwd = backward_scan(st, sigma);
      if (bwd.loss_increase > cfg.nu * st.forward_gains.back()) break;
      detail::apply_pair(st, sigma, bwd.i, bwd.j, -st.theta(bwd.i, bwd.j), cfg);
      st.theta(bwd.i, bwd.j) = 0.0;  // exact zero off support
      st.theta(bwd.j, bwd.i) = 0.0;
      st.support.erase(bwd.i, bwd.j);
      st.forward_gains.pop_back();
      {
        const EdgeSet sup = st.support;
        st = refit_support(sigma, sup, cfg, std::move(st));
      }
    }
  }
  throw NonConvergence("fit_global_greedy: iteration cap reached");
}

}  // namespace gmrf
