#pragma once

// Synthetic covariance/precision families (chain, star, grid, diamond),
// ground-truth edge sets, and seeded Gaussian sampling.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "gmrf/edge_set.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/linalg.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

enum class Family { Chain, Star, Grid, Diamond, Custom };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::Chain: return "chain";
    case Family::Star: return "star";
    case Family::Grid: return "grid";
    case Family::Diamond: return "diamond";
    case Family::Custom: return "custom";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  if (s == "chain") return Family::Chain;
  if (s == "star") return Family::Star;
  if (s == "grid") return Family::Grid;
  if (s == "diamond") return Family::Diamond;
  if (s == "custom") return Family::Custom;
  throw InvalidParameter("unknown family: " + s);
}

/// Sigma_ij = tau^|i-j|; inverse is tridiagonal (path graph).
inline Matrix make_chain_cov(int p, double tau) {
  if (p < 2) throw InvalidParameter("chain: p must be >= 2");
  if (std::abs(tau) >= 1.0) throw InvalidParameter("chain: |tau| must be < 1");
  Matrix s(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = std::pow(tau, std::abs(i - j));
  return s;
}

/// Hub at node 0: Sigma_ii = 1, Sigma_0j = tau, Sigma_jk = tau^2 for leaves.
inline Matrix make_star_cov(int p, double tau) {
  if (p < 3) throw InvalidParameter("star: p must be >= 3");
  if (std::abs(tau) >= 1.0) throw InvalidParameter("star: |tau| must be < 1");
  Matrix s = Matrix::Constant(p, p, tau * tau);
  s.row(0).setConstant(tau);
  s.col(0).setConstant(tau);
  s.diagonal().setOnes();
  return s;
}

/// Multi-hub star variant: hubs 0..h-1, leaves assigned round-robin, blocks
/// independent. Each block is a standard star. Plumbing for degree-limited
/// star experiments; not a construction given by the source families.
inline Matrix make_multihub_star_cov(int p, int hubs, double tau) {
  if (hubs < 1 || hubs > p / 2) throw InvalidParameter("star: hubs must be in [1, p/2]");
  if (hubs == 1) return make_star_cov(p, tau);
  if (std::abs(tau) >= 1.0) throw InvalidParameter("star: |tau| must be < 1");
  Matrix s = Matrix::Identity(p, p);
  for (int l = hubs; l < p; ++l) {
    const int h = (l - hubs) % hubs;
    s(h, l) = s(l, h) = tau;
    for (int m = hubs; m < l; ++m) {
      if ((m - hubs) % hubs == h) s(m, l) = s(l, m) = tau * tau;
    }
  }
  return s;
}

/// 4-node diamond: Sigma_ij = tau except Sigma_{12} = 0 and
/// Sigma_{03} = 2 tau^2 (0-based). The inverse is zero exactly at (0,3),
/// so the induced graph is K4 minus that edge. PD iff |tau| < 1/sqrt(2).
inline Matrix make_diamond_cov(double tau) {
  if (std::abs(tau) >= 1.0 / std::sqrt(2.0))
    throw InvalidParameter("diamond: |tau| must be < 1/sqrt(2)");
  Matrix s = Matrix::Constant(4, 4, tau);
  s.diagonal().setOnes();
  s(1, 2) = s(2, 1) = 0.0;
  s(0, 3) = s(3, 0) = 2.0 * tau * tau;
  return s;
}

/// Precision matrix of a side x side 4-nearest-neighbor lattice:
/// unit diagonal, omega on lattice edges. Diagonally dominant for |omega| < 1/4.
inline Matrix make_grid_precision(int side, double omega) {
  if (side < 2) throw InvalidParameter("grid: side must be >= 2");
  if (std::abs(omega) >= 0.25) throw InvalidParameter("grid: |omega| must be < 0.25");
  const int p = side * side;
  Matrix theta = Matrix::Identity(p, p);
  auto id = [side](int r, int c) { return r * side + c; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      if (c + 1 < side) theta(id(r, c), id(r, c + 1)) = theta(id(r, c + 1), id(r, c)) = omega;
      if (r + 1 < side) theta(id(r, c), id(r + 1, c)) = theta(id(r + 1, c), id(r, c)) = omega;
    }
  }
  return theta;
}

inline EdgeSet edge_set_of_precision(const Matrix& theta, double tol) {
  if (tol < 0) throw InvalidParameter("edge_set_of_precision: tol must be >= 0");
  EdgeSet e;
  e.p = static_cast<int>(theta.rows());
  for (int i = 0; i < e.p; ++i)
    for (int j = i + 1; j < e.p; ++j)
      if (std::abs(theta(i, j)) > tol) e.insert(i, j);
  return e;
}

inline EdgeSet chain_edges(int p) {
  EdgeSet e;
  e.p = p;
  for (int i = 0; i + 1 < p; ++i) e.insert(i, i + 1);
  return e;
}

inline EdgeSet star_edges(int p, int hubs = 1) {
  EdgeSet e;
  e.p = p;
  if (hubs <= 1) {
    for (int j = 1; j < p; ++j) e.insert(0, j);
  } else {
    for (int l = hubs; l < p; ++l) e.insert((l - hubs) % hubs, l);
  }
  return e;
}

inline EdgeSet grid_edges(int side) {
  return edge_set_of_precision(make_grid_precision(side, 0.1), 1e-8);
}

/// Conditional-independence graph of make_diamond_cov: every pair except
/// (0,3). The marginally uncorrelated pair (1,2) is still an edge; the
/// inverse carries 2tau^2/(1-2tau^2) there.
inline EdgeSet diamond_edges() {
  EdgeSet e;
  e.p = 4;
  e.insert(0, 1);
  e.insert(0, 2);
  e.insert(1, 2);
  e.insert(1, 3);
  e.insert(2, 3);
  return e;
}

struct SampleSet {
  Matrix x;  // n rows, p columns
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
};

/// iid rows x = L z with L = cholesky(Sigma) and z standard normal from
/// the splitmix64-bm generator; same seed gives bit-identical output.
inline SampleSet sample_gaussian(const Matrix& sigma, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("sample_gaussian: n must be >= 1");
  const Matrix l = cholesky(sigma);
  const int p = static_cast<int>(sigma.rows());
  SampleSet out;
  out.seed = seed;
  out.x.resize(n, p);
  SplitMix64 rng(seed);
  Vector z(p);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) z(i) = rng.next_normal();
    out.x.row(k) = (l * z).transpose();
  }
  return out;
}

/// (1/n) sum_k x^(k) x^(k)T -- no mean subtraction, the model is zero-mean.
inline Matrix sample_covariance(const SampleSet& xs) {
  const double n = static_cast<double>(xs.n());
  Matrix s = (xs.x.transpose() * xs.x) / n;
  return ((s + s.transpose()) * 0.5).eval();
}

/// Model family + parameters; resolves to (Sigma*, E*, d).
struct ModelSpec {
  Family family = Family::Chain;
  int p = 0;
  double tau = 0.0;    // chain/star/diamond
  double omega = 0.2;  // grid
  int hubs = 1;        // star variant
  std::optional<Matrix> custom_sigma;

  Matrix covariance() const {
    switch (family) {
      case Family::Chain: return make_chain_cov(p, tau);
      case Family::Star: return make_multihub_star_cov(p, hubs, tau);
      case Family::Diamond:
        if (p != 0 && p != 4) throw InvalidParameter("diamond requires p = 4");
        return make_diamond_cov(tau);
      case Family::Grid: {
        const int side = static_cast<int>(std::lround(std::sqrt(double(p))));
        if (side * side != p) throw InvalidParameter("grid requires p a perfect square");
        return invert_pd(make_grid_precision(side, omega));
      }
      case Family::Custom:
        if (!custom_sigma) throw InvalidParameter("custom family requires a matrix");
        cholesky(*custom_sigma);  // PD check
        return *custom_sigma;
    }
    throw InvalidParameter("bad family");
  }

  EdgeSet edges() const {
    switch (family) {
      case Family::Chain: return chain_edges(p);
      case Family::Star: return star_edges(p, hubs);
      case Family::Diamond: return diamond_edges();
      case Family::Grid: {
        const int side = static_cast<int>(std::lround(std::sqrt(double(p))));
        return grid_edges(side);
      }
      case Family::Custom:
        return edge_set_of_precision(invert_pd(*custom_sigma), 1e-8);
    }
    throw InvalidParameter("bad family");
  }

  int dim() const { return family == Family::Diamond ? 4 : p; }
};

}  // namespace gmrf
