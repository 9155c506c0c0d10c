#pragma once

// Dense symmetric linear algebra: Cholesky, log-determinant, PD inversion,
// and Sherman-Morrison maintenance of an inverse under symmetric pair updates.

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "gmrf/errors.hpp"

namespace gmrf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {
// Scale-relative pivot guard for the Cholesky factorization.
constexpr double kCholeskyPivotRel = 1e-12;
constexpr double kUpdateDenomAbs = 1e-12;
}  // namespace detail

/// Lower-triangular L with L L^T = M. Throws NotPositiveDefinite when a
/// pivot falls below 1e-12 times the largest diagonal entry.
inline Matrix cholesky(const Matrix& m) {
  const Eigen::Index p = m.rows();
  if (p != m.cols() || p < 1) throw DimensionMismatch("cholesky: matrix must be square");
  const double scale = m.diagonal().maxCoeff();
  const double pivot_floor = detail::kCholeskyPivotRel * (scale > 0 ? scale : 1.0);
  Matrix l = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = m(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= pivot_floor) throw NotPositiveDefinite();
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double s = m(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline bool is_positive_definite(const Matrix& m) {
  try {
    cholesky(m);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

/// log det(M) for PD M, as twice the log-sum of Cholesky pivots.
inline double log_det_pd(const Matrix& m) {
  return 2.0 * cholesky(m).diagonal().array().log().sum();
}

/// Inverse of a PD matrix via triangular solves on the Cholesky factor.
inline Matrix invert_pd(const Matrix& m) {
  const Matrix l = cholesky(m);
  const Eigen::Index p = m.rows();
  Matrix linv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(p, p));
  Matrix w = linv.transpose() * linv;
  // exact symmetry by construction can still drift in the last bit
  w = ((w + w.transpose()) * 0.5).eval();
  return w;
}

/// Open interval of step sizes alpha around 0 for which
/// Theta + alpha (e_ij + e_ji) stays PD, given W = Theta^{-1}.
inline std::pair<double, double> pd_interval_for_pair(const Matrix& w, int i, int j) {
  const double wij = w(i, j);
  const double s = std::sqrt(w(i, i) * w(j, j));
  return {-1.0 / (s + wij), 1.0 / (s - wij)};
}

/// (Theta + alpha (e_ij + e_ji))^{-1} from W = Theta^{-1}, via two
/// sequential rank-1 corrections with u = e_i + e_j, v = e_i - e_j.
inline Matrix pair_update_inverse(const Matrix& w, int i, int j, double alpha) {
  Matrix out = w;
  if (alpha == 0.0) return out;
  const double c = alpha / 2.0;
  // +c u u^T
  {
    Vector wu = out.col(i) + out.col(j);
    const double denom = 1.0 + c * (wu(i) + wu(j));
    if (std::abs(denom) < detail::kUpdateDenomAbs) throw SingularUpdate();
    out.noalias() -= (c / denom) * (wu * wu.transpose());
  }
  // -c v v^T
  {
    Vector wv = out.col(i) - out.col(j);
    const double denom = 1.0 - c * (wv(i) - wv(j));
    if (std::abs(denom) < detail::kUpdateDenomAbs) throw SingularUpdate();
    out.noalias() += (c / denom) * (wv * wv.transpose());
  }
  out = ((out + out.transpose()) * 0.5).eval();
  return out;
}

/// Entrywise max |A_ij - B_ij|.
inline double sup_norm_deviation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("sup_norm_deviation: unequal dimensions");
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace gmrf
