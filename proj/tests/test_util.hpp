#pragma once

#include <gmrf/linalg.hpp>
#include <gmrf/rng.hpp>

namespace testutil {

using gmrf::Matrix;
using gmrf::Vector;

/// Random well-conditioned PD matrix: A A^T / p + diag jitter.
inline Matrix random_pd(int p, gmrf::SplitMix64& rng, double jitter = 0.5) {
  Matrix a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.next_normal();
  Matrix m = (a * a.transpose()) / p;
  m.diagonal().array() += jitter;
  return ((m + m.transpose()) * 0.5).eval();
}

/// Golden-section minimization of a unimodal scalar function on (lo, hi).
template <typename F>
double golden_section_min(F f, double lo, double hi, double tol = 1e-12, int max_iter = 300) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace testutil
