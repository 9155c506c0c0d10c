#pragma once

// Experiment orchestration: seeded trials, success-probability aggregation
// over beta (rescaled sample size) grids, and CSV/JSONL emission. Trials
// parallelize over a worker pool; per-trial RNG streams make the output
// independent of scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "gmrf/baselines.hpp"
#include "gmrf/conditions.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/greedy_global.hpp"
#include "gmrf/greedy_nbd.hpp"
#include "gmrf/models.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

enum class Method { GlobalGreedy, NbdGreedy, Glasso, NbdLasso };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::GlobalGreedy: return "global-greedy";
    case Method::NbdGreedy: return "nbd-greedy";
    case Method::Glasso: return "glasso";
    case Method::NbdLasso: return "nbd-lasso";
  }
  return "?";
}

inline Method method_from_name(const std::string& s) {
  if (s == "global-greedy") return Method::GlobalGreedy;
  if (s == "nbd-greedy") return Method::NbdGreedy;
  if (s == "glasso") return Method::Glasso;
  if (s == "nbd-lasso") return Method::NbdLasso;
  throw InvalidParameter("unknown method: " + s);
}

/// Sample size from the control parameter: n = beta * 70 d log(p) for
/// chain/grid/diamond, n = beta * 200 log(d p) for star; clamped at n = 2.
inline int beta_to_n(Family family, int p, int d, double beta) {
  if (beta <= 0) throw InvalidParameter("beta must be > 0");
  double n = family == Family::Star ? beta * 200.0 * std::log(double(d) * p)
                                    : beta * 70.0 * d * std::log(double(p));
  return std::max(2, static_cast<int>(std::lround(n)));
}

inline double n_to_beta(Family family, int p, int d, int n) {
  return family == Family::Star ? n / (200.0 * std::log(double(d) * p))
                                : n / (70.0 * d * std::log(double(p)));
}

struct ExperimentSpec {
  ModelSpec model;
  std::vector<Method> methods{Method::GlobalGreedy};
  std::vector<double> beta_list;  // either this or n_list
  std::vector<int> n_list;
  int trials = 50;
  std::uint64_t base_seed = 0;
  bool population = false;  // n = infinity switch: fit on exact moments
  double c_eps = 6.0;       // eps_stop = c_eps * d * log(p) / n; tuned on chain p=36
  double nu = 0.5;
  double c_lambda = 0.5;  // lambda = c_lambda * sqrt(log p / n)
  bool use_cv = false;
  int cv_folds = 5;
  std::vector<double> c_grid;  // CV grid over c; default 0.1..3.0 step 0.1
  int threads = 1;

  std::vector<double> effective_c_grid() const {
    if (!c_grid.empty()) return c_grid;
    std::vector<double> g;
    for (int i = 1; i <= 30; ++i) g.push_back(i / 10.0);
    return g;
  }

  void validate() const {
    if (trials < 1) throw InvalidParameter("trials must be >= 1");
    if (!population && beta_list.empty() && n_list.empty())
      throw InvalidParameter("need beta_list or n_list");
    if (methods.empty()) throw InvalidParameter("need at least one method");
  }
};

namespace detail {

inline bool neighborhoods_match(const GraphEstimate& est, const EdgeSet& truth) {
  for (int r = 0; r < est.p; ++r)
    if (est.neighborhoods[r] != truth.neighbors(r)) return false;
  return true;
}

}  // namespace detail

/// One seeded trial: sample, fit, exact-recovery check. Edge-set equality
/// for global methods, per-node neighborhood equality for nbd methods.
/// Fit failures count as failures.
inline bool run_trial(const ExperimentSpec& spec, Method method, int n,
                      std::uint64_t trial_index) {
  const Matrix sigma_star = spec.model.covariance();
  const EdgeSet truth = spec.model.edges();
  const int p = static_cast<int>(sigma_star.rows());
  const int d = truth.max_degree();

  GreedyConfig gcfg;
  gcfg.nu = spec.nu;
  LassoConfig lcfg;

  try {
    if (spec.population) {
      gcfg.eps_stop = 1e-8;
      if (method == Method::GlobalGreedy) {
        const PrecisionState st = fit_global_greedy(sigma_star, gcfg);
        return st.support == truth;
      }
      if (method == Method::NbdGreedy) {
        const GraphEstimate est = fit_nbd_greedy_population(sigma_star, gcfg);
        return detail::neighborhoods_match(est, truth);
      }
      throw InvalidParameter("population mode supports only the greedy methods");
    }

    const SampleSet xs =
        sample_gaussian(sigma_star, n, trial_stream_seed(spec.base_seed, trial_index));
    gcfg.eps_stop = spec.c_eps * d * std::log(double(p)) / n;

    switch (method) {
      case Method::GlobalGreedy: {
        const PrecisionState st = fit_global_greedy(sample_covariance(xs), gcfg);
        return st.support == truth;
      }
      case Method::NbdGreedy: {
        const GraphEstimate est = fit_nbd_greedy(xs, gcfg);
        return detail::neighborhoods_match(est, truth);
      }
      case Method::Glasso: {
        const double c = spec.use_cv ? select_lambda_cv(xs, spec.cv_folds,
                                                        spec.effective_c_grid(), CvMethod::Glasso)
                                     : spec.c_lambda;
        lcfg.lambda = scaled_lambda(c, p, n);
        const Matrix theta = fit_glasso(sample_covariance(xs), lcfg);
        return edge_set_of_precision(theta, 1e-8) == truth;
      }
      case Method::NbdLasso: {
        const double c = spec.use_cv ? select_lambda_cv(xs, spec.cv_folds,
                                                        spec.effective_c_grid(), CvMethod::Nbd)
                                     : spec.c_lambda;
        lcfg.lambda = scaled_lambda(c, p, n);
        const GraphEstimate est = fit_nbd_lasso(xs, lcfg);
        return detail::neighborhoods_match(est, truth);
      }
    }
  } catch (const InvalidParameter&) {
    throw;
  } catch (const Error&) {
    return false;  // numerical failure of a fit counts as a failed trial
  }
  return false;
}

struct SweepRow {
  std::string family;
  int p = 0, d = 0, n = 0;
  double beta = 0.0;
  std::string method;
  int successes = 0;
  int trials = 0;
  double success_prob = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Runs every (method, grid point) cell for `trials` trials. Trials fan out
/// to `threads` workers; per-trial seeds make the result schedule-independent.
inline SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const EdgeSet truth = spec.model.edges();
  const int p = spec.model.dim();
  const int d = truth.max_degree();

  struct Cell {
    Method method;
    int n;
    double beta;
  };
  std::vector<Cell> cells;
  for (Method m : spec.methods) {
    if (!spec.beta_list.empty()) {
      for (double b : spec.beta_list)
        cells.push_back({m, beta_to_n(spec.model.family, p, d, b), b});
    } else {
      for (int n : spec.n_list)
        cells.push_back({m, n, n_to_beta(spec.model.family, p, d, n)});
    }
  }

  struct Task {
    std::size_t cell;
    std::uint64_t trial;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int t = 0; t < spec.trials; ++t) tasks.push_back({c, static_cast<std::uint64_t>(t)});

  std::vector<char> success(tasks.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Cell& cell = cells[tasks[k].cell];
      success[k] = run_trial(spec, cell.method, cell.n, tasks[k].trial) ? 1 : 0;
    }
  };
  const int nthreads = std::max(1, spec.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow row;
    row.family = family_name(spec.model.family);
    row.p = p;
    row.d = d;
    row.n = cells[c].n;
    row.beta = cells[c].beta;
    row.method = method_name(cells[c].method);
    row.trials = spec.trials;
    for (std::size_t k = 0; k < tasks.size(); ++k)
      if (tasks[k].cell == c && success[k]) ++row.successes;
    row.success_prob = double(row.successes) / row.trials;
    out.rows.push_back(std::move(row));
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.beta != b.beta) return a.beta < b.beta;
    return a.n < b.n;
  });
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void emit_csv(const SweepResult& res, std::ostream& out) {
  out << "family,p,d,n,beta,method,successes,trials,success_prob\n";
  for (const auto& r : res.rows) {
    out << r.family << ',' << r.p << ',' << r.d << ',' << r.n << ','
        << detail::format_double(r.beta) << ',' << r.method << ',' << r.successes << ','
        << r.trials << ',' << detail::format_double(r.success_prob) << '\n';
  }
  if (!out) throw IOFailure("emit_csv: write failed");
}

inline void emit_jsonl(const SweepResult& res, std::ostream& out) {
  for (const auto& r : res.rows) {
    out << "{\"family\":\"" << r.family << "\",\"p\":" << r.p << ",\"d\":" << r.d
        << ",\"n\":" << r.n << ",\"beta\":" << detail::format_double(r.beta)
        << ",\"method\":\"" << r.method << "\",\"successes\":" << r.successes
        << ",\"trials\":" << r.trials
        << ",\"success_prob\":" << detail::format_double(r.success_prob) << "}\n";
  }
  if (!out) throw IOFailure("emit_jsonl: write failed");
}

inline SweepResult parse_sweep_csv(std::istream& in) {
  SweepResult res;
  std::string line;
  if (!std::getline(in, line)) throw IOFailure("sweep csv: empty");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw IOFailure("sweep csv: bad row");
    SweepRow r;
    r.family = cells[0];
    r.p = std::stoi(cells[1]);
    r.d = std::stoi(cells[2]);
    r.n = std::stoi(cells[3]);
    r.beta = std::stod(cells[4]);
    r.method = cells[5];
    r.successes = std::stoi(cells[6]);
    r.trials = std::stoi(cells[7]);
    r.success_prob = double(r.successes) / r.trials;  // exact, counts are the contract
    res.rows.push_back(std::move(r));
  }
  return res;
}

}  // namespace gmrf
