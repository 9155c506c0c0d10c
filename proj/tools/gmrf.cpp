// Command-line front end: model generation, the greedy and l1 fitters,
// condition calculators, and the phase-transition sweep harness.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <gmrf/baselines.hpp>
#include <gmrf/conditions.hpp>
#include <gmrf/greedy_global.hpp>
#include <gmrf/greedy_nbd.hpp>
#include <gmrf/harness.hpp>
#include <gmrf/io.hpp>
#include <gmrf/models.hpp>

using json = nlohmann::json;
using namespace gmrf;

namespace {

json edges_to_json(const EdgeSet& e) {
  json arr = json::array();
  for (const auto& [i, j] : e.pairs) arr.push_back({i, j});
  return arr;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw IOFailure("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

struct ModelFlags {
  std::string family = "chain";
  int p = 10;
  double tau = 0.5;
  double omega = 0.2;
  int hubs = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "chain|star|grid|diamond")->capture_default_str();
    cmd->add_option("--p", p, "dimension (perfect square for grid; 4 for diamond)")
        ->capture_default_str();
    cmd->add_option("--tau", tau, "correlation parameter")->capture_default_str();
    cmd->add_option("--omega", omega, "grid edge weight")->capture_default_str();
    cmd->add_option("--hubs", hubs, "star hub count (multi-hub variant when > 1)")
        ->capture_default_str();
  }

  ModelSpec spec() const {
    ModelSpec m;
    m.family = family_from_name(family);
    m.p = p;
    m.tau = tau;
    m.omega = omega;
    m.hubs = hubs;
    return m;
  }
};

/// Resolve (Sigma_hat, n) from --sigma or --data.
std::pair<Matrix, int> load_input(const std::string& sigma_path, const std::string& data_path,
                                  int n_flag) {
  if (!sigma_path.empty()) return {load_matrix_csv(sigma_path), n_flag};
  if (data_path.empty()) throw InvalidParameter("need --sigma or --data");
  const SampleSet xs = load_data_csv(data_path);
  return {sample_covariance(xs), xs.n()};
}

double resolve_eps(double eps, double c, int d, int p, int n) {
  if (eps > 0) return eps;
  if (c <= 0 || n <= 0 || d <= 0)
    throw InvalidParameter("need --eps, or --c with --d and sample count");
  return c * d * std::log(double(p)) / n;
}

int cmd_generate(const ModelFlags& mf, int n, std::uint64_t seed, const std::string& out,
                 const std::string& sigma_out) {
  const ModelSpec spec = mf.spec();
  const Matrix sigma = spec.covariance();
  if (!sigma_out.empty()) save_matrix_csv(sigma, sigma_out);
  if (!out.empty()) save_data_csv(sample_gaussian(sigma, n, seed), out);
  return 0;
}

json neighborhoods_json(const GraphEstimate& g) {
  json nb = json::array();
  for (const auto& v : g.neighborhoods) nb.push_back(v);
  json j;
  j["neighborhoods"] = nb;
  j["edges_and"] = edges_to_json(g.edges_and);
  j["edges_or"] = edges_to_json(g.edges_or);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Gaussian MRF structure learning via forward-backward greedy methods"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a synthetic model and samples");
  ModelFlags gen_mf;
  gen_mf.attach(gen);
  int gen_n = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_sigma_out;
  gen->add_option("--n", gen_n, "sample count")->capture_default_str();
  gen->add_option("--seed", gen_seed, "rng seed")->capture_default_str();
  gen->add_option("--out", gen_out, "samples CSV path");
  gen->add_option("--sigma-out", gen_sigma_out, "covariance CSV path");

  // fit-global
  auto* fg = app.add_subcommand("fit-global", "global greedy fit of the precision matrix");
  std::string fg_sigma, fg_data, fg_out;
  double fg_eps = 0, fg_c = 0, fg_nu = 0.5;
  int fg_d = 0, fg_n = 0, fg_max_active = 1 << 20, fg_threads = 1;
  fg->add_option("--sigma", fg_sigma, "covariance CSV");
  fg->add_option("--data", fg_data, "samples CSV");
  fg->add_option("--eps", fg_eps, "explicit stopping threshold");
  fg->add_option("--c", fg_c, "stopping constant: eps = c d log(p)/n");
  fg->add_option("--d", fg_d, "max degree for --c");
  fg->add_option("--n", fg_n, "sample count (with --sigma and --c)");
  fg->add_option("--nu", fg_nu, "backward factor")->capture_default_str();
  fg->add_option("--max-active", fg_max_active, "active-set cap");
  fg->add_option("--threads", fg_threads, "scan threads")->capture_default_str();
  fg->add_option("--out-json", fg_out, "output JSON path ('-' = stdout)");

  // fit-nbd
  auto* fn = app.add_subcommand("fit-nbd", "neighborhood greedy fit");
  std::string fn_data, fn_out, fn_rule = "both";
  double fn_eps = 0, fn_c = 0, fn_nu = 0.5;
  fn->add_option("--data", fn_data, "samples CSV")->required();
  fn->add_option("--eps", fn_eps, "explicit stopping threshold");
  fn->add_option("--c", fn_c, "stopping constant: eps = c log(p)/n");
  fn->add_option("--nu", fn_nu, "backward factor")->capture_default_str();
  fn->add_option("--rule", fn_rule, "and|or|both")->capture_default_str();
  fn->add_option("--out-json", fn_out, "output JSON path");

  // fit-glasso
  auto* gl = app.add_subcommand("fit-glasso", "l1-regularized Gaussian MLE baseline");
  std::string gl_sigma, gl_data, gl_out;
  double gl_lambda = -1, gl_c = -1;
  int gl_cv = 0, gl_n = 0;
  std::vector<double> gl_grid;
  gl->add_option("--sigma", gl_sigma, "covariance CSV");
  gl->add_option("--data", gl_data, "samples CSV");
  gl->add_option("--lambda", gl_lambda, "explicit regularization weight");
  gl->add_option("--c", gl_c, "lambda = c sqrt(log p / n)");
  gl->add_option("--n", gl_n, "sample count (with --sigma and --c)");
  gl->add_option("--cv-folds", gl_cv, "enable k-fold CV over --c-grid");
  gl->add_option("--c-grid", gl_grid, "CV grid of c values");
  gl->add_option("--out-json", gl_out, "output JSON path");

  // fit-nbd-lasso
  auto* nl = app.add_subcommand("fit-nbd-lasso", "nodewise lasso baseline");
  std::string nl_data, nl_out, nl_rule = "both";
  double nl_lambda = -1, nl_c = -1;
  int nl_cv = 0;
  std::vector<double> nl_grid;
  nl->add_option("--data", nl_data, "samples CSV")->required();
  nl->add_option("--lambda", nl_lambda, "explicit regularization weight");
  nl->add_option("--c", nl_c, "lambda = c sqrt(log p / n)");
  nl->add_option("--cv-folds", nl_cv, "enable k-fold CV over --c-grid");
  nl->add_option("--c-grid", nl_grid, "CV grid of c values");
  nl->add_option("--rule", nl_rule, "and|or|both")->capture_default_str();
  nl->add_option("--out-json", nl_out, "output JSON path");

  // conditions
  auto* cond = app.add_subcommand("conditions", "sparsistency-condition calculators");
  ModelFlags cond_mf;
  cond_mf.attach(cond);
  std::string cond_metric = "both", cond_out;
  bool cond_bisect = false;
  int cond_k = 2;
  cond->add_option("--metric", cond_metric, "glasso|nbd|both")->capture_default_str();
  cond->add_flag("--bisect", cond_bisect, "bisect the admissible-tau threshold");
  cond->add_option("--k", cond_k, "support size for restricted eigenvalues")
      ->capture_default_str();
  cond->add_option("--out-json", cond_out, "output JSON path");

  // sweep
  auto* sw = app.add_subcommand("sweep", "phase-transition success-probability sweep");
  ModelFlags sw_mf;
  sw_mf.attach(sw);
  std::string sw_spec_path, sw_out, sw_format = "csv";
  std::vector<std::string> sw_methods{"global-greedy"};
  std::vector<double> sw_betas;
  std::vector<int> sw_ns;
  int sw_trials = 50, sw_threads = 1, sw_cv = 0;
  std::uint64_t sw_seed = 0;
  double sw_c_eps = 6.0, sw_nu = 0.5, sw_c_lambda = 0.5;
  std::vector<double> sw_grid;
  sw->add_option("--spec", sw_spec_path, "JSON spec file (overrides inline flags)");
  sw->add_option("--methods", sw_methods, "methods to run")->capture_default_str();
  sw->add_option("--beta-grid", sw_betas, "control-parameter grid");
  sw->add_option("--n-grid", sw_ns, "explicit sample-size grid");
  sw->add_option("--trials", sw_trials, "trials per cell")->capture_default_str();
  sw->add_option("--seed", sw_seed, "base seed")->capture_default_str();
  sw->add_option("--c-eps", sw_c_eps, "greedy stopping constant")->capture_default_str();
  sw->add_option("--nu", sw_nu, "backward factor")->capture_default_str();
  sw->add_option("--c-lambda", sw_c_lambda, "lasso lambda constant")->capture_default_str();
  sw->add_option("--cv-folds", sw_cv, "CV folds for the lasso baselines (0 = fixed c)");
  sw->add_option("--c-grid", sw_grid, "CV grid of c values");
  sw->add_option("--threads", sw_threads, "worker threads")->capture_default_str();
  sw->add_option("--out", sw_out, "output path ('' = stdout)");
  sw->add_option("--format", sw_format, "csv|jsonl")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_mf, gen_n, gen_seed, gen_out, gen_sigma_out);

    if (fg->parsed()) {
      auto [sigma, n] = load_input(fg_sigma, fg_data, fg_n);
      const int p = static_cast<int>(sigma.rows());
      GreedyConfig cfg;
      cfg.eps_stop = resolve_eps(fg_eps, fg_c, fg_d, p, n);
      cfg.nu = fg_nu;
      cfg.max_active = fg_max_active;
      cfg.threads = fg_threads;
      const PrecisionState st = fit_global_greedy(sigma, cfg);
      json j;
      j["support"] = edges_to_json(st.support);
      j["theta"] = matrix_to_json(st.theta);
      j["loss"] = st.loss;
      j["forward_gains"] = st.forward_gains;
      write_json(j, fg_out);
      return 0;
    }

    if (fn->parsed()) {
      const SampleSet xs = load_data_csv(fn_data);
      GreedyConfig cfg;
      cfg.eps_stop = resolve_eps(fn_eps, fn_c, 1, xs.p(), xs.n());
      cfg.nu = fn_nu;
      const GraphEstimate g = fit_nbd_greedy(xs, cfg);
      json j = neighborhoods_json(g);
      if (fn_rule == "and") j.erase("edges_or");
      if (fn_rule == "or") j.erase("edges_and");
      write_json(j, fn_out);
      return 0;
    }

    if (gl->parsed()) {
      auto [sigma, n] = load_input(gl_sigma, gl_data, gl_n);
      const int p = static_cast<int>(sigma.rows());
      LassoConfig cfg;
      if (gl_cv > 0) {
        if (gl_data.empty()) throw InvalidParameter("CV requires --data");
        const SampleSet xs = load_data_csv(gl_data);
        if (gl_grid.empty())
          for (int i = 1; i <= 30; ++i) gl_grid.push_back(i / 10.0);
        const double c = select_lambda_cv(xs, gl_cv, gl_grid, CvMethod::Glasso);
        cfg.lambda = scaled_lambda(c, p, n);
      } else if (gl_lambda >= 0) {
        cfg.lambda = gl_lambda;
      } else if (gl_c >= 0 && n > 0) {
        cfg.lambda = scaled_lambda(gl_c, p, n);
      } else {
        throw InvalidParameter("need --lambda, or --c with a sample count");
      }
      const Matrix theta = fit_glasso(sigma, cfg);
      json j;
      j["lambda"] = cfg.lambda;
      j["theta"] = matrix_to_json(theta);
      j["support"] = edges_to_json(edge_set_of_precision(theta, 1e-8));
      write_json(j, gl_out);
      return 0;
    }

    if (nl->parsed()) {
      const SampleSet xs = load_data_csv(nl_data);
      LassoConfig cfg;
      if (nl_cv > 0) {
        if (nl_grid.empty())
          for (int i = 1; i <= 30; ++i) nl_grid.push_back(i / 10.0);
        const double c = select_lambda_cv(xs, nl_cv, nl_grid, CvMethod::Nbd);
        cfg.lambda = scaled_lambda(c, xs.p(), xs.n());
      } else if (nl_lambda >= 0) {
        cfg.lambda = nl_lambda;
      } else if (nl_c >= 0) {
        cfg.lambda = scaled_lambda(nl_c, xs.p(), xs.n());
      } else {
        throw InvalidParameter("need --lambda or --c");
      }
      const GraphEstimate g = fit_nbd_lasso(xs, cfg);
      json j = neighborhoods_json(g);
      j["lambda"] = cfg.lambda;
      if (nl_rule == "and") j.erase("edges_or");
      if (nl_rule == "or") j.erase("edges_and");
      write_json(j, nl_out);
      return 0;
    }

    if (cond->parsed()) {
      const ModelSpec spec = cond_mf.spec();
      json j;
      j["family"] = cond_mf.family;
      j["tau"] = cond_mf.tau;
      if (cond_bisect) {
        const Family fam = family_from_name(cond_mf.family);
        if (cond_metric == "glasso" || cond_metric == "both") {
          const auto r = threshold_bisect(fam, spec.dim(), IrrepMetric::Glasso);
          j["glasso_tau_star"] = r.tau_star;
          j["glasso_crossed"] = r.crossed;
          j["glasso_monotone"] = r.monotone;
        }
        if (cond_metric == "nbd" || cond_metric == "both") {
          const auto r = threshold_bisect(fam, spec.dim(), IrrepMetric::Nbd);
          j["nbd_tau_star"] = r.tau_star;
          j["nbd_crossed"] = r.crossed;
          j["nbd_monotone"] = r.monotone;
        }
      } else {
        const Matrix sigma = spec.covariance();
        const EdgeSet edges = spec.edges();
        const ConditionReport rep = condition_report(sigma, edges, cond_k);
        j["glasso_irrep"] = rep.glasso_irrep;
        j["nbd_irrep"] = rep.nbd_irrep;
        j["cmin_hat"] = rep.cmin_hat;
        j["rho_hat"] = rep.rho_hat;
        j["glasso_admissible"] = rep.glasso_admissible;
        j["nbd_admissible"] = rep.nbd_admissible;
        j["k"] = cond_k;
      }
      write_json(j, cond_out);
      return 0;
    }

    if (sw->parsed()) {
      ExperimentSpec spec;
      if (!sw_spec_path.empty()) {
        std::ifstream in(sw_spec_path);
        if (!in) throw IOFailure("cannot open " + sw_spec_path);
        json j = json::parse(in);
        ModelFlags mf;
        mf.family = j.value("family", "chain");
        mf.p = j.value("p", 10);
        mf.tau = j.value("tau", 0.5);
        mf.omega = j.value("omega", 0.2);
        mf.hubs = j.value("hubs", 1);
        spec.model = mf.spec();
        for (const auto& m : j.value("methods", std::vector<std::string>{"global-greedy"}))
          spec.methods.push_back(method_from_name(m));
        if (!spec.methods.empty() && j.contains("methods")) spec.methods.erase(spec.methods.begin());
        spec.beta_list = j.value("beta_list", std::vector<double>{});
        spec.n_list = j.value("n_list", std::vector<int>{});
        spec.trials = j.value("trials", 50);
        spec.base_seed = j.value("base_seed", std::uint64_t{0});
        spec.population = j.value("population", false);
        spec.c_eps = j.value("c_eps", 6.0);
        spec.nu = j.value("nu", 0.5);
        spec.c_lambda = j.value("c_lambda", 0.5);
        spec.use_cv = j.value("use_cv", false);
        spec.cv_folds = j.value("cv_folds", 5);
        spec.c_grid = j.value("c_grid", std::vector<double>{});
        spec.threads = j.value("threads", sw_threads);
      } else {
        spec.model = sw_mf.spec();
        spec.methods.clear();
        for (const auto& m : sw_methods) spec.methods.push_back(method_from_name(m));
        spec.beta_list = sw_betas;
        spec.n_list = sw_ns;
        spec.trials = sw_trials;
        spec.base_seed = sw_seed;
        spec.c_eps = sw_c_eps;
        spec.nu = sw_nu;
        spec.c_lambda = sw_c_lambda;
        spec.use_cv = sw_cv > 0;
        spec.cv_folds = sw_cv > 0 ? sw_cv : 5;
        spec.c_grid = sw_grid;
        spec.threads = sw_threads;
      }
      const SweepResult res = run_sweep(spec);
      std::ostringstream buf;
      if (sw_format == "jsonl")
        emit_jsonl(res, buf);
      else
        emit_csv(res, buf);
      if (sw_out.empty()) {
        std::cout << buf.str();
      } else {
        std::ofstream out(sw_out);
        if (!out) throw IOFailure("cannot open " + sw_out);
        out << buf.str();
      }
      return 0;
    }
  } catch (const InvalidParameter& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const IOFailure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
