#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "core.hpp"
#include "optimizer.hpp"
#include "problems.hpp"
#include "rng.hpp"

namespace adamhp::experiments {

struct ConfigsNotDistinct : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Beta2Rule { fixed, one_minus_inv_T };
enum class Metric { avg_grad_sq, min_grad_sq };

inline const char* name(Metric m) {
  return m == Metric::avg_grad_sq ? "avg_grad_sq" : "min_grad_sq";
}

struct ExperimentConfig {
  std::string experiment_id = "exp";
  std::string problem_id = "quadratic:d=10";
  std::string noise_id = "sparsify";
  Algorithm algorithm = Algorithm::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;  // used when beta2_rule == fixed
  Beta2Rule beta2_rule = Beta2Rule::one_minus_inv_T;
  double C0 = 1.0;
  double eps0 = 1.0;
  std::vector<long> T_grid{1000};
  int n_seeds = 10;
  double delta = 0.1;
  Metric metric = Metric::avg_grad_sq;
  std::uint64_t master_seed = 1;
  int jobs = 0;  // 0 = number of processors
};

inline double beta2_for(const ExperimentConfig& cfg, long T) {
  if (cfg.beta2_rule == Beta2Rule::fixed) return cfg.beta2;
  return 1.0 - 1.0 / double(T);
}

struct TrialRow {
  std::string experiment_id;
  std::string algorithm;
  std::string problem;
  std::string noise;
  long T = 0;
  double beta1 = 0.0, beta2 = 0.0, C0 = 0.0, eps0 = 0.0;
  std::uint64_t seed = 0;
  std::string metric_name;
  double metric_value = 0.0;
  double bound_rhs = 0.0;
  bool bound_ok = false;
  double max_grad_sq = 0.0;
  double G = 0.0;
};

namespace detail {

// Static index partition; results land in preassigned slots so the output
// order never depends on scheduling.
template <class F>
void parallel_for(long n, int jobs, F&& body) {
  if (jobs <= 0) jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  jobs = int(std::min<long>(jobs, n));
  if (jobs <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(jobs));
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      for (long i = w; i < n; i += jobs) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// One row per (horizon, seed). Each trial draws from its own substream, so
/// the table is identical no matter how many workers run it.
inline std::vector<TrialRow> run_trials(const ExperimentConfig& cfg) {
  const Problem problem = parse_problem(cfg.problem_id);
  const NoiseModel noise = parse_noise(cfg.noise_id, problem.dim);
  const long n = long(cfg.T_grid.size()) * cfg.n_seeds;
  std::vector<TrialRow> rows(static_cast<std::size_t>(n));
  detail::parallel_for(n, cfg.jobs, [&](long idx) {
    const long ti = idx / cfg.n_seeds;
    const long si = idx % cfg.n_seeds;
    const long T = cfg.T_grid[std::size_t(ti)];
    const Hyperparams hp =
        make_hyperparams(cfg.beta1, beta2_for(cfg, T), cfg.C0, cfg.eps0, T,
                         problem.dim);
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, std::uint64_t(T), std::uint64_t(si));
    const Trajectory traj = run(problem, noise, hp, cfg.algorithm, seed);
    if (traj.non_finite)
      throw NonFiniteState("trial T=" + std::to_string(T) + " seed=" +
                           std::to_string(si) + ": " + traj.diagnostic);
    const analysis::BoundConstants bc =
        analysis::evaluate_G(hp, problem, noise, cfg.delta);
    TrialRow& row = rows[std::size_t(idx)];
    row.experiment_id = cfg.experiment_id;
    row.algorithm = name(cfg.algorithm);
    row.problem = problem.id;
    row.noise = noise.id;
    row.T = T;
    row.beta1 = hp.beta1;
    row.beta2 = hp.beta2;
    row.C0 = hp.C0;
    row.eps0 = hp.eps0;
    // the substream seed, not the index: `run --seed <value>` replays the row
    row.seed = seed;
    row.metric_name = name(cfg.metric);
    row.metric_value = cfg.metric == Metric::avg_grad_sq
                           ? analysis::avg_grad_sq(traj)
                           : analysis::min_grad_sq(traj);
    row.bound_rhs = cfg.algorithm == Algorithm::adam ? bc.avg_bound_adam
                                                     : bc.avg_bound_variant;
    row.bound_ok = row.metric_value <= row.bound_rhs;
    row.max_grad_sq = analysis::max_grad_sq(traj);
    row.G = bc.G;
  });
  return rows;
}

struct QuantileRow {
  long T = 0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of log-residuals
  std::vector<QuantileRow> per_T;
  bool floored = false;  // a zero median was clamped to machine epsilon
};

namespace detail {

inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * double(v.size() - 1);
  const std::size_t lo = std::size_t(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - double(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace detail

/// Least-squares slope of log(median metric) against log(T).
inline RateFit fit_rate(const std::vector<TrialRow>& table,
                        Metric metric) {
  const std::string metric_name = name(metric);
  std::map<long, std::vector<double>> by_T;
  for (const auto& row : table)
    if (row.metric_name == metric_name) by_T[row.T].push_back(row.metric_value);
  if (by_T.size() < 2)
    throw InvalidRange("table", "rate fit needs at least two horizons");

  RateFit fit;
  std::vector<double> xs, ys;
  for (auto& [T, vals] : by_T) {
    QuantileRow q;
    q.T = T;
    q.q25 = detail::quantile(vals, 0.25);
    q.median = detail::quantile(vals, 0.50);
    q.q75 = detail::quantile(vals, 0.75);
    fit.per_T.push_back(q);
    double med = q.median;
    if (med <= 0.0) {
      med = std::numeric_limits<double>::epsilon();
      fit.floored = true;
    }
    xs.push_back(std::log(double(T)));
    ys.push_back(std::log(med));
  }
  const double n = double(xs.size());
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= n;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

struct AdaptivityReport {
  RateFit fit_zero;
  RateFit fit_positive;
  std::vector<TrialRow> rows_zero;
  std::vector<TrialRow> rows_positive;
  bool adaptive = false;
};

namespace detail {

inline std::string comparable_key(const ExperimentConfig& c) {
  std::string k = c.problem_id + "|" + std::string(name(c.algorithm)) + "|" +
                  std::to_string(c.beta1) + "|" + std::to_string(c.beta2) +
                  "|" + std::to_string(int(c.beta2_rule)) + "|" +
                  std::to_string(c.C0) + "|" + std::to_string(c.eps0) + "|" +
                  std::to_string(c.n_seeds) + "|" + std::to_string(c.delta) +
                  "|" + std::string(name(c.metric)) + "|" +
                  std::to_string(c.master_seed);
  for (long T : c.T_grid) k += "," + std::to_string(T);
  return k;
}

}  // namespace detail

/// Compares decay rates of the variant with and without additive noise.
/// The configs must be identical apart from the noise model.
inline AdaptivityReport noise_adaptivity(const ExperimentConfig& zero,
                                         const ExperimentConfig& positive) {
  if (zero.noise_id == positive.noise_id &&
      detail::comparable_key(zero) == detail::comparable_key(positive))
    throw ConfigsNotDistinct("the two configs are identical");
  if (detail::comparable_key(zero) != detail::comparable_key(positive))
    throw std::invalid_argument(
        "configs may differ only in the noise model");
  if (zero.algorithm != Algorithm::variant)
    throw std::invalid_argument("noise adaptivity is a variant-only probe");
  AdaptivityReport rep;
  rep.rows_zero = run_trials(zero);
  rep.rows_positive = run_trials(positive);
  rep.fit_zero = fit_rate(rep.rows_zero, zero.metric);
  rep.fit_positive = fit_rate(rep.rows_positive, positive.metric);
  rep.adaptive = rep.fit_zero.slope <= -0.8 &&
                 rep.fit_positive.slope >= -0.7 &&
                 rep.fit_positive.slope <= -0.3;
  return rep;
}

struct Beta1Row {
  double beta1 = 0.0;
  double C0 = 0.0;
  double metric = 0.0;
  bool skipped = false;  // beta1 >= beta2 at some horizon in the grid
};

/// Final-horizon metric across a beta1 grid with the C0 = (1-beta1)^3
/// coupling. Qualitative: rows are reported, not thresholded.
inline std::vector<Beta1Row> beta1_sweep(const ExperimentConfig& base,
                                         const std::vector<double>& grid) {
  std::vector<Beta1Row> rows;
  const long T_last = *std::max_element(base.T_grid.begin(),
                                        base.T_grid.end());
  for (double b1 : grid) {
    Beta1Row row;
    row.beta1 = b1;
    row.C0 = (1.0 - b1) * (1.0 - b1) * (1.0 - b1);
    bool valid = b1 >= 0.0 && b1 < 1.0;
    for (long T : base.T_grid)
      valid = valid && b1 < beta2_for(base, T);
    if (!valid) {
      row.skipped = true;
      rows.push_back(row);
      continue;
    }
    ExperimentConfig cfg = base;
    cfg.beta1 = b1;
    cfg.C0 = row.C0;
    cfg.T_grid = {T_last};
    cfg.experiment_id = base.experiment_id + ":beta1=" + std::to_string(b1);
    std::vector<double> vals;
    for (const auto& r : run_trials(cfg)) vals.push_back(r.metric_value);
    row.metric = detail::quantile(vals, 0.5);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace adamhp::experiments
