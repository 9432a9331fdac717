#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "core.hpp"
#include "optimizer.hpp"
#include "problems.hpp"
#include "rng.hpp"

namespace adamhp::verify {

struct SuiteOptions {
  long trajectories = 10;  // per (problem, noise, beta1) combination
  long T = 200;
  double beta2 = 0.99;
  double C0 = 1.0;
  double eps0 = 1e-3;
  std::vector<double> beta1_presets{0.0, 0.5, 0.9};
  long log_sum_sequences = 1000;
  long log_sum_max_len = 50;
  long smooth_points = 10000;
  long a3_points = 100;
  long a3_draws = 1000;
  long horizon_samples = 50;
  std::uint64_t seed = 1;
};

struct SuiteRow {
  std::string name;
  long cases = 0;
  long violations = 0;
  double worst_slack = 0.0;
  bool pass = false;
};

namespace detail {

inline SuiteRow to_row(const CheckReport& rep) {
  SuiteRow row;
  row.name = rep.name;
  row.cases = rep.checked;
  row.violations = rep.violations;
  row.worst_slack = rep.checked ? rep.worst.slack() : 0.0;
  row.pass = rep.pass();
  return row;
}

}  // namespace detail

/// Runs every trajectory inequality over the stock problem/noise matrix and
/// the scalar checks beside it. Pure function of the options.
inline std::vector<SuiteRow> run_suite(const SuiteOptions& opt) {
  std::vector<Problem> problems;
  problems.push_back(quadratic({1.0, 2.0, 4.0}));
  problems.push_back(boat(3));

  CheckReport momentum_ratio("momentum_ratio");
  CheckReport gradient_growth("gradient_growth");
  CheckReport aux_gap("aux_gradient_gap");
  CheckReport sum_grad("adaptive_sum_grad");
  CheckReport sum_momentum("adaptive_sum_momentum");
  CheckReport sum_shifted("adaptive_sum_momentum_shifted");
  CheckReport sum_debiased("adaptive_sum_debiased");
  CheckReport gap_current("proxy_gap_current");
  CheckReport gap_previous("proxy_gap_previous");
  CheckReport proxy_lower("proxy_lower_bounds");
  CheckReport envelope_dom("envelope_domination");
  CheckReport step_ratio("step_ratio");
  CheckReport denom_ratio("denominator_ratio");
  CheckReport rewrite("rewrite_identity");

  long combo = 0;
  for (const Problem& problem : problems) {
    const std::vector<NoiseModel> noises{
        noise_none(problem.dim), noise_bounded_additive(problem.dim, 0.5),
        noise_sparsify(problem.dim)};
    for (const NoiseModel& noise : noises) {
      for (double b1 : opt.beta1_presets) {
        ++combo;
        const Hyperparams hp = make_hyperparams(b1, opt.beta2, opt.C0,
                                                opt.eps0, opt.T, problem.dim);
        for (long k = 0; k < opt.trajectories; ++k) {
          const Algorithm alg =
              (k % 2 == 0) ? Algorithm::adam : Algorithm::variant;
          const std::uint64_t seed =
              derive_seed(opt.seed, std::uint64_t(combo), std::uint64_t(k));
          const Trajectory traj = run(problem, noise, hp, alg, seed);

          const auto mg = analysis::momentum_growth_check(traj);
          momentum_ratio.merge(mg.ratio);
          gradient_growth.merge(mg.growth);
          aux_gap.merge(analysis::aux_gradient_gap_check(traj, problem));
          const double F_T =
              analysis::grad_poly_envelope(hp, problem, noise, hp.T);
          const auto sums = analysis::adaptive_sum_bounds_check(traj, F_T);
          sum_grad.merge(sums.grad);
          sum_momentum.merge(sums.momentum);
          sum_shifted.merge(sums.momentum_shifted);
          sum_debiased.merge(sums.debiased);
          const auto gaps = analysis::proxy_gap_check(traj);
          gap_current.merge(gaps.current);
          gap_previous.merge(gaps.previous);
          proxy_lower.merge(analysis::proxy_lower_bound_check(traj));
          envelope_dom.merge(analysis::envelope_domination_check(traj));
          step_ratio.merge(analysis::step_ratio_check(traj));
          denom_ratio.merge(analysis::denom_ratio_check(traj));

          for (long s = 1; s <= traj.horizon() - 1; ++s)
            for (int i = 0; i < hp.d; ++i) {
              const double x_next =
                  traj.steps[std::size_t(s)].x[std::size_t(i)];
              rewrite.add(s, i, rewrite_residual(traj, s, i),
                          1e-10 * (1.0 + std::abs(x_next)));
            }
        }
      }
    }
  }

  // scalar / sampled checks
  Rng rng(derive_seed(opt.seed, 0xa11, 0));
  CheckReport log_sums("log_sum_bounds");
  for (long k = 0; k < opt.log_sum_sequences; ++k) {
    const long len = 1 + long(rng.index(std::size_t(opt.log_sum_max_len)));
    Vec alpha(std::size_t(len), 0.0);
    for (double& a : alpha) a = rng.uniform(-2.0, 2.0);
    const double b1 = rng.uniform(0.01, 0.97);
    const double b2 = rng.uniform(b1 + 0.01, 1.0);
    const double eps = std::pow(10.0, rng.uniform(-6.0, 0.0));
    const auto res = analysis::log_sum_bound_check(alpha, b1, b2, eps);
    log_sums.add(k, 0, res.lhs1, res.rhs1);
    log_sums.add(k, 1, res.lhs2, res.rhs2);
  }

  CheckReport smooth("smooth_gradient_bound");
  for (const Problem& problem : problems)
    smooth.merge(smooth_gradient_audit(problem, opt.smooth_points, rng));

  CheckReport horizon_log("horizon_log_bound");
  for (long k = 0; k < opt.horizon_samples; ++k) {
    const long T =
        2 + long(std::pow(10.0, rng.uniform(0.0, 6.0)));
    const auto res = analysis::horizon_log_check(T);
    horizon_log.add(T, -1, res.value, 2.0);
  }

  CheckReport a3("a3_certificate");
  CheckReport a3_self("a3_misdeclared_selftest");
  for (const Problem& problem : problems) {
    const std::vector<NoiseModel> noises{
        noise_none(problem.dim), noise_bounded_additive(problem.dim, 0.5),
        noise_sparsify(problem.dim),
        noise_affine_mix(problem.dim, 0.5)};
    for (const NoiseModel& noise : noises) {
      const auto rep =
          certify_a3(noise, problem, opt.a3_draws, opt.a3_points, rng);
      a3.add(0, -1, double(rep.violations), 0.0);
    }
    // deliberately under-declared multiplier must be caught
    NoiseModel bad = with_certificate(
        noise_sparsify(problem.dim), Vec(std::size_t(problem.dim), 0.0),
        Vec(std::size_t(problem.dim), double(problem.dim - 2)));
    const auto rep = certify_a3(bad, problem, opt.a3_draws, opt.a3_points, rng);
    a3_self.add(0, -1, 1.0, double(rep.violations));  // want violations >= 1
  }

  std::vector<SuiteRow> rows;
  for (const CheckReport* rep :
       {&momentum_ratio, &gradient_growth, &aux_gap, &sum_grad, &sum_momentum,
        &sum_shifted, &sum_debiased, &gap_current, &gap_previous, &proxy_lower,
        &envelope_dom, &step_ratio, &denom_ratio, &rewrite, &log_sums, &smooth,
        &horizon_log, &a3, &a3_self})
    rows.push_back(detail::to_row(*rep));
  return rows;
}

inline bool all_pass(const std::vector<SuiteRow>& rows) {
  for (const auto& row : rows)
    if (!row.pass) return false;
  return true;
}

}  // namespace adamhp::verify
