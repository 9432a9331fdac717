#pragma once

// Command line front end. Four subcommands:
//
//   run            one trajectory, dumped as trajectory.csv
//   verify         inequality suite over a stock trajectory matrix
//   sweep          horizon sweeps (rate | adaptivity | beta1 modes)
//   concentration  Monte Carlo tail check for the martingale bound
//
// Exit codes: 0 success, 1 a checked inequality or tail bound failed,
// 2 bad config / bad flags / IO trouble.
//
// Every CSV starts with `# config_hash=<hex16> seed=<u64>` so runs can
// be matched to the exact configuration text that produced them.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adamhp/analysis.hpp"
#include "adamhp/concentration.hpp"
#include "adamhp/config.hpp"
#include "adamhp/core.hpp"
#include "adamhp/experiments.hpp"
#include "adamhp/optimizer.hpp"
#include "adamhp/problems.hpp"
#include "adamhp/verify.hpp"

namespace adamhp::cli {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// %.17g round-trips doubles exactly; CSV bytes stay reproducible.
inline std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// console-facing shorthand
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::ofstream open_csv(const std::string& dir, const std::string& name,
                              std::uint64_t config_hash, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  char head[64];
  std::snprintf(head, sizeof head, "# config_hash=%016" PRIx64 " seed=%" PRIu64,
                config_hash, seed);
  out << head << "\n";
  return out;
}

// Keys the parser accepts anywhere; a key outside this list is a typo.
inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "problem.id",
      "noise.id",
      "optimizer.algorithm",
      "optimizer.beta1",
      "optimizer.beta2",
      "optimizer.beta2_rule",
      "optimizer.C0",
      "optimizer.eps0",
      "optimizer.T",
      "experiment.id",
      "experiment.T_grid",
      "experiment.n_seeds",
      "experiment.delta",
      "experiment.metric",
      "sweep.mode",
      "sweep.noise_zero",
      "sweep.noise_positive",
      "sweep.beta1_grid",
      "verify.trajectories",
      "verify.T",
      "verify.beta2",
      "verify.C0",
      "verify.eps0",
      "verify.sequences",
      "verify.smooth_points",
      "verify.a3_points",
      "verify.a3_draws",
  };
  return keys;
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "adam") return Algorithm::adam;
  if (s == "variant") return Algorithm::variant;
  throw ConfigError("optimizer.algorithm must be 'adam' or 'variant', got '" +
                    s + "'");
}

inline experiments::Beta2Rule parse_beta2_rule(const std::string& s) {
  if (s == "fixed") return experiments::Beta2Rule::fixed;
  if (s == "one_minus_inv_T") return experiments::Beta2Rule::one_minus_inv_T;
  throw ConfigError(
      "optimizer.beta2_rule must be 'fixed' or 'one_minus_inv_T', got '" + s +
      "'");
}

inline experiments::Metric parse_metric(const std::string& s) {
  if (s == "avg_grad_sq") return experiments::Metric::avg_grad_sq;
  if (s == "min_grad_sq") return experiments::Metric::min_grad_sq;
  throw ConfigError(
      "experiment.metric must be 'avg_grad_sq' or 'min_grad_sq', got '" + s +
      "'");
}

inline experiments::ExperimentConfig experiment_from(const Config& cfg,
                                                     std::uint64_t seed,
                                                     int jobs) {
  experiments::ExperimentConfig ec;
  ec.experiment_id = cfg.get_str("experiment.id", "exp");
  ec.problem_id = cfg.get_str("problem.id", ec.problem_id);
  ec.noise_id = cfg.get_str("noise.id", ec.noise_id);
  ec.algorithm = parse_algorithm(cfg.get_str("optimizer.algorithm", "adam"));
  ec.beta1 = cfg.get_num("optimizer.beta1", ec.beta1);
  ec.beta2 = cfg.get_num("optimizer.beta2", ec.beta2);
  ec.beta2_rule = parse_beta2_rule(
      cfg.get_str("optimizer.beta2_rule", "one_minus_inv_T"));
  ec.C0 = cfg.get_num("optimizer.C0", ec.C0);
  ec.eps0 = cfg.get_num("optimizer.eps0", ec.eps0);
  if (cfg.has("experiment.T_grid")) ec.T_grid = cfg.get_int_list("experiment.T_grid");
  ec.n_seeds = int(cfg.get_int("experiment.n_seeds", ec.n_seeds));
  ec.delta = cfg.get_num("experiment.delta", ec.delta);
  ec.metric = parse_metric(cfg.get_str("experiment.metric", "avg_grad_sq"));
  ec.master_seed = seed;
  ec.jobs = jobs;
  return ec;
}

inline void write_trial_rows(std::ofstream& out,
                             const std::vector<experiments::TrialRow>& rows) {
  out << "experiment_id,algorithm,problem,noise,T,beta1,beta2,C0,eps0,seed,"
         "metric_name,metric_value,bound_rhs,bound_ok,max_grad_sq,G\n";
  for (const auto& r : rows) {
    out << r.experiment_id << ',' << r.algorithm << ',' << r.problem << ','
        << r.noise << ',' << r.T << ',' << num17(r.beta1) << ','
        << num17(r.beta2) << ',' << num17(r.C0) << ',' << num17(r.eps0) << ','
        << r.seed << ',' << r.metric_name << ',' << num17(r.metric_value)
        << ',' << num17(r.bound_rhs) << ',' << (r.bound_ok ? 1 : 0) << ','
        << num17(r.max_grad_sq) << ',' << num17(r.G) << '\n';
  }
}

inline void print_fit(std::ostream& out, const std::string& label,
                      const experiments::RateFit& fit) {
  out << label << ": slope " << num(fit.slope) << ", intercept "
      << num(fit.intercept) << ", rms residual " << num(fit.residual)
      << (fit.floored ? " (zero median clamped)" : "") << "\n";
  for (const auto& q : fit.per_T)
    out << "  T=" << q.T << "  median " << num(q.median) << "  iqr ["
        << num(q.q25) << ", " << num(q.q75) << "]\n";
}

}  // namespace detail

inline int do_run(const Config& cfg, const std::string& out_dir,
                  std::uint64_t seed, bool quiet, std::ostream& out) {
  const Problem problem = parse_problem(cfg.get_str("problem.id", "quadratic:d=2"));
  const NoiseModel noise = parse_noise(cfg.get_str("noise.id", "none"), problem.dim);
  const Algorithm alg =
      detail::parse_algorithm(cfg.get_str("optimizer.algorithm", "adam"));
  const long T = cfg.get_int("optimizer.T", 1000);
  double beta2 = cfg.get_num("optimizer.beta2", 0.999);
  if (cfg.get_str("optimizer.beta2_rule", "fixed") == "one_minus_inv_T")
    beta2 = 1.0 - 1.0 / double(T);
  const Hyperparams hp = make_hyperparams(
      cfg.get_num("optimizer.beta1", 0.9), beta2,
      cfg.get_num("optimizer.C0", 1.0), cfg.get_num("optimizer.eps0", 1.0), T,
      problem.dim);

  const Trajectory traj = run(problem, noise, hp, alg, seed);
  const analysis::ProxySequence px = analysis::make_proxy(traj);

  std::ofstream csv = detail::open_csv(out_dir, "trajectory.csv",
                                       fnv1a64(cfg.raw()), seed);
  csv << "s,i,x,g,grad_true,m,v,b,a,eta_s,eps_s,f\n";
  for (long s = 1; s <= traj.horizon(); ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    for (int i = 0; i < hp.d; ++i) {
      const auto j = std::size_t(i);
      csv << s << ',' << i << ',' << num17(rec.x[j]) << ',' << num17(rec.g[j])
          << ',' << num17(rec.grad[j]) << ',' << num17(rec.m[j]) << ','
          << num17(rec.v[j]) << ',' << num17(rec.b[j]) << ','
          << num17(px.a[std::size_t(s - 1)][j]) << ',' << num17(rec.eta) << ','
          << num17(rec.eps) << ',' << num17(rec.f) << '\n';
    }
  }
  csv.close();

  if (!quiet) {
    out << name(traj.algorithm) << " on " << traj.problem_id << " + "
        << traj.noise_id << ", T=" << hp.T << "\n";
    out << "  steps logged   " << traj.horizon() << "\n";
    out << "  final f        " << num(traj.f_final) << "\n";
    out << "  avg |grad|^2   " << num(analysis::avg_grad_sq(traj)) << "\n";
  }
  if (traj.non_finite) {
    out << "trajectory aborted: " << traj.diagnostic << "\n";
    return 1;
  }
  return 0;
}

inline int do_verify(const Config* cfg, const std::string& out_dir,
                     std::uint64_t seed, bool quiet, std::ostream& out) {
  verify::SuiteOptions opt;
  opt.seed = seed;
  std::uint64_t hash = fnv1a64("");
  if (cfg) {
    hash = fnv1a64(cfg->raw());
    opt.trajectories = cfg->get_int("verify.trajectories", opt.trajectories);
    opt.T = cfg->get_int("verify.T", opt.T);
    opt.beta2 = cfg->get_num("verify.beta2", opt.beta2);
    opt.C0 = cfg->get_num("verify.C0", opt.C0);
    opt.eps0 = cfg->get_num("verify.eps0", opt.eps0);
    opt.log_sum_sequences = cfg->get_int("verify.sequences", opt.log_sum_sequences);
    opt.smooth_points = cfg->get_int("verify.smooth_points", opt.smooth_points);
    opt.a3_points = cfg->get_int("verify.a3_points", opt.a3_points);
    opt.a3_draws = cfg->get_int("verify.a3_draws", opt.a3_draws);
  }

  const std::vector<verify::SuiteRow> rows = verify::run_suite(opt);

  std::ofstream csv = detail::open_csv(out_dir, "verify_checks.csv", hash, seed);
  csv << "check,cases,violations,worst_slack,ok\n";
  for (const auto& r : rows)
    csv << r.name << ',' << r.cases << ',' << r.violations << ','
        << num17(r.worst_slack) << ',' << (r.pass ? 1 : 0) << '\n';
  csv.close();

  if (!quiet) {
    for (const auto& r : rows) {
      out << std::left << std::setw(30) << r.name << std::right
          << std::setw(9) << r.cases << " cases " << std::setw(4)
          << r.violations << " bad  slack " << std::left << std::setw(13)
          << num(r.worst_slack) << (r.pass ? " pass" : " FAIL") << "\n";
    }
  }
  const bool ok = verify::all_pass(rows);
  out << (ok ? "verify: all checks passed" : "verify: VIOLATIONS FOUND")
      << "\n";
  return ok ? 0 : 1;
}

inline int do_sweep(const Config& cfg, const std::string& out_dir,
                    std::uint64_t seed, int jobs, bool quiet,
                    std::ostream& out) {
  const std::string mode = cfg.get_str("sweep.mode", "rate");
  const std::uint64_t hash = fnv1a64(cfg.raw());
  experiments::ExperimentConfig base = detail::experiment_from(cfg, seed, jobs);

  if (mode == "rate") {
    const std::vector<experiments::TrialRow> rows = experiments::run_trials(base);
    std::ofstream csv = detail::open_csv(out_dir, "results.csv", hash, seed);
    detail::write_trial_rows(csv, rows);
    csv.close();
    const experiments::RateFit fit = experiments::fit_rate(rows, base.metric);
    if (!quiet) detail::print_fit(out, base.experiment_id, fit);
    return 0;
  }

  if (mode == "adaptivity") {
    experiments::ExperimentConfig zero = base;
    experiments::ExperimentConfig positive = base;
    zero.noise_id = cfg.get_str("sweep.noise_zero", "none");
    positive.noise_id = cfg.get_str("sweep.noise_positive", "bounded:sigma0=0.5");
    const experiments::AdaptivityReport rep =
        experiments::noise_adaptivity(zero, positive);
    std::ofstream csv = detail::open_csv(out_dir, "results.csv", hash, seed);
    std::vector<experiments::TrialRow> all = rep.rows_zero;
    all.insert(all.end(), rep.rows_positive.begin(), rep.rows_positive.end());
    detail::write_trial_rows(csv, all);
    csv.close();
    if (!quiet) {
      detail::print_fit(out, "noise " + zero.noise_id, rep.fit_zero);
      detail::print_fit(out, "noise " + positive.noise_id, rep.fit_positive);
      out << "noise-adaptive decay: " << (rep.adaptive ? "yes" : "no") << "\n";
    }
    return 0;
  }

  if (mode == "beta1") {
    std::vector<double> grid = cfg.get_num_list("sweep.beta1_grid");
    if (grid.empty()) grid = {0.0, 0.3, 0.6, 0.9};
    const std::vector<experiments::Beta1Row> rows =
        experiments::beta1_sweep(base, grid);
    std::ofstream csv = detail::open_csv(out_dir, "beta1_sweep.csv", hash, seed);
    csv << "beta1,C0,metric,skipped\n";
    for (const auto& r : rows)
      csv << num17(r.beta1) << ',' << num17(r.C0) << ',' << num17(r.metric)
          << ',' << (r.skipped ? 1 : 0) << '\n';
    csv.close();
    if (!quiet)
      for (const auto& r : rows)
        out << "beta1=" << num17(r.beta1) << "  C0=" << num17(r.C0)
            << "  metric="
            << (r.skipped ? std::string("skipped") : num17(r.metric)) << "\n";
    return 0;
  }

  throw ConfigError("sweep.mode must be rate, adaptivity or beta1, got '" +
                    mode + "'");
}

inline int do_concentration(long trials, long horizon, double delta,
                            const std::string& lambda_csv, double scale,
                            const std::string& out_dir, std::uint64_t seed,
                            bool quiet, std::ostream& out, std::ostream& err) {
  std::vector<double> lambdas;
  for (const std::string& piece : adamhp::detail::split(lambda_csv, ','))
    lambdas.push_back(adamhp::detail::parse_num(piece, "lambda-grid"));
  if (lambdas.empty()) throw ConfigError("--lambda-grid is empty");

  std::string flag_text = "trials=" + std::to_string(trials) +
                          " horizon=" + std::to_string(horizon) + " delta=" +
                          num17(delta) + " lambda=" + lambda_csv + " scale=" +
                          num17(scale);
  std::ofstream csv = detail::open_csv(out_dir, "concentration.csv",
                                       fnv1a64(flag_text), seed);
  csv << "kind,lambda,delta,trials,exceedances,failure_rate,allowance,"
         "certificate_mean,ok\n";

  using concentration::MartingaleKind;
  const MartingaleKind kinds[] = {MartingaleKind::zero,
                                  MartingaleKind::rademacher,
                                  MartingaleKind::gaussian};
  bool all_ok = true;
  try {
    for (int ki = 0; ki < 3; ++ki) {
      for (std::size_t li = 0; li < lambdas.size(); ++li) {
        concentration::MartingaleSpec spec;
        spec.kind = kinds[ki];
        spec.horizon = horizon;
        spec.scale = scale;
        spec.lambda = lambdas[li];
        spec.delta = delta;
        Rng rng(derive_seed(seed, 0xC0uLL + std::uint64_t(ki), li));
        const concentration::AzumaResult res =
            concentration::azuma_mc(spec, trials, rng);
        csv << name(spec.kind) << ',' << num17(spec.lambda) << ','
            << num17(delta) << ',' << res.trials << ',' << res.exceedances
            << ',' << num17(res.failure_rate) << ',' << num17(res.allowance)
            << ',' << num17(res.certificate_mean) << ','
            << (res.ok ? 1 : 0) << '\n';
        if (!quiet)
          out << std::left << std::setw(11) << name(spec.kind)
              << " lambda=" << std::setw(8) << num(spec.lambda)
              << " rate=" << num(res.failure_rate)
              << " allowance=" << num(res.allowance) << "  "
              << (res.ok ? "pass" : "FAIL") << "\n";
        all_ok = all_ok && res.ok;
      }
    }
  } catch (const concentration::CertificateViolation& ex) {
    err << "certificate check failed: " << ex.what() << "\n";
    return 1;
  }
  csv.close();
  out << (all_ok ? "concentration: tail bound held on every grid point"
                 : "concentration: tail bound EXCEEDED")
      << "\n";
  return all_ok ? 0 : 1;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Adam trajectory and bound verification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int jobs = 0;
  bool quiet = false;

  CLI::App* sub_run = app.add_subcommand("run", "integrate one trajectory");
  CLI::App* sub_verify =
      app.add_subcommand("verify", "check every tracked inequality");
  CLI::App* sub_sweep =
      app.add_subcommand("sweep", "horizon sweeps and rate fits");
  CLI::App* sub_conc = app.add_subcommand(
      "concentration", "Monte Carlo tail probability check");

  for (CLI::App* sub : {sub_run, sub_verify, sub_sweep, sub_conc}) {
    sub->add_option("--config", config_path, "config file (ini style)");
    sub->add_option("--out", out_dir, "directory for CSV output");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--jobs", jobs, "worker threads, 0 = all cores");
    sub->add_flag("--quiet", quiet, "suppress per-row output");
  }

  long c_trials = 10000;
  long c_horizon = 100;
  double c_delta = 0.05;
  double c_scale = 1.0;
  std::string c_lambda = "0.01,0.1,1.0";
  sub_conc->add_option("--trials", c_trials, "Monte Carlo sample paths");
  sub_conc->add_option("--horizon", c_horizon, "difference-sequence length");
  sub_conc->add_option("--delta", c_delta, "target tail probability");
  sub_conc->add_option("--lambda-grid", c_lambda, "comma separated lambdas");
  sub_conc->add_option("--scale", c_scale, "difference magnitude");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << ex.what() << "\n";
    return 2;
  }

  try {
    if (const char* env = std::getenv("ADAMHP_SEED")) {
      if (*env != '\0') {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
          v = std::stoull(env, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || env[used] != '\0')
          throw ConfigError(std::string("ADAMHP_SEED is not an integer: '") +
                            env + "'");
        seed = v;
      }
    }

    Config cfg;
    bool have_cfg = false;
    if (!config_path.empty()) {
      cfg = Config::parse(read_file(config_path));
      cfg.ensure_known(detail::known_keys());
      have_cfg = true;
    }

    if (*sub_run) {
      if (!have_cfg) throw ConfigError("run requires --config");
      return do_run(cfg, out_dir, seed, quiet, out);
    }
    if (*sub_verify)
      return do_verify(have_cfg ? &cfg : nullptr, out_dir, seed, quiet, out);
    if (*sub_sweep) {
      if (!have_cfg) throw ConfigError("sweep requires --config");
      return do_sweep(cfg, out_dir, seed, jobs, quiet, out);
    }
    return do_concentration(c_trials, c_horizon, c_delta, c_lambda, c_scale,
                            out_dir, seed, quiet, out, err);
  } catch (const NonFiniteState& ex) {
    err << "numeric blow-up: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
}

}  // namespace adamhp::cli
