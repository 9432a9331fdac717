#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "core.hpp"
#include "rng.hpp"

namespace adamhp::concentration {

struct CertificateViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MartingaleKind { zero, rademacher, gaussian };

inline const char* name(MartingaleKind k) {
  switch (k) {
    case MartingaleKind::zero: return "zero";
    case MartingaleKind::rademacher: return "rademacher";
    default: return "gaussian";
  }
}

// Gaussian differences need their conditional scale inflated so that
// E[exp(Z^2/sigma^2)] = e holds with equality.
inline double gaussian_scale_factor() {
  return std::sqrt(2.0 / (1.0 - std::exp(-2.0)));
}

/// Martingale difference sequence with per-step certificate
/// E[exp(Z_s^2 / sigma_s^2) | F_{s-1}] <= e. scale is the raw magnitude
/// (the Rademacher level, or the Gaussian standard deviation).
/// scale_override, when positive, replaces the calibrated sigma_s; the
/// mis-calibration self-test uses it to break the certificate on purpose.
struct MartingaleSpec {
  MartingaleKind kind = MartingaleKind::rademacher;
  long horizon = 100;
  double scale = 1.0;
  double lambda = 1.0;
  double delta = 0.05;
  double scale_override = 0.0;
};

inline double conditional_scale(const MartingaleSpec& spec) {
  if (spec.scale_override > 0.0) return spec.scale_override;
  switch (spec.kind) {
    case MartingaleKind::zero: return 1.0;
    case MartingaleKind::rademacher: return spec.scale;
    default: return spec.scale * gaussian_scale_factor();
  }
}

inline double draw_difference(const MartingaleSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case MartingaleKind::zero: return 0.0;
    case MartingaleKind::rademacher: return spec.scale * rng.rademacher();
    default: return spec.scale * rng.gaussian();
  }
}

struct CertificateEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  bool ok = true;
};

// Monte-Carlo estimate of E[exp(Z^2/sigma^2)]; passes when the estimate is
// within five standard errors of e from above.
inline CertificateEstimate certificate_spot_check(const MartingaleSpec& spec,
                                                  long n, Rng& rng) {
  const double sigma = conditional_scale(spec);
  double sum = 0.0, sumsq = 0.0;
  for (long k = 0; k < n; ++k) {
    const double z = draw_difference(spec, rng);
    const double w = std::exp(z * z / (sigma * sigma));
    sum += w;
    sumsq += w * w;
  }
  CertificateEstimate est;
  est.mean = sum / double(n);
  const double var =
      std::max(0.0, sumsq / double(n) - est.mean * est.mean);
  est.std_error = std::sqrt(var / double(n));
  const double e = std::exp(1.0);
  est.ok = leq_tol(est.mean, e + 5.0 * est.std_error);
  return est;
}

struct AzumaResult {
  long trials = 0;
  long exceedances = 0;
  double failure_rate = 0.0;
  double allowance = 0.0;  // delta + 3 sqrt(delta (1-delta) / trials)
  double certificate_mean = 0.0;
  bool ok = false;
};

/// Empirical tail check of
///   P( sum_s Z_s > log(1/delta)/lambda + (3/4) lambda sum_s sigma_s^2 ) <= delta.
/// The threshold is evaluated per path so adaptive scales remain valid.
inline AzumaResult azuma_mc(const MartingaleSpec& spec, long n_trials,
                            Rng& rng) {
  if (n_trials < 1000)
    throw InvalidRange("n_trials", "need at least 1000 trials");
  if (!(spec.lambda > 0.0)) throw InvalidRange("lambda", "need lambda > 0");
  if (!(spec.delta > 0.0) || !(spec.delta < 1.0))
    throw InvalidRange("delta", "need delta in (0, 1)");
  if (spec.horizon < 1) throw InvalidRange("horizon", "need horizon >= 1");

  const CertificateEstimate cert = certificate_spot_check(spec, 20000, rng);
  if (!cert.ok)
    throw CertificateViolation(
        std::string("difference certificate failed for generator ") +
        name(spec.kind) + ": estimate " + std::to_string(cert.mean) +
        " exceeds e + 5 SE");

  const double sigma = conditional_scale(spec);
  AzumaResult res;
  res.trials = n_trials;
  res.certificate_mean = cert.mean;
  for (long trial = 0; trial < n_trials; ++trial) {
    double sum = 0.0, var_sum = 0.0;
    for (long s = 0; s < spec.horizon; ++s) {
      sum += draw_difference(spec, rng);
      var_sum += sigma * sigma;
    }
    const double threshold =
        std::log(1.0 / spec.delta) / spec.lambda +
        0.75 * spec.lambda * var_sum;
    if (sum > threshold) ++res.exceedances;
  }
  res.failure_rate = double(res.exceedances) / double(n_trials);
  res.allowance =
      spec.delta +
      3.0 * std::sqrt(spec.delta * (1.0 - spec.delta) / double(n_trials));
  res.ok = res.failure_rate <= res.allowance;
  return res;
}

}  // namespace adamhp::concentration
