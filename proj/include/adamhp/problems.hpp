#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace adamhp {

struct NonPositiveEigenvalue : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Smooth objective with known smoothness constant and infimum.
struct Problem {
  std::string id;
  int dim = 0;
  std::function<double(std::span<const double>)> f;
  std::function<Vec(std::span<const double>)> grad;
  double L = 0.0;
  double f_star = 0.0;
  Vec x1;  // standard start point
};

namespace detail {
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace detail

/// f(x) = 1/2 sum_i lambda_i x_i^2; L = max lambda, f* = 0, x1 = all ones.
inline Problem quadratic(Vec spectrum) {
  if (spectrum.empty())
    throw NonPositiveEigenvalue("quadratic needs at least one eigenvalue");
  double lmax = 0.0;
  for (double l : spectrum) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw NonPositiveEigenvalue("quadratic eigenvalues must be positive");
    lmax = std::max(lmax, l);
  }
  Problem p;
  p.dim = int(spectrum.size());
  p.id = "quadratic:spectrum=";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (i) p.id += ',';
    p.id += detail::fmt_g(spectrum[i]);
  }
  p.L = lmax;
  p.f_star = 0.0;
  p.x1.assign(p.dim, 1.0);
  auto lam = std::make_shared<Vec>(std::move(spectrum));
  p.f = [lam](std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      acc += 0.5 * (*lam)[i] * x[i] * x[i];
    return acc;
  };
  p.grad = [lam](std::span<const double> x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*lam)[i] * x[i];
    return g;
  };
  return p;
}

inline Problem quadratic_uniform(int d) {
  Problem p = quadratic(Vec(std::size_t(d), 1.0));
  p.id = "quadratic:d=" + std::to_string(d);
  return p;
}

/// f(x) = sum_i x_i^2 / (1 + x_i^2): bounded, flat in the tails, nonconvex.
/// Per-coordinate second derivative peaks at 2, so L = 2; f* = 0.
inline Problem boat(int d) {
  if (d < 1) throw InvalidRange("d", "boat needs d >= 1");
  Problem p;
  p.dim = d;
  p.id = "boat:d=" + std::to_string(d);
  p.L = 2.0;
  p.f_star = 0.0;
  p.x1.assign(std::size_t(d), 1.0);
  p.f = [](std::span<const double> x) {
    double acc = 0.0;
    for (double u : x) acc += u * u / (1.0 + u * u);
    return acc;
  };
  p.grad = [](std::span<const double> x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double q = 1.0 + x[i] * x[i];
      g[i] = 2.0 * x[i] / (q * q);
    }
    return g;
  };
  return p;
}

enum class NoiseKind { none, bounded_additive, sparsify, affine_mix };

/// Stochastic gradient oracle description. sigma0/sigma1 form the declared
/// certificate (g_i - grad_i)^2 <= sigma0_i^2 + sigma1_i^2 grad_i^2, which
/// must hold on every draw. half_width is the actual additive support used
/// for sampling; builders keep it consistent with the certificate, and
/// with_certificate() deliberately decouples the two for self-tests.
struct NoiseModel {
  std::string id;
  NoiseKind kind = NoiseKind::none;
  double half_width = 0.0;
  Vec sigma0;
  Vec sigma1;
};

inline NoiseModel noise_none(int d) {
  NoiseModel n;
  n.id = "none";
  n.kind = NoiseKind::none;
  n.sigma0.assign(std::size_t(d), 0.0);
  n.sigma1.assign(std::size_t(d), 0.0);
  return n;
}

inline NoiseModel noise_bounded_additive(int d, double s0) {
  if (!(s0 >= 0.0)) throw InvalidRange("sigma0", "additive level must be >= 0");
  NoiseModel n;
  n.id = "bounded:sigma0=" + detail::fmt_g(s0);
  n.kind = NoiseKind::bounded_additive;
  n.half_width = s0;
  n.sigma0.assign(std::size_t(d), s0);
  n.sigma1.assign(std::size_t(d), 0.0);
  return n;
}

// One coordinate, chosen uniformly, scaled by d; the rest zeroed.
// Unbiased, with per-coordinate deviation at most (d-1)|grad_i|.
inline NoiseModel noise_sparsify(int d) {
  NoiseModel n;
  n.id = "sparsify";
  n.kind = NoiseKind::sparsify;
  n.sigma0.assign(std::size_t(d), 0.0);
  n.sigma1.assign(std::size_t(d), double(d - 1));
  return n;
}

// Sparsify plus an independent additive term; (a+b)^2 <= 2a^2 + 2b^2 gives
// the combined certificate sqrt(2) * s0, sqrt(2) * (d-1).
inline NoiseModel noise_affine_mix(int d, double s0) {
  if (!(s0 >= 0.0)) throw InvalidRange("sigma0", "additive level must be >= 0");
  NoiseModel n;
  n.id = "affine:sigma0=" + detail::fmt_g(s0);
  n.kind = NoiseKind::affine_mix;
  n.half_width = s0;
  const double r2 = std::sqrt(2.0);
  n.sigma0.assign(std::size_t(d), r2 * s0);
  n.sigma1.assign(std::size_t(d), r2 * double(d - 1));
  return n;
}

// Replaces the declared certificate without touching the sampler.
inline NoiseModel with_certificate(NoiseModel n, Vec sigma0, Vec sigma1) {
  n.sigma0 = std::move(sigma0);
  n.sigma1 = std::move(sigma1);
  n.id += ":misdeclared";
  return n;
}

inline Vec sample_gradient(const NoiseModel& noise, const Problem& problem,
                           std::span<const double> x, Rng& rng) {
  Vec g = problem.grad(x);
  switch (noise.kind) {
    case NoiseKind::none:
      break;
    case NoiseKind::bounded_additive:
      for (double& gi : g) gi += rng.symmetric(noise.half_width);
      break;
    case NoiseKind::sparsify: {
      const std::size_t j = rng.index(g.size());
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = (i == j) ? double(g.size()) * g[i] : 0.0;
      break;
    }
    case NoiseKind::affine_mix: {
      const std::size_t j = rng.index(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = (i == j) ? double(g.size()) * g[i] : 0.0;
        g[i] = s + rng.symmetric(noise.half_width);
      }
      break;
    }
  }
  return g;
}

struct A3Report {
  long draws = 0;
  long violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
};

/// Checks the declared certificate on every draw at randomly sampled points.
/// The bound is almost-sure: a correct declaration yields zero violations.
inline A3Report certify_a3(const NoiseModel& noise, const Problem& problem,
                           long n_draws, long n_points, Rng& rng) {
  A3Report rep;
  Vec x(std::size_t(problem.dim));
  for (long p = 0; p < n_points; ++p) {
    for (double& xi : x) xi = rng.uniform(-2.0, 2.0);
    const Vec grad = problem.grad(x);
    for (long k = 0; k < n_draws; ++k) {
      const Vec g = sample_gradient(noise, problem, x, rng);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double dev = g[i] - grad[i];
        const double lhs = dev * dev;
        const double rhs = noise.sigma0[i] * noise.sigma0[i] +
                           noise.sigma1[i] * noise.sigma1[i] * grad[i] * grad[i];
        ++rep.draws;
        if (!leq_tol(lhs, rhs)) ++rep.violations;
        rep.worst_slack = std::min(rep.worst_slack, rhs - lhs);
      }
    }
  }
  return rep;
}

/// ||grad f(x)||^2 <= 2 L (f(x) - f*) at sampled points.
inline CheckReport smooth_gradient_audit(const Problem& problem, long n_points,
                                         Rng& rng, double radius = 5.0) {
  CheckReport rep("smooth_gradient_bound");
  Vec x(std::size_t(problem.dim));
  for (long p = 0; p < n_points; ++p) {
    for (double& xi : x) xi = rng.uniform(-radius, radius);
    const Vec g = problem.grad(x);
    double sq = 0.0;
    for (double gi : g) sq += gi * gi;
    rep.add(p, -1, sq, 2.0 * problem.L * (problem.f(x) - problem.f_star));
  }
  return rep;
}

inline Problem parse_problem(const std::string& id);
inline NoiseModel parse_noise(const std::string& id, int d);

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidRange(what, "cannot parse number '" + s + "'");
  }
}

}  // namespace detail

// "quadratic:spectrum=1,4", "quadratic:d=10", "boat:d=3"
inline Problem parse_problem(const std::string& id) {
  const std::size_t colon = id.find(':');
  const std::string head = id.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : id.substr(colon + 1);
  if (head == "quadratic") {
    if (tail.rfind("spectrum=", 0) == 0) {
      Vec spec;
      for (const auto& tok : detail::split(tail.substr(9), ','))
        spec.push_back(detail::parse_num(tok, "spectrum"));
      return quadratic(std::move(spec));
    }
    if (tail.rfind("d=", 0) == 0)
      return quadratic_uniform(int(detail::parse_num(tail.substr(2), "d")));
    throw InvalidRange("problem", "unrecognized quadratic form '" + id + "'");
  }
  if (head == "boat") {
    if (tail.rfind("d=", 0) == 0)
      return boat(int(detail::parse_num(tail.substr(2), "d")));
    throw InvalidRange("problem", "boat needs d=<dim> in '" + id + "'");
  }
  throw InvalidRange("problem", "unknown problem '" + id + "'");
}

// "none", "bounded:sigma0=0.5", "sparsify", "affine:sigma0=0.5"
inline NoiseModel parse_noise(const std::string& id, int d) {
  const std::size_t colon = id.find(':');
  const std::string head = id.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : id.substr(colon + 1);
  if (head == "none") return noise_none(d);
  if (head == "sparsify") return noise_sparsify(d);
  if (head == "bounded" || head == "affine") {
    if (tail.rfind("sigma0=", 0) != 0)
      throw InvalidRange("noise", "missing sigma0= in '" + id + "'");
    const double s0 = detail::parse_num(tail.substr(7), "sigma0");
    return head == "bounded" ? noise_bounded_additive(d, s0)
                             : noise_affine_mix(d, s0);
  }
  throw InvalidRange("noise", "unknown noise '" + id + "'");
}

}  // namespace adamhp
