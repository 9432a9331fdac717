#pragma once

#include <cmath>
#include <span>
#include <string>

#include "core.hpp"
#include "problems.hpp"
#include "rng.hpp"

namespace adamhp {

/// Per-step byproducts wanted by loggers: the applied displacement and the
/// denominator vector b = sqrt(v_new) + eps-term.
struct StepRecordDelta {
  Vec dx;
  Vec b;
};

namespace detail {

inline void require_finite(std::span<const double> g) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!std::isfinite(g[i]))
      throw NonFiniteInput("gradient coordinate " + std::to_string(i) +
                           " is not finite");
}

inline void require_shape(const OptimizerState& st, std::span<const double> g) {
  if (g.size() != st.x.size())
    throw InvalidRange("g", "gradient dimension mismatch");
}

}  // namespace detail

/// One update with folded bias corrections:
///   m <- beta1 m + (1 - beta1) g
///   v <- beta2 v + (1 - beta2) g.^2
///   x <- x - eta_s m / (sqrt(v) + eps_s)
/// The input gradient must be finite; the step index is taken from state.s.
inline OptimizerState adam_step(const OptimizerState& st,
                                std::span<const double> g,
                                const Hyperparams& hp,
                                StepRecordDelta* delta = nullptr) {
  detail::require_shape(st, g);
  detail::require_finite(g);
  const double lr = eta_s(hp, st.s);
  const double ep = eps_s(hp, st.s);
  OptimizerState out = st;
  out.x_prev = st.x;
  if (delta) {
    delta->dx.resize(g.size());
    delta->b.resize(g.size());
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * g[i];
    out.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * (g[i] * g[i]);
    const double b = std::sqrt(out.v[i]) + ep;
    const double dx = -lr * out.m[i] / b;
    out.x[i] = st.x[i] + dx;
    if (delta) {
      delta->dx[i] = dx;
      delta->b[i] = b;
    }
  }
  out.s = st.s + 1;
  return out;
}

/// Variant that skips the second-moment correction:
///   x <- x - (eta / (1 - beta1^s)) m / (sqrt(v) + eps), eps constant.
inline OptimizerState variant_step(const OptimizerState& st,
                                   std::span<const double> g,
                                   const Hyperparams& hp,
                                   StepRecordDelta* delta = nullptr) {
  detail::require_shape(st, g);
  detail::require_finite(g);
  const double lr = eta_variant_s(hp, st.s);
  OptimizerState out = st;
  out.x_prev = st.x;
  if (delta) {
    delta->dx.resize(g.size());
    delta->b.resize(g.size());
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * g[i];
    out.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * (g[i] * g[i]);
    const double b = std::sqrt(out.v[i]) + hp.eps;
    const double dx = -lr * out.m[i] / b;
    out.x[i] = st.x[i] + dx;
    if (delta) {
      delta->dx[i] = dx;
      delta->b[i] = b;
    }
  }
  out.s = st.s + 1;
  return out;
}

/// Textbook form with explicit debiasing:
///   x <- x - eta * m_hat / (sqrt(v_hat) + eps)
/// Algebraically identical to adam_step; kept as an independent reference.
inline OptimizerState canonical_step(const OptimizerState& st,
                                     std::span<const double> g,
                                     const Hyperparams& hp) {
  detail::require_shape(st, g);
  detail::require_finite(g);
  OptimizerState out = st;
  out.x_prev = st.x;
  const double cm = 1.0 - std::pow(hp.beta1, double(st.s));
  const double cv = 1.0 - std::pow(hp.beta2, double(st.s));
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * g[i];
    out.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * (g[i] * g[i]);
    const double mh = out.m[i] / cm;
    const double vh = out.v[i] / cv;
    out.x[i] = st.x[i] - hp.eta * mh / (std::sqrt(vh) + hp.eps);
  }
  out.s = st.s + 1;
  return out;
}

/// Runs T updates from the problem's standard start, logging every step.
/// A non-finite gradient or iterate stops the run early; the partial
/// trajectory is returned with non_finite set and a diagnostic.
inline Trajectory run(const Problem& problem, const NoiseModel& noise,
                      const Hyperparams& hp, Algorithm algorithm,
                      std::uint64_t seed) {
  if (auto issue = validate(hp))
    throw InvalidRange(issue->field, issue->message);
  if (problem.dim != hp.d)
    throw InvalidRange("d", "problem dimension disagrees with hyperparams");
  if (int(noise.sigma0.size()) != hp.d || int(noise.sigma1.size()) != hp.d)
    throw InvalidRange("noise", "noise certificate dimension mismatch");

  Trajectory traj;
  traj.algorithm = algorithm;
  traj.hp = hp;
  traj.problem_id = problem.id;
  traj.noise_id = noise.id;
  traj.L = problem.L;
  traj.f_star = problem.f_star;
  traj.sigma0 = noise.sigma0;
  traj.sigma1 = noise.sigma1;
  traj.steps.reserve(std::size_t(hp.T));

  Rng rng(seed);
  OptimizerState st = init_state(problem.x1);
  for (long s = 1; s <= hp.T; ++s) {
    StepRecord rec;
    rec.x = st.x;
    rec.grad = problem.grad(st.x);
    rec.f = problem.f(st.x);
    rec.g = sample_gradient(noise, problem, st.x, rng);
    rec.noise.resize(rec.g.size());
    for (std::size_t i = 0; i < rec.g.size(); ++i)
      rec.noise[i] = rec.g[i] - rec.grad[i];
    StepRecordDelta delta;
    try {
      st = (algorithm == Algorithm::adam)
               ? adam_step(st, rec.g, hp, &delta)
               : variant_step(st, rec.g, hp, &delta);
    } catch (const NonFiniteInput& e) {
      traj.non_finite = true;
      traj.diagnostic = "update " + std::to_string(s) + ": " + e.what();
      break;
    }
    rec.m = st.m;
    rec.v = st.v;
    rec.b = delta.b;
    rec.eta = (algorithm == Algorithm::adam) ? eta_s(hp, s)
                                             : eta_variant_s(hp, s);
    rec.eps = (algorithm == Algorithm::adam) ? eps_s(hp, s) : hp.eps;
    traj.steps.push_back(std::move(rec));
    bool finite = true;
    for (double xi : st.x) finite = finite && std::isfinite(xi);
    if (!finite) {
      traj.non_finite = true;
      traj.diagnostic =
          "iterate became non-finite after update " + std::to_string(s);
      break;
    }
  }
  traj.x_final = st.x;
  if (!traj.non_finite) {
    traj.grad_final = problem.grad(st.x);
    traj.f_final = problem.f(st.x);
  }
  return traj;
}

/// Residual of the momentum (heavy-ball) form of the logged update:
///   x_{s+1} = x_s - eta_s (1-beta1) g_s / b_s
///           + beta1 (eta_s b_{s-1}) / (eta_{s-1} b_s) (x_s - x_{s-1})
/// with x_0 = x_1 and the momentum term defined as zero at s = 1.
/// Returns |x_{s+1,i} - prediction|; valid for 1 <= s <= horizon - 1.
inline double rewrite_residual(const Trajectory& traj, long s, int i) {
  const long T = traj.horizon();
  if (s < 1 || s > T - 1)
    throw IndexOutOfRange("rewrite_residual: s out of range");
  if (i < 0 || i >= traj.hp.d)
    throw IndexOutOfRange("rewrite_residual: coordinate out of range");
  const StepRecord& cur = traj.steps[std::size_t(s - 1)];
  const StepRecord& next = traj.steps[std::size_t(s)];
  const double beta1 = traj.hp.beta1;
  const double x_s = cur.x[std::size_t(i)];
  const double x_next = next.x[std::size_t(i)];
  double pred = x_s - cur.eta * (1.0 - beta1) * cur.g[std::size_t(i)] /
                          cur.b[std::size_t(i)];
  if (s >= 2) {
    const StepRecord& prev = traj.steps[std::size_t(s - 2)];
    const double x_prev = prev.x[std::size_t(i)];
    pred += beta1 * (cur.eta * prev.b[std::size_t(i)]) /
            (prev.eta * cur.b[std::size_t(i)]) * (x_s - x_prev);
  }
  return std::abs(x_next - pred);
}

}  // namespace adamhp
