#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "core.hpp"
#include "problems.hpp"

namespace adamhp::analysis {

inline double linf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double l2sq(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

inline double l2(std::span<const double> v) { return std::sqrt(l2sq(v)); }

// --- trajectory gradient statistics ---------------------------------------

inline double avg_grad_sq(const Trajectory& t) {
  double acc = 0.0;
  for (const auto& rec : t.steps) acc += l2sq(rec.grad);
  return acc / double(t.horizon());
}

inline double min_grad_sq(const Trajectory& t) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& rec : t.steps) m = std::min(m, l2sq(rec.grad));
  return m;
}

// Includes the post-horizon iterate when the run finished cleanly.
inline double max_grad_sq(const Trajectory& t) {
  double m = 0.0;
  for (const auto& rec : t.steps) m = std::max(m, l2sq(rec.grad));
  if (!t.non_finite && !t.grad_final.empty())
    m = std::max(m, l2sq(t.grad_final));
  return m;
}

// --- log-sum bound for exponential averages --------------------------------
//
// For any reals alpha_1..alpha_t and 0 < beta1 < beta2 <= 1, with
// zeta_s = sum_j beta1^{s-j} alpha_j, theta_s = sum_j beta2^{s-j} alpha_j^2:
//   sum_s zeta_s^2 / (eps + theta_s)
//     <= [log(1 + theta_t/eps) - t log(beta2)] / ((1-beta1)(1-beta1/beta2))
// and the same with zeta_s replaced by zeta_s/(1-beta1^s) picks up another
// 1/(1-beta1) factor.

struct LogSumResult {
  double lhs1 = 0.0, rhs1 = 0.0;
  double lhs2 = 0.0, rhs2 = 0.0;
  bool ok = true;
};

inline LogSumResult log_sum_bound_check(std::span<const double> alpha,
                                        double beta1, double beta2,
                                        double eps) {
  if (!(beta1 > 0.0)) throw InvalidRange("beta1", "need beta1 > 0");
  if (!(beta1 < beta2) || !(beta2 <= 1.0))
    throw InvalidRange("beta2", "need beta1 < beta2 <= 1");
  if (!(eps > 0.0)) throw InvalidRange("eps", "need eps > 0");
  LogSumResult r;
  double zeta = 0.0, theta = 0.0, b1pow = 1.0;
  const long t = long(alpha.size());
  for (long s = 1; s <= t; ++s) {
    const double a = alpha[std::size_t(s - 1)];
    zeta = beta1 * zeta + a;
    theta = beta2 * theta + a * a;
    b1pow *= beta1;
    const double gamma = zeta / (1.0 - b1pow);
    r.lhs1 += zeta * zeta / (eps + theta);
    r.lhs2 += gamma * gamma / (eps + theta);
  }
  const double logterm =
      std::log1p(theta / eps) - double(t) * std::log(beta2);
  const double k = 1.0 - beta1 / beta2;
  r.rhs1 = logterm / ((1.0 - beta1) * k);
  r.rhs2 = logterm / ((1.0 - beta1) * (1.0 - beta1) * k);
  r.ok = leq_tol(r.lhs1, r.rhs1) && leq_tol(r.lhs2, r.rhs2);
  return r;
}

// --- momentum ratio and gradient growth ------------------------------------

// Bound on |m_{s-1,i}| / sqrt(v_{s-1,i}); reduces to 1/sqrt(1-beta2) at
// beta1 = 0. The ratio itself is defined as 0 when v_{s-1,i} = 0.
inline double momentum_ratio_bound(const Hyperparams& hp, long s) {
  return std::sqrt((1.0 - hp.beta1) *
                   (1.0 - std::pow(hp.beta1, double(s - 1))) /
                   ((1.0 - hp.beta2) * (1.0 - hp.beta1 / hp.beta2)));
}

inline double gradient_growth_slope(const Hyperparams& hp, double L) {
  return L * hp.C0 * std::sqrt(double(hp.d) / (1.0 - hp.beta1 / hp.beta2));
}

struct MomentumGrowthReport {
  CheckReport ratio{"momentum_ratio"};
  CheckReport growth{"gradient_growth"};
};

inline MomentumGrowthReport momentum_growth_check(const Trajectory& traj) {
  MomentumGrowthReport rep;
  const Hyperparams& hp = traj.hp;
  const double g1 = l2(traj.steps.front().grad);
  const double slope = gradient_growth_slope(hp, traj.L);
  for (long s = 1; s <= traj.horizon(); ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    const double bound = momentum_ratio_bound(hp, s);
    for (int i = 0; i < hp.d; ++i) {
      double ratio = 0.0;
      if (s >= 2) {
        const StepRecord& prev = traj.steps[std::size_t(s - 2)];
        if (prev.v[std::size_t(i)] > 0.0)
          ratio = std::abs(prev.m[std::size_t(i)]) /
                  std::sqrt(prev.v[std::size_t(i)]);
      }
      rep.ratio.add(s, i, ratio, bound);
    }
    rep.growth.add(s, -1, l2(rec.grad), g1 + slope * double(s));
  }
  return rep;
}

// --- gap between the gradient at x_s and at the momentum-extrapolated point

// M bounds L * beta1/(1-beta1) * |x_s - x_{s-1}| uniformly.
inline double aux_gap_constant(const Hyperparams& hp, double L) {
  return L * hp.C0 * hp.beta1 * std::sqrt(double(hp.d)) /
         ((1.0 - hp.beta1) * std::sqrt(1.0 - hp.beta1 / hp.beta2));
}

/// p_s = beta1/(1-beta1) (x_s - x_{s-1}), y_s = x_s + p_s, with x_0 = x_1.
struct AuxSequences {
  std::vector<Vec> p;
  std::vector<Vec> y;
};

inline AuxSequences make_aux(const Trajectory& traj) {
  AuxSequences aux;
  const double c = traj.hp.beta1 / (1.0 - traj.hp.beta1);
  const long T = traj.horizon();
  aux.p.reserve(std::size_t(T));
  aux.y.reserve(std::size_t(T));
  for (long s = 1; s <= T; ++s) {
    const Vec& xs = traj.steps[std::size_t(s - 1)].x;
    const Vec& xp = (s >= 2) ? traj.steps[std::size_t(s - 2)].x : xs;
    Vec p(xs.size()), y(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      p[i] = c * (xs[i] - xp[i]);
      y[i] = xs[i] + p[i];
    }
    aux.p.push_back(std::move(p));
    aux.y.push_back(std::move(y));
  }
  return aux;
}

inline CheckReport aux_gradient_gap_check(const Trajectory& traj,
                                          const Problem& problem) {
  CheckReport rep("aux_gradient_gap");
  const double M = aux_gap_constant(traj.hp, traj.L);
  const AuxSequences aux = make_aux(traj);
  for (long s = 1; s <= traj.horizon(); ++s) {
    const Vec gy = problem.grad(aux.y[std::size_t(s - 1)]);
    rep.add(s, -1, l2(traj.steps[std::size_t(s - 1)].grad), l2(gy) + M);
  }
  return rep;
}

// --- polynomial envelope for the adaptive log argument ---------------------

// F(t) = 1 + (2/eps^2) [ (max sigma0^2 + 2 (1 + max sigma1^2) ||grad_1||^2) t
//                        + 2 (1 + max sigma1^2) d L^2 C0^2 / (1 - beta1/beta2) t^3 ]
// dominates 1 + eps^{-2} sum_s beta2^{t-s} g_{s,i}^2 for every coordinate.
inline double grad_poly_envelope(const Hyperparams& hp, double L,
                                 double grad1_norm_sq,
                                 std::span<const double> sigma0,
                                 std::span<const double> sigma1, long t) {
  const double s0 = linf(sigma0);
  const double s1 = linf(sigma1);
  const double A = s0 * s0 + 2.0 * (1.0 + s1 * s1) * grad1_norm_sq;
  const double B = 2.0 * (1.0 + s1 * s1) * double(hp.d) * L * L * hp.C0 *
                   hp.C0 / (1.0 - hp.beta1 / hp.beta2);
  const double td = double(t);
  return 1.0 + (2.0 / (hp.eps * hp.eps)) * (A * td + B * td * td * td);
}

inline double grad_poly_envelope(const Hyperparams& hp, const Problem& problem,
                                 const NoiseModel& noise, long t) {
  return grad_poly_envelope(hp, problem.L, l2sq(problem.grad(problem.x1)),
                            noise.sigma0, noise.sigma1, t);
}

inline CheckReport envelope_domination_check(const Trajectory& traj) {
  CheckReport rep("envelope_domination");
  const Hyperparams& hp = traj.hp;
  const double g1sq = l2sq(traj.steps.front().grad);
  Vec acc(std::size_t(hp.d), 0.0);
  for (long t = 1; t <= traj.horizon(); ++t) {
    const StepRecord& rec = traj.steps[std::size_t(t - 1)];
    const double env =
        grad_poly_envelope(hp, traj.L, g1sq, traj.sigma0, traj.sigma1, t);
    for (int i = 0; i < hp.d; ++i) {
      const double g = rec.g[std::size_t(i)];
      acc[std::size_t(i)] = hp.beta2 * acc[std::size_t(i)] + g * g;
      rep.add(t, i, 1.0 + acc[std::size_t(i)] / (hp.eps * hp.eps), env);
    }
  }
  return rep;
}

// --- four adaptive summation bounds -----------------------------------------
//
// All four prefix sums share the log factor log(F_T) - T log(beta2),
// evaluated in log space so beta2^T never underflows.

struct AdaptiveSumsReport {
  CheckReport grad{"adaptive_sum_grad"};
  CheckReport momentum{"adaptive_sum_momentum"};
  CheckReport momentum_shifted{"adaptive_sum_momentum_shifted"};
  CheckReport debiased{"adaptive_sum_debiased"};
};

inline AdaptiveSumsReport adaptive_sum_bounds_check(const Trajectory& traj,
                                                    double F_T) {
  AdaptiveSumsReport rep;
  const Hyperparams& hp = traj.hp;
  const double logterm =
      std::log(F_T) - double(hp.T) * std::log(hp.beta2);
  const double k = 1.0 - hp.beta1 / hp.beta2;
  const double d = double(hp.d);
  const double r1 = d / (1.0 - hp.beta2) * logterm;
  const double r2 = d * (1.0 - hp.beta1) / ((1.0 - hp.beta2) * k) * logterm;
  const double r3 = r2 / hp.beta2;
  const double r4 = d / ((1.0 - hp.beta2) * k) * logterm;

  double sum1 = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
  for (long t = 1; t <= traj.horizon(); ++t) {
    const StepRecord& rec = traj.steps[std::size_t(t - 1)];
    for (int i = 0; i < hp.d; ++i) {
      const double q = rec.g[std::size_t(i)] / rec.b[std::size_t(i)];
      sum1 += q * q;
    }
    rep.grad.add(t, -1, sum1, r1);
    if (t >= 2) {
      const StepRecord& prev = traj.steps[std::size_t(t - 2)];
      const double debias = 1.0 - std::pow(hp.beta1, double(t - 1));
      for (int i = 0; i < hp.d; ++i) {
        const double m = prev.m[std::size_t(i)];
        const double w = m / prev.b[std::size_t(i)];
        const double ws = m / rec.b[std::size_t(i)];
        const double wh = (m / debias) / prev.b[std::size_t(i)];
        sum2 += w * w;
        sum3 += ws * ws;
        sum4 += wh * wh;
      }
      rep.momentum.add(t, -1, sum2, r2);
      rep.momentum_shifted.add(t, -1, sum3, r3);
      rep.debiased.add(t, -1, sum4, r4);
    }
  }
  return rep;
}

// --- proxy step size --------------------------------------------------------
//
// a_{s,i} replaces the realized gradient in b_{s,i} by its certified
// conditional envelope; it is measurable at the start of step s.

struct ProxySequence {
  std::vector<Vec> v_tilde;
  std::vector<Vec> a;
};

inline ProxySequence make_proxy(const Trajectory& traj) {
  ProxySequence px;
  const Hyperparams& hp = traj.hp;
  const long T = traj.horizon();
  px.v_tilde.reserve(std::size_t(T));
  px.a.reserve(std::size_t(T));
  const Vec zeros(std::size_t(hp.d), 0.0);
  for (long s = 1; s <= T; ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    const Vec& vprev = (s >= 2) ? traj.steps[std::size_t(s - 2)].v : zeros;
    Vec vt(std::size_t(hp.d)), a(std::size_t(hp.d));
    for (int i = 0; i < hp.d; ++i) {
      const double gb = rec.grad[std::size_t(i)];
      const double s0 = traj.sigma0[std::size_t(i)];
      const double s1 = traj.sigma1[std::size_t(i)];
      vt[std::size_t(i)] = hp.beta2 * vprev[std::size_t(i)] +
                           (1.0 - hp.beta2) *
                               (s0 * s0 + (1.0 + s1 * s1) * (gb * gb));
      a[std::size_t(i)] = std::sqrt(vt[std::size_t(i)]) + rec.eps;
    }
    px.v_tilde.push_back(std::move(vt));
    px.a.push_back(std::move(a));
  }
  return px;
}

struct ProxyGapReport {
  CheckReport current{"proxy_gap_current"};
  CheckReport previous{"proxy_gap_previous"};
};

inline ProxyGapReport proxy_gap_check(const Trajectory& traj) {
  ProxyGapReport rep;
  const Hyperparams& hp = traj.hp;
  const ProxySequence px = make_proxy(traj);
  const double root = std::sqrt(1.0 - hp.beta2);
  for (long s = 1; s <= traj.horizon(); ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    for (int i = 0; i < hp.d; ++i) {
      const double a = px.a[std::size_t(s - 1)][std::size_t(i)];
      const double b = rec.b[std::size_t(i)];
      const double gb = rec.grad[std::size_t(i)];
      const double s0 = traj.sigma0[std::size_t(i)];
      const double s1 = traj.sigma1[std::size_t(i)];
      rep.current.add(s, i, std::abs(1.0 / a - 1.0 / b),
                      2.0 * root * std::sqrt(s0 * s0 + s1 * s1 * gb * gb) /
                          (a * b));
      if (s >= 2) {
        const StepRecord& prev = traj.steps[std::size_t(s - 2)];
        const double bp = prev.b[std::size_t(i)];
        const double vp = prev.v[std::size_t(i)];
        const double envelope =
            std::sqrt(s0 * s0 + (1.0 + s1 * s1) * gb * gb) + hp.eps;
        const double carried = std::sqrt(vp) + hp.eps;
        rep.previous.add(
            s, i, std::abs(1.0 / a - 1.0 / bp),
            root * std::max(envelope, carried) / (bp * a));
      }
    }
  }
  return rep;
}

inline CheckReport proxy_lower_bound_check(const Trajectory& traj) {
  CheckReport rep("proxy_lower_bounds");
  const Hyperparams& hp = traj.hp;
  const ProxySequence px = make_proxy(traj);
  for (long s = 1; s <= traj.horizon(); ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    for (int i = 0; i < hp.d; ++i) {
      const double a = px.a[std::size_t(s - 1)][std::size_t(i)];
      const double gb = rec.grad[std::size_t(i)];
      const double s0 = traj.sigma0[std::size_t(i)];
      const double s1 = traj.sigma1[std::size_t(i)];
      rep.add(s, i, rec.eps, a);
      rep.add(s, i,
              std::sqrt((1.0 - hp.beta2) * (s0 * s0 + s1 * s1 * gb * gb)), a);
      const double vp =
          (s >= 2) ? traj.steps[std::size_t(s - 2)].v[std::size_t(i)] : 0.0;
      rep.add(s, i,
              std::sqrt(hp.beta2 * (1.0 - hp.beta2)) *
                  (std::sqrt(vp) + hp.eps),
              a);
    }
  }
  return rep;
}

// --- step-size ratio bounds -------------------------------------------------

// max deviation of eta_s b_{s-1,i} / (eta_{s-1} b_{s,i}) from 1
inline double step_ratio_max(double beta2) {
  return std::max(1.0, std::sqrt((1.0 + beta2) / beta2) - 1.0);
}

inline CheckReport step_ratio_check(const Trajectory& traj) {
  CheckReport rep("step_ratio");
  const double bound = step_ratio_max(traj.hp.beta2);
  for (long s = 2; s <= traj.horizon(); ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    const StepRecord& prev = traj.steps[std::size_t(s - 2)];
    for (int i = 0; i < traj.hp.d; ++i) {
      const double ratio = rec.eta * prev.b[std::size_t(i)] /
                           (prev.eta * rec.b[std::size_t(i)]);
      rep.add(s, i, std::abs(ratio - 1.0), bound);
    }
  }
  return rep;
}

inline CheckReport denom_ratio_check(const Trajectory& traj) {
  CheckReport rep("denominator_ratio");
  const double bound = 1.0 / std::sqrt(traj.hp.beta2);
  for (long s = 2; s <= traj.horizon(); ++s) {
    const StepRecord& rec = traj.steps[std::size_t(s - 1)];
    const StepRecord& prev = traj.steps[std::size_t(s - 2)];
    for (int i = 0; i < traj.hp.d; ++i)
      rep.add(s, i, prev.b[std::size_t(i)] / rec.b[std::size_t(i)], bound);
  }
  return rep;
}

// --- horizon log bound ------------------------------------------------------

struct HorizonLogResult {
  double value = 0.0;
  bool ok = true;
};

// T log(1/(1 - 1/T)) <= 2 for every T >= 2.
inline HorizonLogResult horizon_log_check(long T) {
  if (T < 2) throw InvalidRange("T", "need T >= 2");
  HorizonLogResult r;
  r.value = -double(T) * std::log1p(-1.0 / double(T));
  r.ok = leq_tol(r.value, 2.0);
  return r;
}

// --- noise levels -----------------------------------------------------------

// Per-step conditional level; note the l2 norm on sigma1 here, while the
// uniform constant below (the one consumed by the closed-form bound) takes
// the max norm.
inline double noise_level_step(std::span<const double> sigma0,
                               std::span<const double> sigma1,
                               std::span<const double> grad) {
  const double gmax = linf(grad);
  return std::sqrt(linf(sigma0) * linf(sigma0) + l2sq(sigma1) * gmax * gmax);
}

inline double noise_level_uniform(std::span<const double> sigma0,
                                  std::span<const double> sigma1, double G) {
  const double s1 = linf(sigma1);
  return std::sqrt(linf(sigma0) * linf(sigma0) + s1 * s1 * G);
}

// --- closed-form high-probability constants ---------------------------------

struct BoundConstants {
  double sigma_max = 0.0;
  double F_T = 0.0;
  double log_term = 0.0;  // log(F_T) - T log(beta2)
  double log_dT_delta = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double d1 = 0.0, d2 = 0.0;
  double e = 0.0, f = 0.0;
  double M = 0.0;
  double G = 0.0;          // holds ||grad f(x_t)||^2 <= G for all t <= T+1
  double G_relaxed = 0.0;  // log_term replaced by log(F_T) + 2
  double noise_uniform = 0.0;
  double avg_bound_adam = 0.0;
  double avg_bound_variant = 0.0;
};

inline BoundConstants evaluate_G(const Hyperparams& hp, double L,
                                 double f_gap, double grad1_norm_sq,
                                 std::span<const double> sigma0,
                                 std::span<const double> sigma1,
                                 double delta) {
  if (auto issue = validate(hp))
    throw InvalidRange(issue->field, issue->message);
  if (!(delta > 0.0) || !(delta < 1.0))
    throw InvalidRange("delta", "need delta in (0, 1)");
  BoundConstants bc;
  const double b1 = hp.beta1, b2 = hp.beta2;
  const double om = 1.0 - b1;        // 1 - beta1
  const double k = 1.0 - b1 / b2;    // 1 - beta1/beta2
  const double s0 = linf(sigma0);
  const double s1 = linf(sigma1);
  const double s0_l2sq = l2sq(sigma0);
  const double d = double(hp.d);
  const double T = double(hp.T);
  const double C0 = hp.C0;

  bc.sigma_max = step_ratio_max(b2);
  bc.F_T = grad_poly_envelope(hp, L, grad1_norm_sq, sigma0, sigma1, hp.T);
  bc.log_term = std::log(bc.F_T) - T * std::log(b2);
  bc.log_dT_delta = std::log(d * T / delta);

  bc.c1 = 4.0 * s0 * hp.eta * b1 * b1 * std::sqrt(1.0 - b2) / (om * om * om);
  bc.c2 = 4.0 * s1 * hp.eta * b1 * b1 * std::sqrt(1.0 - b2) / (om * om * om);
  bc.d1 = hp.eta * b1 * b1 * std::sqrt(1.0 - b2) *
          (hp.eps0 + std::sqrt(2.0) * s0) / (om * om * om * std::sqrt(b2));
  bc.d2 = hp.eta * b1 * b1 *
          std::sqrt(2.0 * (1.0 - b2) * (1.0 + s1 * s1)) /
          (om * om * om * std::sqrt(b2));
  bc.e = d * hp.eta * b1 / std::sqrt(om * om * om * (1.0 - b2) * k);
  bc.f = d * hp.eta * b1 / (om * std::sqrt((1.0 - b2) * k));
  bc.M = aux_gap_constant(hp, L);

  const auto assemble = [&](double logterm) {
    const double sm = bc.sigma_max;
    double G = 8.0 * L * f_gap;
    G += 256.0 * L * L * C0 * C0 * b1 * b1 * d * d / (om * om * om * k);
    G += 4.0 * L * L * C0 * C0 * b1 * b1 * d / (om * om * k);
    G += 48.0 * L * C0 * s0 * d * bc.log_dT_delta / om;
    G += 8.0 * L * C0 * b1 * b1 / (om * om * k) *
         (4.0 * s0 / b2 + (hp.eps0 + std::sqrt(2.0) * s0) / std::sqrt(b2) +
          0.5 * L * C0 * (1.0 + 4.0 * sm * sm)) *
         d * logterm;
    G += 8.0 *
         (3.0 * L * L * C0 * C0 / (om * om) + 8.0 * L * s0 * C0 / om) * d *
         logterm;
    G += 2304.0 * L * L * C0 * C0 * s1 * s1 * d * d * bc.log_dT_delta *
         bc.log_dT_delta / (om * om);
    G += 256.0 *
         (16.0 * L * L * C0 * C0 * s1 * s1 / (om * om) +
          9.0 * L * L * C0 * C0 * b1 * b1 * b1 * b1 * (1.0 + s1 * s1) /
              (b2 * b2 * om * om * om * om * k * k)) *
         d * d * logterm * logterm;
    return G;
  };
  bc.G = assemble(bc.log_term);
  bc.G_relaxed = assemble(std::log(bc.F_T) + 2.0);
  bc.noise_uniform = noise_level_uniform(sigma0, sigma1, bc.G);

  bc.avg_bound_adam =
      bc.G / T *
      (hp.eps0 / (L * C0) +
       std::sqrt(2.0) * std::sqrt(s0_l2sq + (1.0 + s1 * s1) * bc.G) /
           (L * C0 * std::sqrt(1.0 - b2)));
  bc.avg_bound_variant =
      2.0 / T *
          (bc.G * hp.eps0 / (L * C0) +
           bc.G * bc.G * (1.0 + s1 * s1) / (L * L * C0 * C0)) +
      2.0 * std::sqrt(2.0) * bc.G * std::sqrt(s0_l2sq) /
          (L * C0 * std::sqrt(T));
  return bc;
}

inline BoundConstants evaluate_G(const Hyperparams& hp, const Problem& problem,
                                 const NoiseModel& noise, double delta) {
  const Vec g1 = problem.grad(problem.x1);
  return evaluate_G(hp, problem.L, problem.f(problem.x1) - problem.f_star,
                    l2sq(g1), noise.sigma0, noise.sigma1, delta);
}

// --- uniform gradient bound along a trajectory ------------------------------

struct GradientBoundReport {
  CheckReport rows{"gradient_bound"};
  double min_margin = std::numeric_limits<double>::infinity();
};

inline GradientBoundReport gradient_bound_check(const Trajectory& traj,
                                                double G) {
  GradientBoundReport rep;
  for (long t = 1; t <= traj.horizon(); ++t) {
    const double sq = l2sq(traj.steps[std::size_t(t - 1)].grad);
    rep.rows.add(t, -1, sq, G);
    rep.min_margin = std::min(rep.min_margin, G - sq);
  }
  if (!traj.non_finite && !traj.grad_final.empty()) {
    const double sq = l2sq(traj.grad_final);
    rep.rows.add(traj.horizon() + 1, -1, sq, G);
    rep.min_margin = std::min(rep.min_margin, G - sq);
  }
  return rep;
}

}  // namespace adamhp::analysis
