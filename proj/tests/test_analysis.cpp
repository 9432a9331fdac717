#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "adamhp/analysis.hpp"
#include "adamhp/optimizer.hpp"

using namespace adamhp;
using namespace adamhp::analysis;
using Catch::Approx;

namespace {

// minimal hand-built trajectory: only the fields a given check reads
Trajectory tiny_trajectory() {
  Trajectory t;
  t.hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 3, 1);
  t.steps.resize(3);
  t.steps[0].grad = {2.0};
  t.steps[1].grad = {1.0};
  t.steps[2].grad = {-3.0};
  t.grad_final = {0.5};
  return t;
}

}  // namespace

TEST_CASE("norm helpers") {
  CHECK(linf(Vec{-3.0, 2.0}) == 3.0);
  CHECK(l2sq(Vec{3.0, 4.0}) == 25.0);
  CHECK(l2(Vec{3.0, 4.0}) == 5.0);
  CHECK(linf(Vec{}) == 0.0);
}

TEST_CASE("trajectory gradient statistics") {
  const Trajectory t = tiny_trajectory();
  CHECK(avg_grad_sq(t) == Approx((4.0 + 1.0 + 9.0) / 3.0).epsilon(1e-15));
  CHECK(min_grad_sq(t) == 1.0);
  CHECK(max_grad_sq(t) == 9.0);

  Trajectory big_final = t;
  big_final.grad_final = {4.0};
  CHECK(max_grad_sq(big_final) == 16.0);  // clean run counts the final point
  big_final.non_finite = true;
  CHECK(max_grad_sq(big_final) == 9.0);   // aborted run does not
}

TEST_CASE("log-sum bound matches its hand-built examples") {
  const auto one = log_sum_bound_check(Vec{1.0}, 0.5, 0.9, 1.0);
  CHECK(one.lhs1 == Approx(0.5).epsilon(1e-15));
  CHECK(one.rhs1 == Approx(3.593284632979972).epsilon(1e-12));
  CHECK(one.lhs2 == Approx(2.0).epsilon(1e-15));
  CHECK(one.rhs2 == Approx(7.186569265959944).epsilon(1e-12));
  CHECK(one.ok);

  const auto three = log_sum_bound_check(Vec{1.0, 0.0, 0.0}, 0.5, 0.9, 1.0);
  CHECK(three.lhs1 == Approx(0.6661093341087525).epsilon(1e-12));
  CHECK(three.rhs1 == Approx(4.09233776513046).epsilon(1e-12));
  CHECK(three.lhs2 == Approx(2.279019041948465).epsilon(1e-12));
  CHECK(three.rhs2 == Approx(8.18467553026092).epsilon(1e-12));
  CHECK(three.ok);

  CHECK_THROWS_AS(log_sum_bound_check(Vec{1.0}, 0.0, 0.9, 1.0), InvalidRange);
  CHECK_THROWS_AS(log_sum_bound_check(Vec{1.0}, 0.9, 0.5, 1.0), InvalidRange);
  CHECK_THROWS_AS(log_sum_bound_check(Vec{1.0}, 0.5, 0.9, 0.0), InvalidRange);
  // beta2 = 1 is inside the admissible range here
  CHECK(log_sum_bound_check(Vec{1.0, -1.0}, 0.5, 1.0, 0.5).ok);
}

TEST_CASE("momentum ratio bound frozen values") {
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 10, 1);
  CHECK(momentum_ratio_bound(hp, 1) == 0.0);  // no completed update yet
  CHECK(momentum_ratio_bound(hp, 2) ==
        Approx(10.045351706590013).epsilon(1e-12));
  CHECK(momentum_ratio_bound(hp, 1000000) ==
        Approx(31.76619129028391).epsilon(1e-12));

  const Hyperparams flat = make_hyperparams(0.0, 0.99, 1.0, 1.0, 10, 1);
  CHECK(momentum_ratio_bound(flat, 5) == Approx(10.0).epsilon(1e-12));
}

TEST_CASE("gradient growth slope frozen value") {
  const Hyperparams hp = make_hyperparams(0.5, 0.9, 1.0, 1.0, 10, 3);
  // 2 sqrt(3 / (1 - 5/9)) = 3 sqrt(3)
  CHECK(gradient_growth_slope(hp, 2.0) ==
        Approx(5.196152422706632).epsilon(1e-12));
}

TEST_CASE("momentum extrapolation gap constant") {
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 10, 4);
  CHECK(aux_gap_constant(hp, 1.0) == Approx(57.17914432251103).epsilon(1e-12));
  const Hyperparams flat = make_hyperparams(0.0, 0.999, 1.0, 1.0, 10, 4);
  CHECK(aux_gap_constant(flat, 1.0) == 0.0);
}

TEST_CASE("aux sequences extrapolate the previous displacement") {
  Trajectory t;
  t.hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 3, 1);
  t.steps.resize(3);
  t.steps[0].x = {0.0};
  t.steps[1].x = {1.0};
  t.steps[2].x = {3.0};
  const AuxSequences aux = make_aux(t);
  CHECK(aux.p[0][0] == 0.0);  // x_0 = x_1 convention
  CHECK(aux.y[0][0] == 0.0);
  CHECK(aux.p[1][0] == Approx(9.0).epsilon(1e-12));
  CHECK(aux.y[1][0] == Approx(10.0).epsilon(1e-12));
  CHECK(aux.p[2][0] == Approx(18.0).epsilon(1e-12));
  CHECK(aux.y[2][0] == Approx(21.0).epsilon(1e-12));
}

TEST_CASE("polynomial envelope frozen values") {
  // beta1 = 0, beta2 = 0.75, eps0 = 2 make eps = 1 exactly
  const Hyperparams hp = make_hyperparams(0.0, 0.75, 1.0, 2.0, 10, 1);
  REQUIRE(hp.eps == 1.0);
  const Vec s0{1.0}, s1{0.0};
  CHECK(grad_poly_envelope(hp, 1.0, 1.0, s0, s1, 1) ==
        Approx(11.0).epsilon(1e-12));
  CHECK(grad_poly_envelope(hp, 1.0, 1.0, s0, s1, 2) ==
        Approx(45.0).epsilon(1e-12));
}

TEST_CASE("per-trajectory inequality checks hold on live runs") {
  const Problem p = quadratic({1.0, 2.0, 4.0});
  const NoiseModel noise = noise_sparsify(3);
  for (double b1 : {0.0, 0.9}) {
    const Hyperparams hp = make_hyperparams(b1, 0.99, 1.0, 1.0, 150, 3);
    const Trajectory t = run(p, noise, hp, Algorithm::adam, 21);
    REQUIRE_FALSE(t.non_finite);

    const MomentumGrowthReport mg = momentum_growth_check(t);
    CHECK(mg.ratio.pass());
    CHECK(mg.growth.pass());

    CHECK(aux_gradient_gap_check(t, p).pass());
    CHECK(envelope_domination_check(t).pass());

    const double F_T = grad_poly_envelope(hp, p, noise, hp.T);
    const AdaptiveSumsReport sums = adaptive_sum_bounds_check(t, F_T);
    CHECK(sums.grad.pass());
    CHECK(sums.momentum.pass());
    CHECK(sums.momentum_shifted.pass());
    CHECK(sums.debiased.pass());

    const ProxyGapReport gaps = proxy_gap_check(t);
    CHECK(gaps.current.pass());
    CHECK(gaps.previous.pass());
    CHECK(proxy_lower_bound_check(t).pass());
    CHECK(step_ratio_check(t).pass());
    CHECK(denom_ratio_check(t).pass());
  }
}

TEST_CASE("noiseless proxy reproduces the realized denominator bitwise") {
  const Problem p = quadratic({1.0, 4.0});
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 60, 2);
  const Trajectory t = run(p, noise_none(2), hp, Algorithm::adam, 3);
  const ProxySequence px = make_proxy(t);
  for (long s = 0; s < t.horizon(); ++s)
    for (int i = 0; i < 2; ++i) {
      REQUIRE(px.v_tilde[std::size_t(s)][std::size_t(i)] ==
              t.steps[std::size_t(s)].v[std::size_t(i)]);
      REQUIRE(px.a[std::size_t(s)][std::size_t(i)] ==
              t.steps[std::size_t(s)].b[std::size_t(i)]);
    }
}

TEST_CASE("step ratio ceiling frozen values") {
  CHECK(step_ratio_max(0.999) == 1.0);
  CHECK(step_ratio_max(0.1) == Approx(2.3166247903554).epsilon(1e-12));
}

TEST_CASE("horizon log stays under two") {
  const HorizonLogResult two = horizon_log_check(2);
  CHECK(two.value == Approx(1.3862943611198906).epsilon(1e-12));
  CHECK(two.ok);
  CHECK(horizon_log_check(1000000).ok);
  CHECK(horizon_log_check(1000000).value > 1.0);
  CHECK_THROWS_AS(horizon_log_check(1), InvalidRange);
}

TEST_CASE("noise level summaries") {
  const Vec s0{1.0, 2.0}, s1{3.0, 4.0}, grad{1.0, -2.0};
  CHECK(noise_level_step(s0, s1, grad) ==
        Approx(std::sqrt(4.0 + 25.0 * 4.0)).epsilon(1e-12));
  CHECK(noise_level_uniform(s0, s1, 9.0) ==
        Approx(std::sqrt(4.0 + 16.0 * 9.0)).epsilon(1e-12));
}

TEST_CASE("closed-form constants collapse at beta1 = 0") {
  const Hyperparams hp = make_hyperparams(0.0, 0.9, 1.5, 0.7, 50, 1);
  const double L = 2.0, f_gap = 3.0, g1sq = 5.0, delta = 0.1;
  const Vec s0{0.3}, s1{0.2};
  const BoundConstants bc = evaluate_G(hp, L, f_gap, g1sq, s0, s1, delta);

  CHECK(bc.c1 == 0.0);
  CHECK(bc.c2 == 0.0);
  CHECK(bc.d1 == 0.0);
  CHECK(bc.d2 == 0.0);
  CHECK(bc.e == 0.0);
  CHECK(bc.f == 0.0);
  CHECK(bc.M == 0.0);

  // independent reduced formula: only the beta1-free summands survive
  const double C0 = hp.C0;
  const double logdT = std::log(1.0 * 50.0 / delta);
  const double F = grad_poly_envelope(hp, L, g1sq, s0, s1, 50);
  const double logterm = std::log(F) - 50.0 * std::log(0.9);
  double expect = 8.0 * L * f_gap;
  expect += 48.0 * L * C0 * 0.3 * logdT;
  expect += 8.0 * (3.0 * L * L * C0 * C0 + 8.0 * L * 0.3 * C0) * logterm;
  expect += 2304.0 * L * L * C0 * C0 * 0.04 * logdT * logdT;
  expect += 256.0 * 16.0 * L * L * C0 * C0 * 0.04 * logterm * logterm;
  CHECK(bc.G == Approx(expect).epsilon(1e-12));
  CHECK(bc.log_term == Approx(logterm).epsilon(1e-12));
}

TEST_CASE("relaxed log factor orders against the exact one") {
  const Problem p = quadratic_uniform(2);
  const NoiseModel noise = noise_sparsify(2);
  // -T log beta2 far above 2: exact factor dominates
  const Hyperparams strong = make_hyperparams(0.5, 0.9, 1.0, 1.0, 50, 2);
  const BoundConstants a = evaluate_G(strong, p, noise, 0.1);
  CHECK(a.G > a.G_relaxed);
  // beta2 = 1 - 1/T: -T log beta2 just above 1, relaxed factor dominates
  const Hyperparams weak = make_hyperparams(0.9, 1.0 - 1.0 / 50.0, 1.0, 1.0, 50, 2);
  const BoundConstants b = evaluate_G(weak, p, noise, 0.1);
  CHECK(b.G < b.G_relaxed);
}

TEST_CASE("bound constants stay pinned for a reference setup") {
  // regression pin, not an independent derivation: these track the value
  // the formulas produced when the suite was frozen
  const Problem p = quadratic_uniform(2);
  const NoiseModel noise = noise_sparsify(2);
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 1000, 2);
  const BoundConstants bc = evaluate_G(hp, p, noise, 0.1);
  CHECK(bc.F_T == Approx(161454561454546.38).epsilon(1e-9));
  CHECK(bc.log_term == Approx(33.715745199364925).epsilon(1e-9));
  CHECK(bc.G == Approx(14028085711637.105).epsilon(1e-9));
  CHECK(bc.G_relaxed == Approx(14872130081096.373).epsilon(1e-9));
  CHECK(bc.avg_bound_adam == Approx(3.3229791295201777e+18).epsilon(1e-9));
  CHECK(bc.avg_bound_variant == Approx(7.8714875493217654e+23).epsilon(1e-9));
  CHECK(bc.M == Approx(40.431760692891849).epsilon(1e-9));
  CHECK(bc.sigma_max == 1.0);
}

TEST_CASE("tightening delta enlarges the constant") {
  const Problem p = quadratic_uniform(2);
  const NoiseModel noise = noise_sparsify(2);
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 1000, 2);
  const BoundConstants loose = evaluate_G(hp, p, noise, 0.1);
  const BoundConstants tight = evaluate_G(hp, p, noise, 0.01);
  CHECK(tight.G > loose.G);
  CHECK(loose.G > 0.0);
  CHECK(loose.avg_bound_adam > 0.0);
  CHECK(loose.avg_bound_variant > 0.0);
  CHECK_THROWS_AS(evaluate_G(hp, p, noise, 0.0), InvalidRange);
  CHECK_THROWS_AS(evaluate_G(hp, p, noise, 1.0), InvalidRange);
}

TEST_CASE("uniform gradient bound consumes whole trajectories") {
  const Problem p = quadratic({1.0, 2.0, 4.0});
  const NoiseModel noise = noise_sparsify(3);
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 100, 3);
  const Trajectory t = run(p, noise, hp, Algorithm::adam, 8);
  const BoundConstants bc = evaluate_G(hp, p, noise, 0.1);

  const GradientBoundReport rep = gradient_bound_check(t, bc.G);
  CHECK(rep.rows.checked == 101);  // horizon plus the final point
  CHECK(rep.rows.pass());
  CHECK(rep.min_margin > 0.0);

  // a deliberately absurd G must be caught, not absorbed
  const GradientBoundReport bad = gradient_bound_check(t, 1e-6);
  CHECK_FALSE(bad.rows.pass());
}
