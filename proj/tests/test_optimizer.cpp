#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <memory>

#include "adamhp/optimizer.hpp"

using namespace adamhp;
using Catch::Approx;

namespace {

// run() evaluates the gradient twice per step (once for the record, once
// for the oracle draw), so the counter trips at the start of step
// good_steps + 1.
Problem nan_after(int good_steps) {
  Problem p;
  p.id = "synthetic:nan";
  p.dim = 1;
  p.L = 1.0;
  p.f_star = 0.0;
  p.x1 = {1.0};
  auto counter = std::make_shared<int>(0);
  p.f = [](std::span<const double> x) { return 0.5 * x[0] * x[0]; };
  p.grad = [counter, good_steps](std::span<const double> x) {
    if (++*counter > 2 * good_steps)
      return Vec{std::numeric_limits<double>::quiet_NaN()};
    return Vec{x[0]};
  };
  return p;
}

}  // namespace

TEST_CASE("one update matches the closed form") {
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 10, 1);
  const OptimizerState st = init_state({0.0});
  const Vec g{2.0};

  StepRecordDelta delta;
  const OptimizerState out = adam_step(st, g, hp, &delta);
  CHECK(out.m[0] == Approx(0.2).epsilon(1e-15));
  CHECK(out.v[0] == Approx(0.004).epsilon(1e-15));
  // eta_1 = 0.001/0.1, b = 2 sqrt(0.001) + 0.001
  CHECK(out.x[0] == Approx(-0.03113055924149417).epsilon(1e-14));
  CHECK(delta.b[0] == Approx(std::sqrt(0.004) + 0.001).epsilon(1e-15));
  CHECK(delta.dx[0] == Approx(out.x[0]).epsilon(1e-15));
  CHECK(out.s == 2);
  CHECK(out.x_prev[0] == 0.0);

  // variant: (eta/0.1) * 0.2 / (2 sqrt(0.001) + sqrt(0.001)) = 2/3
  const OptimizerState vout = variant_step(st, g, hp);
  CHECK(vout.x[0] == Approx(-2.0 / 3.0).epsilon(1e-14));
  CHECK(vout.m[0] == out.m[0]);
  CHECK(vout.v[0] == out.v[0]);
}

TEST_CASE("folded and textbook updates coincide") {
  Rng rng(404);
  for (int trial = 0; trial < 2000; ++trial) {
    const double b1 = rng.uniform(0.0, 0.98);
    const double b2 = rng.uniform(b1 + 0.005, 0.99995);
    if (!(b1 < b2 && b2 < 1.0)) continue;
    const Hyperparams hp = make_hyperparams(
        b1, b2, std::pow(10.0, rng.uniform(-2.0, 1.0)),
        std::pow(10.0, rng.uniform(-4.0, 0.0)), 10, 3);
    OptimizerState st = init_state({rng.uniform(-5.0, 5.0),
                                    rng.uniform(-5.0, 5.0),
                                    rng.uniform(-5.0, 5.0)});
    st.s = 1 + long(rng.index(50));
    for (int i = 0; i < 3; ++i) {
      st.m[std::size_t(i)] = rng.uniform(-3.0, 3.0);
      st.v[std::size_t(i)] = rng.uniform(0.0, 9.0);
    }
    const Vec g{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                rng.uniform(-10.0, 10.0)};
    const OptimizerState a = adam_step(st, g, hp);
    const OptimizerState c = canonical_step(st, g, hp);
    for (int i = 0; i < 3; ++i) {
      REQUIRE(std::abs(a.x[std::size_t(i)] - c.x[std::size_t(i)]) <=
              1e-12 * (1.0 + std::abs(c.x[std::size_t(i)])));
      REQUIRE(a.m[std::size_t(i)] == c.m[std::size_t(i)]);
      REQUIRE(a.v[std::size_t(i)] == c.v[std::size_t(i)]);
    }
  }
}

TEST_CASE("bad gradients are rejected before touching state") {
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 10, 2);
  const OptimizerState st = init_state({0.0, 0.0});
  CHECK_THROWS_AS(
      adam_step(st, Vec{1.0, std::numeric_limits<double>::infinity()}, hp),
      NonFiniteInput);
  CHECK_THROWS_AS(
      variant_step(st, Vec{std::numeric_limits<double>::quiet_NaN(), 0.0}, hp),
      NonFiniteInput);
  CHECK_THROWS_AS(adam_step(st, Vec{1.0}, hp), InvalidRange);
}

TEST_CASE("runs are bit-identical across repeats") {
  const Problem p = quadratic({1.0, 4.0});
  const NoiseModel noise = noise_sparsify(2);
  const Hyperparams hp = make_hyperparams(0.9, 0.99, 1.0, 1.0, 50, 2);
  for (Algorithm alg : {Algorithm::adam, Algorithm::variant}) {
    const Trajectory t1 = run(p, noise, hp, alg, 12345);
    const Trajectory t2 = run(p, noise, hp, alg, 12345);
    REQUIRE(t1.horizon() == 50);
    REQUIRE(t2.horizon() == 50);
    for (long s = 0; s < 50; ++s) {
      REQUIRE(t1.steps[std::size_t(s)].x == t2.steps[std::size_t(s)].x);
      REQUIRE(t1.steps[std::size_t(s)].g == t2.steps[std::size_t(s)].g);
      REQUIRE(t1.steps[std::size_t(s)].v == t2.steps[std::size_t(s)].v);
    }
    REQUIRE(t1.x_final == t2.x_final);
    const Trajectory t3 = run(p, noise, hp, alg, 54321);
    CHECK(t1.x_final != t3.x_final);
  }
}

TEST_CASE("a one-step horizon is a valid run") {
  const Problem p = quadratic_uniform(3);
  const Hyperparams hp = make_hyperparams(0.5, 0.9, 1.0, 1.0, 1, 3);
  const Trajectory t = run(p, noise_none(3), hp, Algorithm::adam, 1);
  REQUIRE(t.horizon() == 1);
  CHECK_FALSE(t.non_finite);
  CHECK(t.grad_final.size() == 3);
  CHECK(std::isfinite(t.f_final));
  CHECK(t.steps[0].x == p.x1);
}

TEST_CASE("a non-finite gradient stops the run and leaves a diagnostic") {
  const Problem p = nan_after(3);
  const Hyperparams hp = make_hyperparams(0.9, 0.999, 1.0, 1.0, 10, 1);
  const Trajectory t = run(p, noise_none(1), hp, Algorithm::adam, 1);
  CHECK(t.non_finite);
  CHECK(t.horizon() == 3);
  CHECK(t.diagnostic.find("update 4") != std::string::npos);
  CHECK(t.x_final.size() == 1);
}

TEST_CASE("momentum form replays the logged trajectory") {
  const Problem p = boat(2);
  const NoiseModel noise = noise_bounded_additive(2, 0.5);
  for (double b1 : {0.0, 0.9}) {
    const Hyperparams hp = make_hyperparams(b1, 0.999, 1.0, 1.0, 200, 2);
    const Trajectory t = run(p, noise, hp, Algorithm::adam, 7);
    REQUIRE_FALSE(t.non_finite);
    for (long s = 1; s <= t.horizon() - 1; ++s)
      for (int i = 0; i < 2; ++i) {
        const double x_next = t.steps[std::size_t(s)].x[std::size_t(i)];
        REQUIRE(rewrite_residual(t, s, i) <=
                1e-10 * (1.0 + std::abs(x_next)));
      }
    CHECK_THROWS_AS(rewrite_residual(t, 0, 0), IndexOutOfRange);
    CHECK_THROWS_AS(rewrite_residual(t, t.horizon(), 0), IndexOutOfRange);
    CHECK_THROWS_AS(rewrite_residual(t, 1, 2), IndexOutOfRange);
  }
}

TEST_CASE("per-update displacement stays under the step budget") {
  const Problem p = quadratic({1.0, 2.0, 4.0});
  const NoiseModel noise = noise_sparsify(3);
  for (Algorithm alg : {Algorithm::adam, Algorithm::variant}) {
    const Hyperparams hp = make_hyperparams(0.9, 0.999, 2.0, 1e-3, 300, 3);
    const Trajectory t = run(p, noise, hp, alg, 11);
    REQUIRE_FALSE(t.non_finite);
    const double budget = hp.C0 / std::sqrt(1.0 - hp.beta1 / hp.beta2);
    for (long s = 1; s < t.horizon(); ++s)
      for (int i = 0; i < 3; ++i) {
        const double dx = t.steps[std::size_t(s)].x[std::size_t(i)] -
                          t.steps[std::size_t(s - 1)].x[std::size_t(i)];
        REQUIRE(leq_tol(std::abs(dx), budget));
      }
  }
}
