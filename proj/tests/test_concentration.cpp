#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "adamhp/concentration.hpp"

using namespace adamhp;
using namespace adamhp::concentration;
using Catch::Approx;

TEST_CASE("gaussian scale inflation is calibrated to equality") {
  const double c = gaussian_scale_factor();
  CHECK(c == Approx(1.5208666231788148).epsilon(1e-12));
  // E[exp(Z^2 / (c tau)^2)] = 1/sqrt(1 - 2/c^2) for Z ~ N(0, tau^2)
  CHECK(1.0 / std::sqrt(1.0 - 2.0 / (c * c)) ==
        Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("certificates hold for each generator") {
  Rng rng(17);
  const double e = std::exp(1.0);

  MartingaleSpec spec;
  spec.horizon = 10;
  spec.scale = 1.3;

  spec.kind = MartingaleKind::zero;
  auto est = certificate_spot_check(spec, 5000, rng);
  CHECK(est.mean == 1.0);  // exp(0), every draw
  CHECK(est.std_error == 0.0);
  CHECK(est.ok);

  // |Z| = scale and sigma = scale: every weight is exactly e, and what is
  // left over is summation rounding, n * ulp or so
  spec.kind = MartingaleKind::rademacher;
  est = certificate_spot_check(spec, 5000, rng);
  CHECK(est.mean == Approx(e).epsilon(1e-12));
  CHECK(est.std_error == Approx(0.0).margin(1e-7));
  CHECK(est.ok);

  // the gaussian weight exp(Z^2 / (c tau)^2) has infinite variance, so the
  // sample mean sits below e for most seeds; only the guarded one-sided
  // comparison and the hard floor weight >= 1 are dependable
  spec.kind = MartingaleKind::gaussian;
  est = certificate_spot_check(spec, 50000, rng);
  CHECK(est.ok);
  CHECK(est.mean >= 1.0);
  CHECK(est.std_error > 0.0);
}

TEST_CASE("a mis-calibrated scale trips the certificate guard") {
  // constant-magnitude differences make the sample standard error zero, so
  // the guard is sharp: weight exp(1/0.64) > e fails deterministically
  MartingaleSpec spec;
  spec.kind = MartingaleKind::rademacher;
  spec.horizon = 10;
  spec.scale = 1.0;
  spec.scale_override = 0.8;

  Rng rng(18);
  const auto est = certificate_spot_check(spec, 5000, rng);
  CHECK_FALSE(est.ok);
  CHECK(est.mean == Approx(std::exp(1.0 / 0.64)).epsilon(1e-12));

  CHECK_THROWS_AS(azuma_mc(spec, 1000, rng), CertificateViolation);

  // over-stating the scale keeps the certificate valid, just slack
  spec.scale_override = 1.2;
  CHECK(certificate_spot_check(spec, 5000, rng).ok);
}

TEST_CASE("tail bound holds across generators and lambdas") {
  Rng rng(19);
  for (MartingaleKind kind : {MartingaleKind::zero, MartingaleKind::rademacher,
                              MartingaleKind::gaussian}) {
    for (double lambda : {0.05, 0.2, 1.0}) {
      MartingaleSpec spec;
      spec.kind = kind;
      spec.horizon = 50;
      spec.scale = 1.0;
      spec.lambda = lambda;
      spec.delta = 0.05;
      const AzumaResult res = azuma_mc(spec, 2000, rng);
      INFO(name(kind) << " lambda=" << lambda);
      CHECK(res.trials == 2000);
      CHECK(res.ok);
      if (kind == MartingaleKind::zero) CHECK(res.exceedances == 0);
    }
  }
}

TEST_CASE("exceedances do occur near the critical lambda") {
  // loose delta pulls the threshold down into the visible tail; the bound
  // must still hold while the counter actually moves
  MartingaleSpec spec;
  spec.kind = MartingaleKind::rademacher;
  spec.horizon = 100;
  spec.scale = 1.0;
  spec.delta = 0.35;
  spec.lambda = std::sqrt(std::log(1.0 / spec.delta) / 75.0);
  Rng rng(20);
  const AzumaResult res = azuma_mc(spec, 4000, rng);
  CHECK(res.exceedances > 0);
  CHECK(res.ok);
}

TEST_CASE("monte carlo inputs are validated") {
  MartingaleSpec spec;
  Rng rng(21);
  CHECK_THROWS_AS(azuma_mc(spec, 999, rng), InvalidRange);
  MartingaleSpec bad = spec;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(azuma_mc(bad, 2000, rng), InvalidRange);
  bad = spec;
  bad.delta = 1.0;
  CHECK_THROWS_AS(azuma_mc(bad, 2000, rng), InvalidRange);
  bad = spec;
  bad.horizon = 0;
  CHECK_THROWS_AS(azuma_mc(bad, 2000, rng), InvalidRange);
}
