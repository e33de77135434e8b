#include <doctest.h>

#include "randhyp/experiments.hpp"


using namespace randhyp;

TEST_CASE("halving the packing radius roughly quadruples the count") {
  const PackingResult coarse = pack_balls(2, 0.1);
  const PackingResult fine = pack_balls(2, 0.05);
  const double ratio = static_cast<double>(fine.count()) / static_cast<double>(coarse.count());
  MESSAGE("counts " << coarse.count() << " -> " << fine.count());
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("packings are disjoint, maximal and on the sphere") {
  for (double r : {0.3, 0.1}) {
    const PackingResult p = pack_balls(2, r);
    CHECK(min_center_distance(p) >= 2.0 * r * (1.0 - 1e-12));
    CHECK((p.centers.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-14);
    RandomStream rng(11);
    const CoverageAudit audit = audit_coverage(p, 10'000, rng);
    CHECK(audit.passed());
    CHECK(audit.worst <= 2.0 * r);
  }
  CHECK_THROWS_AS(pack_balls(2, 0.0), ConfigError);
  CHECK_THROWS_AS(pack_balls(2, 0.8), ConfigError);
}

TEST_CASE("packing counts clear the covering bound") {
  for (int m : {4, 8, 16}) {
    const PackingResult p = pack_balls(2, 3.0 / m);
    CHECK(static_cast<double>(p.count()) >= packing_constant(2, 3.0) * m * m);
  }
  // 4 pi / (pi * 81)
  CHECK(packing_constant(2, 3.0) == doctest::Approx(4.0 / 81.0).epsilon(1e-14));
}

TEST_CASE("Wilson interval") {
  // Reference values: statsmodels proportion_confint(method="wilson").
  const auto a = wilson_interval(65, 1000);
  CHECK(a.low == doctest::Approx(0.051323770569062045).epsilon(1e-12));
  CHECK(a.high == doctest::Approx(0.08200550931337092).epsilon(1e-12));
  const auto zero = wilson_interval(0, 1000);
  CHECK(zero.low == 0.0);
  CHECK(zero.high == doctest::Approx(0.003826758485555125).epsilon(1e-12));
  const auto all = wilson_interval(100, 100);
  CHECK(all.high == doctest::Approx(1.0));
  CHECK(all.low < 1.0);
}

TEST_CASE("degeneracy budget") {
  CHECK_NOTHROW(check_degeneracy_budget(10, 1000, "x"));
  CHECK_THROWS_AS(check_degeneracy_budget(11, 1000, "x"), DegeneracyBudgetError);
}

TEST_CASE("barrier configuration checks") {
  BarrierConfig c;
  c.trials = 99;
  CHECK_THROWS_AS(barrier_probability(c, RandomStream(1)), ConfigError);
  c.trials = 100;
  c.sigma = TopologySignature::sphere();
  CHECK_THROWS_AS(barrier_probability(c, RandomStream(1)), ConfigError);
}

TEST_CASE("limit-field barrier for circles is monotone in R") {
  BarrierConfig c;
  c.radii = {2.0, 4.0, 6.0};
  c.trials = 100;
  c.spacing = 0.15;
  const BarrierRun run = barrier_probability(c, RandomStream(5));
  CHECK(run.monotone);
  REQUIRE(run.estimates.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& e = run.estimates[k];
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high);
    CHECK_FALSE(e.degree.has_value());
    if (k > 0) CHECK(e.successes >= run.estimates[k - 1].successes);
  }
  for (const auto& trial : run.trials) {
    if (trial.degenerate) continue;
    for (std::size_t k = 1; k < trial.counts.size(); ++k) CHECK(trial.counts[k] >= trial.counts[k - 1]);
  }
}

TEST_CASE("barrier estimates do not depend on the thread count") {
  BarrierConfig c;
  c.radii = {3.0, 5.0};
  c.trials = 100;
  c.spacing = 0.2;
  c.threads = 1;
  const BarrierRun a = barrier_probability(c, RandomStream(8));
  c.threads = 4;
  const BarrierRun b = barrier_probability(c, RandomStream(8));
  for (std::size_t t = 0; t < a.trials.size(); ++t) CHECK(a.trials[t].counts == b.trials[t].counts);
  CHECK(a.estimates[1].successes == b.estimates[1].successes);
}

TEST_CASE("genus-2 barrier with a small ball is a well-formed zero estimate") {
  BarrierConfig c;
  c.variety_dim = 3;
  c.sigma = TopologySignature::genus(2);
  c.radii = {1.5};
  c.trials = 100;
  c.spacing = 0.3;
  c.threads = 4;
  const BarrierRun run = barrier_probability(c, RandomStream(3));
  const auto& e = run.estimates.at(0);
  CHECK(e.trials + e.degenerate == 100);
  CHECK(e.successes == 0);
  CHECK(e.p_hat == 0.0);
  CHECK(e.ci_low == 0.0);
  CHECK(e.ci_high > 0.0);
  CHECK(e.ci_high < 0.05);
}

TEST_CASE("polynomial barrier does not depend on the base point") {
  BarrierConfig c;
  c.degree = 20;
  c.radii = {6.0};
  c.trials = 150;
  c.spacing = 0.2;
  c.threads = 4;
  const BarrierRun north = barrier_probability(c, RandomStream(21));
  Vector p(3);
  p << 0.48, -0.6, 0.64;
  c.base_point = p;
  const BarrierRun other = barrier_probability(c, RandomStream(22));
  const auto& a = north.estimates[0];
  const auto& b = other.estimates[0];
  MESSAGE("p_hat north " << a.p_hat << ", other " << b.p_hat);
  CHECK(a.degree == 20);
  // Overlapping 95% intervals.
  CHECK(a.ci_low <= b.ci_high);
  CHECK(b.ci_low <= a.ci_high);
}

TEST_CASE("a linear form on S^2 cuts one great circle") {
  SphereCountConfig c;
  c.trials = 20;
  c.resolution = 65;
  const ScalingResult r = expected_count_scaling({1}, c, RandomStream(2));
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].mean == 1.0);
  CHECK(r.rows[0].variance == 0.0);
  CHECK(r.rows[0].degenerate == 0);
}

TEST_CASE("sphere counts grow with the degree and agree across threads") {
  SphereCountConfig c;
  c.trials = 30;
  c.resolution = 129;
  c.threads = 1;
  const ScalingResult a = expected_count_scaling({4, 8, 16}, c, RandomStream(9));
  c.threads = 4;
  const ScalingResult b = expected_count_scaling({4, 8, 16}, c, RandomStream(9));
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].counts == b.rows[i].counts);
  CHECK(a.slope == b.slope);
  CHECK(a.rows[2].mean > a.rows[1].mean);
  CHECK(a.rows[1].mean > a.rows[0].mean);
}

TEST_CASE("assembly inequality holds trial by trial") {
  AssemblyConfig c;
  c.degree = 10;
  c.R = 4.0;
  c.counting.trials = 40;
  c.counting.resolution = 129;
  c.counting.threads = 4;
  const AssemblyResult r = lower_bound_assembly(c, RandomStream(4));
  CHECK(r.packing.count() > 0);
  CHECK(r.per_trial_inequality);
  CHECK(r.holds);
  CHECK(r.mean_count >= r.sum_p);
}

TEST_CASE("Kac-Rice oracle") {
  CHECK(kac_rice_zero_count(1) == doctest::Approx(2.0).epsilon(1e-9));
  // Zeros of a trigonometric polynomial of degree m number at most 2m.
  for (int m : {5, 10, 20, 40}) CHECK(kac_rice_zero_count(m) < 2.0 * m);

  std::vector<double> ms, es;
  for (int m : {5, 10, 20, 40}) {
    ms.push_back(m);
    es.push_back(kac_rice_zero_count(m));
  }
  const AffineFit fit = fit_affine(ms, es);
  CHECK(fit.max_relative_residual < 0.05);
  CHECK(fit.slope > 0.0);
}

TEST_CASE("Kac-Rice Monte Carlo at m = 1 and m = 10") {
  const auto one = kac_rice_monte_carlo(1, 200, RandomStream(6));
  CHECK(one.mean == 2.0);
  const auto ten = kac_rice_monte_carlo(10, 10'000, RandomStream(6), 4096, 4);
  MESSAGE("m = 10: " << ten.mean << " vs " << ten.oracle);
  CHECK(ten.relative_error < 0.02);
  const auto again = kac_rice_monte_carlo(10, 10'000, RandomStream(6), 4096, 1);
  CHECK(again.counts == ten.counts);
}

TEST_CASE("affine fit recovers a line") {
  const AffineFit f = fit_affine({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.max_relative_residual < 1e-12);
}
