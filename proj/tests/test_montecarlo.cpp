#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nnstab/montecarlo.hpp"

using namespace nnstab;

namespace {

ExperimentConfig cube_config(std::size_t d, double n, double p, double eps, std::uint64_t trials,
                             std::uint64_t seed = 1, std::uint64_t stream_id = 0) {
    ExperimentConfig c{DistributionSpec::uniform_cube(d), DatasetSizeRule::constant(n), PNorm{p},
                       Epsilon{eps}};
    c.trials = trials;
    c.seed = seed;
    c.stream_id = stream_id;
    return c;
}

ExperimentConfig point_mass_config(std::size_t d, double n, std::uint64_t trials) {
    ExperimentConfig c{DistributionSpec::gaussian(std::vector<double>(d, 0.25),
                                                  std::vector<double>(d, 0.0)),
                       DatasetSizeRule::constant(n), PNorm{2.0}, Epsilon{0.1}};
    c.trials = trials;
    return c;
}

std::vector<double> center(std::size_t d) { return std::vector<double>(d, 0.5); }

}  // namespace

TEST(Wilson, Examples) {
    const auto [lo, hi] = wilson_interval(50, 100, 0.95);
    EXPECT_NEAR(lo, 0.4038, 5e-4);
    EXPECT_NEAR(hi, 0.5962, 5e-4);
    EXPECT_EQ(wilson_interval(0, 40, 0.95).first, 0.0);
    EXPECT_EQ(wilson_interval(40, 40, 0.95).second, 1.0);
    EXPECT_THROW(wilson_interval(1, 0, 0.95), std::invalid_argument);
    EXPECT_THROW(wilson_interval(5, 4, 0.95), std::invalid_argument);
}

TEST(Wilson, ContainsPointEstimate) {
    for (std::uint64_t n : {1, 2, 7, 100, 100000})
        for (std::uint64_t k = 0; k <= n; k += std::max<std::uint64_t>(1, n / 13)) {
            const auto [lo, hi] = wilson_interval(k, n, 0.95);
            const double phat = static_cast<double>(k) / static_cast<double>(n);
            EXPECT_LE(lo, phat);
            EXPECT_GE(hi, phat);
            EXPECT_GE(lo, 0.0);
            EXPECT_LE(hi, 1.0);
        }
}

TEST(Wilson, CoverageNearNominal) {
    std::mt19937_64 rng(99);
    for (double p : {0.05, 0.3, 0.5}) {
        std::binomial_distribution<std::uint64_t> binom(100, p);
        int covered = 0;
        const int experiments = 10000;
        for (int i = 0; i < experiments; ++i) {
            const auto [lo, hi] = wilson_interval(binom(rng), 100, 0.95);
            if (lo <= p && p <= hi) ++covered;
        }
        EXPECT_GE(covered, 9300) << "p=" << p;
    }
}

TEST(RunTrial, SinglePointIsUnstable) {
    const auto c = cube_config(5, 1, 2.0, 0.3, 10);
    const auto q = center(5);
    for (std::uint64_t t = 0; t < 10; ++t) {
        const auto o = run_trial(c, q, t);
        EXPECT_EQ(o.d_min, o.d_max);
        EXPECT_TRUE(o.unstable);
        EXPECT_DOUBLE_EQ(o.z, -0.3 * o.d_min);
    }
    EXPECT_EQ(estimate_instability_probability(c, q).estimate, 1.0);
}

TEST(RunTrial, PointMassIsUnstable) {
    const auto c = point_mass_config(4, 30, 5);
    const std::vector<double> q(4, 0.0);
    for (std::uint64_t t = 0; t < 5; ++t) {
        const auto o = run_trial(c, q, t);
        EXPECT_EQ(o.d_min, o.d_max);
        EXPECT_DOUBLE_EQ(o.d_min, 0.5);
        EXPECT_TRUE(o.unstable);
    }
}

TEST(RunTrial, HandReplay) {
    // d = 1, q = 0, n = 2: the two distances are the trial's first two uniforms.
    const auto c = cube_config(1, 2, 1.0, 1.0, 50, 42, 3);
    const std::vector<double> q{0.0};
    for (std::uint64_t t = 0; t < 50; ++t) {
        Stream s(42, 3, t, stream_group::trials);
        const double u1 = s.uniform();
        const double u2 = s.uniform();
        const auto o = run_trial(c, q, t);
        EXPECT_EQ(o.d_min, std::min(u1, u2));
        EXPECT_EQ(o.d_max, std::max(u1, u2));
        EXPECT_EQ(o.unstable, o.d_max <= 2.0 * o.d_min);
        EXPECT_DOUBLE_EQ(o.z, o.d_max - 2.0 * o.d_min);
    }
}

TEST(RunTrial, RejectsBadQuery) {
    const auto c = cube_config(3, 4, 2.0, 0.1, 1);
    EXPECT_THROW(run_trial(c, std::vector<double>{0.5, 0.5}, 0), std::invalid_argument);
}

TEST(Instability, MatchesClosedFormOnTwoPoints) {
    // Pr[max <= (1+eps) min] = eps / (1 + eps) for two uniforms on [0,1].
    const double eps = 1.0;
    const double truth = eps / (1.0 + eps);
    const std::uint64_t trials = 20000;
    const double se = std::sqrt(truth * (1 - truth) / trials);
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = cube_config(1, 2, 1.0, eps, trials, seed);
        const auto e = estimate_instability_probability(c, std::vector<double>{0.0});
        EXPECT_LE(e.ci_low, e.estimate);
        EXPECT_GE(e.ci_high, e.estimate);
        if (std::abs(e.estimate - truth) <= 3.0 * se) ++agree;
    }
    EXPECT_GE(agree, 19);
}

TEST(Instability, BackendsAreBitIdentical) {
    const auto c = cube_config(16, 40, 1.5, 0.4, 300, 7, 9);
    const auto q = center(16);
    const auto ref = run_trials(c, q, Execution::serial());
    const auto ref_est = estimate_instability_probability(c, q, Execution::serial());
    for (int w : {1, 2, 3, 8}) {
        EXPECT_EQ(run_trials(c, q, Execution::parallel(w)), ref) << "workers=" << w;
        EXPECT_EQ(estimate_instability_probability(c, q, Execution::parallel(w)), ref_est);
    }
}

TEST(Instability, CoupledMonotoneInN) {
    // Same stream, one more point: the larger dataset is never more unstable.
    const std::size_t d = 8;
    const auto q = center(d);
    double previous = 1.0;
    for (double n = 1; n <= 20; ++n) {
        const auto small = cube_config(d, n, 2.0, 0.2, 400, 5);
        const auto large = cube_config(d, n + 1, 2.0, 0.2, 400, 5);
        const auto a = run_trials(small, q);
        const auto b = run_trials(large, q);
        for (std::size_t t = 0; t < a.size(); ++t) {
            EXPECT_LE(b[t].d_min, a[t].d_min);
            EXPECT_GE(b[t].d_max, a[t].d_max);
            if (b[t].unstable) EXPECT_TRUE(a[t].unstable);
        }
        const double est = estimate_instability_probability(small, q).estimate;
        EXPECT_LE(est, previous);
        previous = est;
    }
}

TEST(Instability, MemoryCap) {
    auto c = cube_config(100, 1000, 2.0, 0.1, 1);
    c.memory_cap = 99999;
    EXPECT_THROW(c.dataset_size(), MemoryCapExceeded);
    EXPECT_THROW(estimate_instability_probability(c, center(100)), MemoryCapExceeded);
    c.memory_cap = 100000;
    EXPECT_EQ(c.dataset_size(), 1000u);
}

TEST(Instability, ReusedDatasetDiagnostic) {
    const auto c = cube_config(4, 10, 2.0, 0.1, 1, 3);
    std::vector<std::vector<double>> queries{center(4), std::vector<double>(4, 0.0)};
    const auto e = estimate_instability_reused_dataset(c, queries);
    EXPECT_EQ(e.method, "diagnostic:reused-dataset");
    EXPECT_EQ(e.trials, 2u);
    EXPECT_EQ(e, estimate_instability_reused_dataset(c, queries));
}

TEST(Deviation, CenterOfCubeBelowHoeffding) {
    const std::size_t d = 200;
    const auto spec = DistributionSpec::uniform_cube(d);
    const auto q = center(d);
    const PNorm p{1.0};
    const double gamma = gamma_uniform(q, p);
    EXPECT_DOUBLE_EQ(gamma, 50.0);
    const DeviationTask task{spec, q, p, gamma, delta(Epsilon{1.0}, p), 100000, 11};
    const auto e = estimate_deviation_probability(task);
    EXPECT_LE(e.estimate, hoeffding_deviation_bound(d, p, Epsilon{1.0}, 1.0));
    EXPECT_EQ(e, estimate_deviation_probability(task, Execution::serial()));
}

TEST(Deviation, WideBandNeverViolated) {
    const auto spec = DistributionSpec::uniform_cube(3);
    const std::vector<double> q(3, 0.0);
    const PNorm p{1.0};
    const DeviationTask task{spec, q, p, 3.0, 1.0, 5000, 2};
    const auto e = estimate_deviation_probability(task);
    EXPECT_EQ(e.estimate, 0.0);
    EXPECT_EQ(e.ci_low, 0.0);
}

TEST(ZRatio, SinglePointIsNegative) {
    const auto c = cube_config(10, 1, 2.0, 0.5, 500);
    const auto e = estimate_expected_z_ratio(c);
    EXPECT_LT(e.estimate, 0.0);
    EXPECT_LT(e.ci_high, 0.0);
}

TEST(ZRatio, PointMassIsZeroUnderTheLaw) {
    // The query is drawn from the law too, so every distance is zero.
    const auto c = point_mass_config(3, 5, 50);
    EXPECT_EQ(estimate_expected_z_ratio(c).estimate, 0.0);
}

TEST(ZRatio, ExponentialDatasetIsPositive) {
    auto c = cube_config(6, 1, 1.0, 0.1, 100, 4);
    c.size_rule = DatasetSizeRule::stability_threshold(Epsilon{0.1});
    EXPECT_EQ(c.dataset_size(), 7257u);
    const auto e = estimate_expected_z_ratio(c);
    EXPECT_GT(e.estimate, 0.0);
    EXPECT_EQ(e, estimate_expected_z_ratio(c, Execution::serial()));
}

TEST(Stability, SinglePointIsNotStable) {
    // 2000 trials put the Wilson upper end below 1 - zeta = 0.005.
    const auto c = cube_config(5, 1, 2.0, 0.1, 2000);
    const auto v = classify_query_stability(c, center(5));
    EXPECT_EQ(v.frequency.estimate, 0.0);
    EXPECT_FALSE(v.stable);
    EXPECT_FALSE(v.indeterminate);
}

TEST(Stability, LargeDatasetIsStable) {
    auto c = cube_config(6, 1, 1.0, 0.1, 100, 8);
    c.size_rule = DatasetSizeRule::stability_threshold(Epsilon{0.1});
    const auto v = classify_query_stability(c, std::vector<double>{0.1, 0.7, 0.4, 0.9, 0.3, 0.5});
    EXPECT_TRUE(v.stable);
    EXPECT_FALSE(v.indeterminate);
}

TEST(Stability, ZetaBounds) {
    auto c = cube_config(2, 4, 2.0, 0.1, 200);
    c.zeta = 0.9;
    EXPECT_THROW(classify_query_stability(c, center(2)), std::invalid_argument);
    c.zeta = 1.0;
    EXPECT_THROW(classify_query_stability(c, center(2)), std::invalid_argument);
    // As zeta approaches 1 any positive frequency counts as stable.
    c.zeta = 1.0 - 1e-9;
    const auto v = classify_query_stability(c, center(2));
    ASSERT_GT(v.frequency.estimate, 0.0);
    EXPECT_TRUE(v.stable);
}

TEST(StableFraction, WeakStabilityAtModerateDimension) {
    // numpy oracle at d = 64, n = 64, eps = 0.5: Pr[z >= 0] is 0.06-0.07 for
    // random queries, far above 1 - zeta, so every query counts as stable.
    auto c = cube_config(64, 64, 2.0, 0.5, 2000, 12);
    const auto r = estimate_stable_fraction(c, 50);
    EXPECT_EQ(r.queries.size(), 50u);
    EXPECT_EQ(r.stable_fraction.estimate, 1.0);
    EXPECT_EQ(r.indeterminate, 0u);
    for (const auto& q : r.queries) {
        EXPECT_GT(q.verdict.frequency.estimate, 0.03);
        EXPECT_LT(q.verdict.frequency.estimate, 0.12);
    }
}

TEST(StableFraction, InstabilityRegime) {
    auto c = cube_config(256, 64, 2.0, 0.5, 2000, 12);
    const auto r = estimate_stable_fraction(c, 20);
    EXPECT_EQ(r.stable_fraction.estimate, 0.0);
    EXPECT_EQ(r.indeterminate, 0u);
    EXPECT_EQ(r.determinate_stable_fraction.estimate, 0.0);
}

TEST(StableFraction, QueriesAndBackends) {
    auto c = cube_config(3, 6, 2.0, 0.3, 200, 21);
    const auto a = estimate_stable_fraction(c, 6, Execution::serial());
    const auto b = estimate_stable_fraction(c, 6, Execution::parallel(3));
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < a.queries.size(); ++i) {
        Stream s = c.stream(i, stream_group::queries);
        EXPECT_EQ(a.queries[i].point, sample(DistributionSpec::uniform_cube(3), s));
        EXPECT_EQ(a.queries[i].verdict,
                  classify_query_stability(c, a.queries[i].point, Execution::serial(),
                                           stream_group::per_query_base + i));
    }
    EXPECT_THROW(estimate_stable_fraction(c, 0), std::invalid_argument);
}

TEST(RelativeVariance, PointMassHasNoSpread) {
    const auto spec = DistributionSpec::gaussian({1.0, 1.0}, {0.0, 0.0});
    const std::vector<double> q{0.0, 0.0};
    const RelativeVarianceTask task{spec, q, PNorm{2.0}, 100, 1};
    const auto e = estimate_relative_variance(task);
    EXPECT_EQ(e.estimate, 0.0);
    const std::vector<double> on_mass{1.0, 1.0};
    EXPECT_THROW(estimate_relative_variance({spec, on_mass, PNorm{2.0}, 100, 1}), std::domain_error);
}

TEST(RelativeVariance, UniformFromOrigin) {
    // D ~ U[0,1]: Var/E^2 = (1/12) / (1/4) = 1/3.
    const auto spec = DistributionSpec::uniform_cube(1);
    const std::vector<double> q{0.0};
    const auto e = estimate_relative_variance({spec, q, PNorm{1.0}, 200000, 6});
    EXPECT_NEAR(e.estimate, 1.0 / 3.0, 0.006);
    EXPECT_LE(e.ci_low, e.estimate);
    EXPECT_GE(e.ci_high, e.estimate);
}

TEST(RelativeVariance, DecreasesWithDimension) {
    double previous = 1.0;
    for (std::size_t d : {4, 64, 1024}) {
        const auto spec = DistributionSpec::uniform_cube(d);
        const auto q = center(d);
        const auto e = estimate_relative_variance({spec, q, PNorm{2.0}, 2000, 3, d});
        EXPECT_LT(e.estimate, previous) << "d=" << d;
        previous = e.estimate;
    }
}

TEST(RelativeVariance, BackendsAreBitIdentical) {
    const auto spec = DistributionSpec::uniform_cube(5);
    const auto q = center(5);
    const RelativeVarianceTask task{spec, q, PNorm{3.0}, 500, 13};
    EXPECT_EQ(estimate_relative_variance(task, Execution::serial()),
              estimate_relative_variance(task, Execution::parallel(4)));
}

TEST(RelativeContrast, HighDimensionIsSmall) {
    const auto c = cube_config(1024, 100, 2.0, 0.1, 200, 2);
    const auto e = estimate_relative_contrast(c, center(1024));
    EXPECT_LT(e.estimate, 0.15);
    EXPECT_GT(e.estimate, 0.0);
}

TEST(RelativeContrast, DecreasesWithDimension) {
    double previous = INFINITY;
    for (std::size_t d : {16, 128, 1024}) {
        const auto c = cube_config(d, 100, 2.0, 0.1, 200, 2, d);
        const auto e = estimate_relative_contrast(c, center(d));
        EXPECT_LT(e.estimate, previous) << "d=" << d;
        previous = e.estimate;
    }
}

TEST(RelativeContrast, EqualDistancesGiveZero) {
    const auto c = point_mass_config(3, 10, 20);
    const auto e = estimate_relative_contrast(c, std::vector<double>(3, 0.0));
    EXPECT_EQ(e.estimate, 0.0);
    EXPECT_EQ(e.excluded, 0u);
    EXPECT_THROW(estimate_relative_contrast(c, std::vector<double>(3, 0.25)), std::domain_error);
    EXPECT_THROW(estimate_relative_contrast(point_mass_config(3, 1, 20), std::vector<double>(3, 0.0)),
                 std::invalid_argument);
}
