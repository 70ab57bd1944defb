#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "nnstab/metric.hpp"

using namespace nnstab;

TEST(PNorm, RejectsNonPositive) {
    EXPECT_THROW(PNorm{0.0}, std::invalid_argument);
    EXPECT_THROW(PNorm{-1.0}, std::invalid_argument);
    EXPECT_THROW(PNorm{std::nan("")}, std::invalid_argument);
    EXPECT_NO_THROW(PNorm{0.5});
    EXPECT_THROW(PNorm{0.5}.require_at_least_one(), std::invalid_argument);
    EXPECT_NO_THROW(PNorm{1.0}.require_at_least_one());
}

TEST(Epsilon, RejectsNonPositive) {
    EXPECT_THROW(Epsilon{0.0}, std::invalid_argument);
    EXPECT_THROW(Epsilon{std::numeric_limits<double>::infinity()}, std::invalid_argument);
    EXPECT_DOUBLE_EQ(Epsilon{0.25}.value(), 0.25);
}

TEST(DistanceSet, Validates) {
    EXPECT_THROW(DistanceSet({}), std::invalid_argument);
    EXPECT_THROW(DistanceSet({1.0, -0.5}), std::invalid_argument);
    DistanceSet s({3.0, 1.0, 2.0});
    EXPECT_EQ(s.min(), 1.0);
    EXPECT_EQ(s.max(), 3.0);
}

TEST(PDistance, Examples) {
    const std::vector<double> zero{0, 0};
    EXPECT_EQ(p_distance(zero, std::vector<double>{1, 1}, PNorm{1.0}), 2.0);
    EXPECT_EQ(p_distance(zero, std::vector<double>{3, 4}, PNorm{2.0}), 5.0);
    const std::vector<double> x{0.3, -1.7, 2.5};
    for (double p : {0.5, 1.0, 2.0, 3.7}) EXPECT_EQ(p_distance(x, x, PNorm{p}), 0.0);
    EXPECT_EQ(p_power_sum(zero, std::vector<double>{3, 4}, PNorm{2.0}), 25.0);
}

TEST(PDistance, Errors) {
    const std::vector<double> a{0, 0};
    const std::vector<double> b{0, 0, 0};
    EXPECT_THROW(p_distance(a, b, PNorm{2.0}), std::invalid_argument);
    EXPECT_THROW(p_distance(std::vector<double>{}, std::vector<double>{}, PNorm{2.0}),
                 std::invalid_argument);
    const std::vector<double> bad{0, std::nan("")};
    EXPECT_THROW(p_distance(a, bad, PNorm{2.0}), std::invalid_argument);
}

TEST(PDistance, MetricProperties) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 12);
    for (int trial = 0; trial < 5000; ++trial) {
        const int d = dim(rng);
        std::vector<double> x(d), y(d), z(d);
        for (int j = 0; j < d; ++j) {
            x[j] = u(rng);
            y[j] = u(rng);
            z[j] = u(rng);
        }
        for (double p : {0.5, 1.0, 1.5, 2.0, 4.0}) {
            const PNorm pn{p};
            const double xy = p_distance(x, y, pn);
            EXPECT_EQ(xy, p_distance(y, x, pn));
            EXPECT_GT(xy, 0.0);
            if (p >= 1.0) {
                const double xz = p_distance(x, z, pn);
                const double zy = p_distance(z, y, pn);
                EXPECT_LE(xy, (xz + zy) * (1.0 + 1e-14));
            }
        }
    }
}

TEST(PDistance, CompensatedSumIsOrderStable) {
    // 10^6 terms of mixed magnitude: forward and reverse accumulation agree.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t d = 1000000;
    std::vector<double> x(d), y(d, 0.0);
    for (auto& v : x) v = u(rng) * (u(rng) < 0.01 ? 1e4 : 1e-3);
    std::vector<double> xr(x.rbegin(), x.rend());
    EXPECT_EQ(p_power_sum(x, y, PNorm{2.0}), p_power_sum(xr, y, PNorm{2.0}));
}

TEST(Delta, Examples) {
    EXPECT_NEAR(delta(Epsilon{1.0}, PNorm{1.0}), 1.0 / 3.0, 1e-16);
    // Oracle: exact rational 21/221.
    EXPECT_NEAR(delta(Epsilon{0.1}, PNorm{2.0}), 0.09502262443438915, 1e-17);
    EXPECT_LT(delta(Epsilon{1e-300}, PNorm{2.0}), 1e-299);
}

TEST(Delta, SmallEpsilonKeepsSixDigits) {
    // delta ~ p eps / 2 for small eps; the exact value is 9.999995000000e-7 to 13 digits.
    const double v = delta(Epsilon{1e-6}, PNorm{2.0});
    const double x = std::pow(1.0 + 1e-6, 2.0);
    EXPECT_NEAR(v, 9.99999500000e-7, 1e-15);
    EXPECT_NEAR(v, (x - 1) / (x + 1), 1e-12);
}

TEST(Delta, MonotoneInEpsilon) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-6.0, 2.0);
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
        for (int i = 0; i < 2000; ++i) {
            double a = std::pow(10.0, u(rng));
            double b = std::pow(10.0, u(rng));
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            const double da = delta(Epsilon{a}, PNorm{p});
            const double db = delta(Epsilon{b}, PNorm{p});
            EXPECT_LT(da, db);
            EXPECT_GT(da, 0.0);
            EXPECT_LT(db, 1.0);
        }
    }
}

TEST(Delta, AlgebraicIdentity) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> le(-4.0, 0.5);
    std::uniform_real_distribution<double> up(0.2, 4.0);
    for (int i = 0; i < 10000; ++i) {
        const double eps = std::pow(10.0, le(rng));
        const double p = up(rng);
        const double dl = delta(Epsilon{eps}, PNorm{p});
        const double lhs = (1.0 + dl) / (1.0 - dl);
        const double rhs = std::pow(1.0 + eps, p);
        EXPECT_LE(std::abs(lhs - rhs) / rhs, 1e-12) << "eps=" << eps << " p=" << p;
    }
}

TEST(InstabilityEvent, Examples) {
    EXPECT_TRUE(instability_event(DistanceSet({2.5}), Epsilon{0.1}));
    EXPECT_TRUE(instability_event(DistanceSet({1.0, 1.05}), Epsilon{0.1}));
    EXPECT_FALSE(instability_event(DistanceSet({1.0, 1.2}), Epsilon{0.1}));
}

TEST(ZStatistic, Examples) {
    EXPECT_DOUBLE_EQ(z_statistic(DistanceSet({2.0}), Epsilon{0.3}), -0.3 * 2.0);
    EXPECT_NEAR(z_statistic(DistanceSet({1.0, 1.2}), Epsilon{0.1}), 0.1, 1e-15);
    EXPECT_EQ(z_statistic(DistanceSet({2.0, 3.0, 5.0}), Epsilon{0.5}), 2.0);
}

TEST(ZStatistic, SignMatchesInstability) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::uniform_int_distribution<int> count(1, 20);
    for (int i = 0; i < 20000; ++i) {
        std::vector<double> v(count(rng));
        for (auto& x : v) x = u(rng);
        const DistanceSet s(v);
        const Epsilon eps{u(rng) + 1e-3};
        const double z = z_statistic(s, eps);
        if (z != 0.0) EXPECT_EQ(z < 0.0, instability_event(s, eps));
    }
    // Exact boundary: max = (1 + eps) min is unstable with z = 0.
    const DistanceSet tie({2.0, 3.0});
    EXPECT_EQ(z_statistic(tie, Epsilon{0.5}), 0.0);
    EXPECT_TRUE(instability_event(tie, Epsilon{0.5}));
}

TEST(BandCheck, Examples) {
    const std::vector<double> at_gamma{2.0, 2.0, 2.0};
    EXPECT_TRUE(band_check(at_gamma, 2.0, 0.0));
    EXPECT_TRUE(band_check(std::vector<double>{0.9, 1.1}, 1.0, 0.1));
    EXPECT_FALSE(band_check(std::vector<double>{0.8}, 1.0, 0.1));
}

TEST(BandCheck, ImpliesInstability) {
    // Inside the band the rooted distances are within a (1 + eps) factor.
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 20000; ++i) {
        const double p = 0.5 + 3.5 * u(rng);
        const Epsilon eps{std::pow(10.0, -3.0 + 3.0 * u(rng))};
        const double gamma = 10.0 * u(rng);
        const double dl = delta(eps, PNorm{p});
        std::vector<double> s(1 + i % 30);
        for (auto& v : s) v = gamma * (1.0 + dl * (2.0 * u(rng) - 1.0));
        if (!band_check(s, gamma, dl)) continue;
        ++checked;
        std::vector<double> rooted;
        for (double v : s) rooted.push_back(root_of_power_sum(v, p));
        EXPECT_TRUE(instability_event(DistanceSet(rooted), eps));
    }
    EXPECT_GE(checked, 10000);
}
