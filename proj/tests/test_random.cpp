#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "nnstab/random.hpp"

using namespace nnstab;

TEST(Philox, KnownAnswerZero) {
    // Random123 kat_vectors: philox4x64_10, zero counter and key.
    const auto out = philox4x64_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x16554d9eca36314cULL);
    EXPECT_EQ(out[1], 0xdb20fe9d672d0fdcULL);
    EXPECT_EQ(out[2], 0xd7e772cee186176bULL);
    EXPECT_EQ(out[3], 0x7e68b68aec7ba23bULL);
}

TEST(Philox, MatchesNumpyStream) {
    // numpy.random.Philox(counter=[0, 7, 3, 0], key=[42, 5]).random_raw(8).
    // numpy bumps the counter before each block, so these are our blocks 1-2.
    Stream s(42, 5, 7, 3);
    for (int i = 0; i < 4; ++i) s();
    const std::uint64_t want[8] = {0x483b7879a81c679bULL, 0xb7084abbfa851ea9ULL,
                                   0xfe093e3486eb641cULL, 0xed09e1ad9829b4ceULL,
                                   0xe8fc55a6468c4040ULL, 0x95c3f93a10623f4bULL,
                                   0x7d99ed5c2e365a27ULL, 0x067c4d2c809c3dacULL};
    for (auto w : want) EXPECT_EQ(s(), w);
}

TEST(Stream, ReplayIsBitIdentical) {
    Stream a(9, 1, 2, 3);
    Stream b(9, 1, 2, 3);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(a.uniform(), b.uniform());
        EXPECT_EQ(a.normal(), b.normal());
    }
}

TEST(Stream, AddressesAreDistinct) {
    std::set<std::uint64_t> first;
    for (std::uint64_t seed : {0, 1})
        for (std::uint64_t id : {0, 1})
            for (std::uint64_t lane : {0, 1, 2})
                for (std::uint64_t group : {0, 1}) first.insert(Stream(seed, id, lane, group)());
    EXPECT_EQ(first.size(), 24u);
}

TEST(Stream, UniformRange) {
    Stream s(1, 0, 0, 0);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_LT(lo, 1e-4);
    EXPECT_GT(hi, 1 - 1e-4);
    EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Stream, NormalMoments) {
    Stream s(2, 0, 0, 0);
    const int n = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double g = s.normal();
        m1 += g;
        m2 += g * g;
        m4 += g * g * g * g;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(Stream, AdjacentLanesUncorrelated) {
    const int n = 100000;
    for (std::uint64_t lane = 0; lane < 4; ++lane) {
        Stream a(77, 0, lane, 0);
        Stream b(77, 0, lane + 1, 0);
        double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
        for (int i = 0; i < n; ++i) {
            const double x = a.uniform();
            const double y = b.uniform();
            sab += x * y;
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
        }
        const double cov = sab / n - (sa / n) * (sb / n);
        const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
        EXPECT_LT(std::abs(corr), 0.01);
    }
}

TEST(Stream, DeriveStreamUsesDefaultGroup) {
    Stream a = derive_stream(5, 3);
    Stream b(5, 0, 3, 0);
    EXPECT_EQ(a(), b());
}
