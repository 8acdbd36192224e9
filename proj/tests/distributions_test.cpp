#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dmoments/distributions.hpp"
#include "dmoments/rng.hpp"
#include "test_support.hpp"

namespace {

using namespace dmoments;
using dmoments::testing::rel_near;

TEST(Derangement, Values)
{
    const std::array<std::uint64_t, 11> expected{1, 0, 1, 2, 9, 44, 265, 1854, 14833, 133496, 1334961};
    for (int k = 0; k <= 10; ++k) {
        EXPECT_EQ(derangement(k), expected[static_cast<std::size_t>(k)]);
    }
    EXPECT_EQ(derangement(20), 895014631192902121ull);
    EXPECT_THROW(derangement(21), std::invalid_argument);
    EXPECT_THROW(derangement(-1), std::invalid_argument);
    static_assert(derangement(4) == 9);
}

TEST(ClosedForm, ExponentialRateTwo)
{
    const auto exp2 = DistributionSpec::exponential(2.0);
    const std::array<double, 7> expected{0.25, 0.25, 0.5625, 1.375, 4.140625, 14.484375, 57.94140625};
    for (int k = 2; k <= 8; ++k) {
        EXPECT_EQ(closed_form_central_moment(exp2, k), expected[static_cast<std::size_t>(k - 2)]) << k;
    }
    EXPECT_EQ(closed_form_central_moment(exp2, 1), 0.0);
    EXPECT_DOUBLE_EQ(exp2.mean(), 0.5);
    EXPECT_THROW(closed_form_central_moment(exp2, 0), std::invalid_argument);
}

TEST(ClosedForm, Normal)
{
    const auto std_normal = DistributionSpec::normal(0.0, 1.0);
    EXPECT_EQ(closed_form_central_moment(std_normal, 4), 3.0);
    EXPECT_EQ(closed_form_central_moment(std_normal, 3), 0.0);
    EXPECT_EQ(closed_form_central_moment(std_normal, 6), 15.0);
    EXPECT_DOUBLE_EQ(closed_form_central_moment(DistributionSpec::normal(4.0, 2.0), 2), 4.0);
}

TEST(ClosedForm, FiniteDelegatesToEnumeration)
{
    const FiniteDistribution<double> law({0.0, 1.0, 5.0}, {0.7, 0.2, 0.1});
    const auto spec = DistributionSpec::finite(law);
    for (int k = 1; k <= 6; ++k) {
        EXPECT_EQ(closed_form_central_moment(spec, k), central_moment_exact(law, k));
    }
    EXPECT_DOUBLE_EQ(spec.mean(), 0.7);
}

TEST(Distribution, RejectsBadParameters)
{
    EXPECT_THROW(DistributionSpec::exponential(0.0), std::invalid_argument);
    EXPECT_THROW(DistributionSpec::exponential(-1.0), std::invalid_argument);
    EXPECT_THROW(DistributionSpec::normal(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(DistributionSpec::normal(std::nan(""), 1.0), std::invalid_argument);
}

TEST(Distribution, ParseParametric)
{
    const auto e = parse_parametric_spec("exp:2");
    EXPECT_DOUBLE_EQ(e.mean(), 0.5);
    EXPECT_EQ(e.describe(), "exp:2");
    const auto n = parse_parametric_spec("normal:1.5,0.5");
    EXPECT_DOUBLE_EQ(n.mean(), 1.5);
    EXPECT_DOUBLE_EQ(n.central_moment(2), 0.25);
    EXPECT_EQ(n.describe(), "normal:1.5,0.5");
    for (const char* bad : {"exp", "exp:", "exp:x", "normal:1", "gamma:2", "exp:-1", "exp:2 "}) {
        EXPECT_THROW(parse_parametric_spec(bad), std::invalid_argument) << bad;
    }
}

TEST(Sampling, PointMass)
{
    RngStream rng{1};
    const auto spec = DistributionSpec::finite(FiniteDistribution<double>::point_mass(7.0));
    EXPECT_EQ(spec.sample(rng, 3), (std::vector<double>{7.0, 7.0, 7.0}));
    EXPECT_THROW(spec.sample(rng, 0), std::invalid_argument);
}

TEST(Sampling, SameStreamSameSample)
{
    const auto spec = DistributionSpec::exponential(2.0);
    RngStream a{99, 3, 0};
    RngStream b{99, 3, 0};
    RngStream c{99, 4, 0};
    const auto xa = spec.sample(a, 100);
    EXPECT_EQ(xa, spec.sample(b, 100));
    EXPECT_NE(xa, spec.sample(c, 100));
}

TEST(Sampling, ExponentialMean)
{
    RngStream rng{2};
    const auto x = DistributionSpec::exponential(2.0).sample(rng, 1'000'000);
    double s = 0;
    for (const double v : x) {
        ASSERT_GT(v, 0.0);
        s += v;
    }
    EXPECT_LT(std::abs(s / 1e6 - 0.5), 5.0 * 0.5 / 1e3);
}

TEST(Sampling, NormalVariance)
{
    RngStream rng{3};
    const std::size_t n = 1'000'000;
    const auto x = DistributionSpec::normal(0.0, 1.0).sample(rng, n);
    double m = 0;
    for (const double v : x) {
        m += v;
    }
    m /= static_cast<double>(n);
    double ss = 0;
    for (const double v : x) {
        ss += (v - m) * (v - m);
    }
    const double var = ss / static_cast<double>(n - 1);
    // Var(s^2) = 2 sigma^4 / (n - 1)
    EXPECT_LT(std::abs(var - 1.0), 5.0 * std::sqrt(2.0 / static_cast<double>(n - 1)));
}

TEST(Sampling, FiniteFrequencies)
{
    RngStream rng{4};
    const FiniteDistribution<double> law({0.0, 1.0, 5.0}, {0.7, 0.2, 0.1});
    const auto spec = DistributionSpec::finite(law);
    const std::size_t n = 200'000;
    std::array<double, 3> count{};
    for (const double v : spec.sample(rng, n)) {
        count[v == 0.0 ? 0 : v == 1.0 ? 1 : 2] += 1.0;
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const double p = law.weights()[i];
        EXPECT_LT(std::abs(count[i] / static_cast<double>(n) - p), 5.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)));
    }
}

TEST(Rng, UniformIndexStaysInRange)
{
    RngStream rng{5};
    std::array<int, 7> seen{};
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.uniform_index(7);
        ASSERT_LT(v, 7u);
        ++seen[v];
    }
    for (const int c : seen) {
        EXPECT_GT(c, 800);
    }
    EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
}

TEST(Rng, UnitIntervals)
{
    RngStream rng{6};
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double v = rng.uniform_open_closed();
        ASSERT_GT(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
}

TEST(Rng, StreamsDiffer)
{
    RngStream a{7, 0, 0};
    RngStream b{7, 0, 1};
    RngStream c{7, 1, 0};
    RngStream d{8, 0, 0};
    const auto first = a();
    EXPECT_NE(first, b());
    EXPECT_NE(first, c());
    EXPECT_NE(first, d());
    EXPECT_EQ(a.seed(), 7u);
    EXPECT_EQ(b.substream_id(), 1u);
}

// Frozen so that seeds printed by the CLI stay meaningful across builds.
TEST(Rng, FrozenSequence)
{
    RngStream rng{42};
    EXPECT_EQ(rng(), 0x435123ad9debd01fULL);
    EXPECT_EQ(rng(), 0xc9f798ff36a39943ULL);
    EXPECT_EQ(rng(), 0xb70498f3a1ed2abcULL);
    RngStream sub{42, 3, 1};
    EXPECT_EQ(sub(), 0xa9077187c91abd88ULL);
    EXPECT_EQ(sub(), 0xcfca48cc6a527e1dULL);
    EXPECT_EQ(sub(), 0xeb3a8ea30a95a91fULL);
}

}  // namespace
