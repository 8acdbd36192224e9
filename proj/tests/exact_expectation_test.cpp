#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dmoments/errors.hpp"
#include "dmoments/exact_expectation.hpp"
#include "dmoments/kernels.hpp"
#include "test_support.hpp"

namespace {

using namespace dmoments;
using dmoments::testing::rel_near;

const FiniteDistribution<double> kBernoulli({0.0, 1.0}, {0.5, 0.5});
const FiniteDistribution<double> kThreePoint({0.0, 1.0, 5.0}, {0.7, 0.2, 0.1});

auto h_of(int k)
{
    return [k](std::span<const double> z) { return kernel_h(KernelOrder{k}, z); };
}

TEST(ExpectIid, PointMassKillsThirdMoment)
{
    EXPECT_EQ(expect_iid(FiniteDistribution<double>::point_mass(5.0), 3, h_of(3)), 0.0);
}

TEST(ExpectIid, BernoulliSecondAndFourthMoments)
{
    EXPECT_DOUBLE_EQ(expect_iid(kBernoulli, 2, h_of(2)), 0.25);
    EXPECT_DOUBLE_EQ(expect_iid(kBernoulli, 4, h_of(4)), 1.0 / 16.0);
}

TEST(ExpectIid, WeightsSumToOne)
{
    RngStream rng{21};
    for (int i = 0; i < 50; ++i) {
        const auto law = dmoments::testing::random_law(rng, 1, 6);
        const auto m = 1 + rng.uniform_index(4);
        EXPECT_TRUE(rel_near(expect_iid(law, m, [](std::span<const double>) { return 1.0; }), 1.0, 1e-15));
    }
}

TEST(ExpectIid, RefusesOversizedProductSpace)
{
    const FiniteDistribution<double> ten(std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9},
                                         std::vector<double>(10, 1.0));
    EXPECT_THROW(expect_iid(ten, 8, h_of(8)), CapExceeded);
    EXPECT_NO_THROW(expect_iid(ten, 7, h_of(7)));
    EXPECT_THROW(expect_iid(ten, 3, h_of(3), 999), CapExceeded);
    EXPECT_THROW(expect_iid(ten, 0, h_of(2)), std::invalid_argument);
}

TEST(ExpectIid, ThreePointLawMatchesRationalOracle)
{
    // mu_2..mu_6 of {0:.7, 1:.2, 5:.1}, exact rationals
    const std::array<double, 5> mu{221.0 / 100, 1929.0 / 250, 343577.0 / 10000, 1836141.0 / 12500,
                                   126443761.0 / 200000};
    for (int k = 2; k <= 6; ++k) {
        SCOPED_TRACE(k);
        EXPECT_TRUE(rel_near(central_moment_exact(kThreePoint, k), mu[static_cast<std::size_t>(k - 2)], 1e-14));
        EXPECT_TRUE(rel_near(expect_iid(kThreePoint, static_cast<std::size_t>(k), h_of(k)),
                             mu[static_cast<std::size_t>(k - 2)], 1e-13));
    }
}

TEST(ExpectIid, LinearInTheFunction)
{
    RngStream rng{22};
    for (int i = 0; i < 30; ++i) {
        const auto law = dmoments::testing::random_law(rng, 2, 5);
        const double a = rng.uniform() * 4 - 2;
        const double b = rng.uniform() * 4 - 2;
        const auto f = [](std::span<const double> z) { return z[0] * z[1] * z[1]; };
        const auto g = [](std::span<const double> z) { return std::sin(z[0] - z[1]); };
        const double lhs = expect_iid(law, 2, [&](std::span<const double> z) { return a * f(z) + b * g(z); });
        EXPECT_TRUE(rel_near(lhs, a * expect_iid(law, 2, f) + b * expect_iid(law, 2, g), 1e-14));
    }
}

TEST(ExpectIid, IndependentFactorsMultiply)
{
    RngStream rng{23};
    for (int i = 0; i < 30; ++i) {
        const auto law = dmoments::testing::random_law(rng, 2, 6);
        const double m = law.mean();
        const double product = expect_iid(law, 3, [](std::span<const double> z) { return z[0] * z[1] * z[2]; });
        EXPECT_TRUE(rel_near(product, m * m * m, 1e-14));
    }
}

TEST(ExpectIid, EmpiricalLawAveragesTheData)
{
    const std::vector<double> data{1.5, -2.0, 0.25, 4.0, 1.5};
    const auto law = FiniteDistribution<double>::empirical(data);
    EXPECT_EQ(law.size(), 4u);
    EXPECT_DOUBLE_EQ(expect_iid(law, 1, [](std::span<const double> z) { return z[0]; }), 5.25 / 5.0);
}

TEST(ExpectIid, ManyMatchesSeparatePasses)
{
    RngStream rng{24};
    const auto law = dmoments::testing::random_law(rng, 3, 4);
    const auto many = expect_iid_many<2>(law, 5, [](std::span<const double> z, std::size_t, std::span<double> out) {
        out[0] = kernel_h(KernelOrder{5}, z);
        out[1] = kernel_mu_bar(5, z);
    });
    EXPECT_EQ(many[0], expect_iid(law, 5, h_of(5)));
    EXPECT_EQ(many[1], expect_iid(law, 5, [](std::span<const double> z) { return kernel_mu_bar(5, z); }));
}

TEST(ExpectIid, FirstChangedMarksTheStableprefix)
{
    const FiniteDistribution<double> law({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
    std::vector<double> previous;
    std::size_t calls = 0;
    expect_iid_many<1>(law, 3, [&](std::span<const double> z, std::size_t first_changed, std::span<double> out) {
        if (calls == 0) {
            EXPECT_EQ(first_changed, 0u);
        } else {
            for (std::size_t i = 0; i < first_changed; ++i) {
                EXPECT_EQ(z[i], previous[i]);
            }
            EXPECT_NE(z[first_changed], previous[first_changed]);
        }
        previous.assign(z.begin(), z.end());
        ++calls;
        out[0] = 0.0;
    });
    EXPECT_EQ(calls, 27u);
}

TEST(ExpectPair, DifferentLaws)
{
    const FiniteDistribution<double> a({1.0, 3.0}, {0.5, 0.5});
    const FiniteDistribution<double> b({10.0}, {1.0});
    EXPECT_DOUBLE_EQ(expect_pair(a, b, [](std::span<const double> z) { return z[0] * z[1]; }), 20.0);
}

TEST(CentralMomentExact, Examples)
{
    EXPECT_DOUBLE_EQ(central_moment_exact(kBernoulli, 2), 0.25);
    EXPECT_EQ(central_moment_exact(kThreePoint, 1), 0.0);
    const FiniteDistribution<double> sym({-1.0, 1.0}, {1.0, 1.0});
    EXPECT_EQ(central_moment_exact(sym, 3), 0.0);
    EXPECT_THROW(central_moment_exact(sym, 0), std::invalid_argument);
}

TEST(CentralMomentExact, EvenMomentsNonNegativeAndTranslationInvariant)
{
    RngStream rng{25};
    for (int i = 0; i < 100; ++i) {
        const auto law = dmoments::testing::random_law(rng, 1, 6);
        const auto moved = law.translated(3.0 * rng.uniform() - 1.5);
        for (int k = 2; k <= 8; ++k) {
            if (k % 2 == 0) {
                EXPECT_GE(central_moment_exact(law, k), 0.0);
            }
            EXPECT_NEAR(central_moment_exact(moved, k), central_moment_exact(law, k), 1e-11);
        }
    }
}

TEST(OddMomentSymmetry, Examples)
{
    EXPECT_TRUE(odd_moment_symmetry_check(kBernoulli, 3).passed());
    EXPECT_TRUE(odd_moment_symmetry_check(FiniteDistribution<double>::point_mass(2.5), 9).passed());
    const auto report = odd_moment_symmetry_check(kThreePoint, 5);
    EXPECT_TRUE(report.passed());
    EXPECT_EQ(report.comparisons.size(), 3u);
    EXPECT_THROW(odd_moment_symmetry_check(kThreePoint, 0), std::invalid_argument);
}

TEST(OddMomentSymmetry, RandomLaws)
{
    RngStream rng{26};
    for (int i = 0; i < 100; ++i) {
        EXPECT_TRUE(odd_moment_symmetry_check(dmoments::testing::random_law(rng, 2, 6), 15).passed());
    }
}

TEST(Compare, ScaleAndVerdict)
{
    const auto c = compare("x", 1000.0, 1000.0 + 1e-8, 1e-10);
    EXPECT_TRUE(c.pass);
    EXPECT_DOUBLE_EQ(c.scale, 1000.0 + 1e-8);
    EXPECT_FALSE(compare("y", 0.0, 1e-9, 1e-10).pass);
    EXPECT_TRUE(compare("z", 0.0, 1e-9, 1e-10, 100.0).pass);
    EXPECT_FALSE(compare("nan", std::nan(""), 0.0, 1.0).pass);
}

TEST(FiniteDistribution, NormalizesAndMerges)
{
    const FiniteDistribution<double> law({2.0, 1.0, 2.0, 7.0}, {1.0, 2.0, 1.0, 0.0});
    ASSERT_EQ(law.size(), 2u);
    EXPECT_EQ(law.support()[0], 2.0);
    EXPECT_DOUBLE_EQ(law.weights()[0], 0.5);
    EXPECT_DOUBLE_EQ(law.weights()[1], 0.5);
    EXPECT_THROW(FiniteDistribution<double>({}, {}), std::invalid_argument);
    EXPECT_THROW(FiniteDistribution<double>({1.0}, {-1.0}), std::invalid_argument);
    EXPECT_THROW(FiniteDistribution<double>({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(FiniteDistribution<double>({1.0, 2.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(FiniteDistribution<double>({std::nan("")}, {1.0}), std::invalid_argument);
}

TEST(FiniteDistribution, VectorMarginals)
{
    const FiniteDistribution<Vec2> law({Vec2{1.0, 2.0}, Vec2{3.0, -2.0}}, {1.0, 3.0});
    const auto m = law.mean();
    EXPECT_DOUBLE_EQ(m[0], 2.5);
    EXPECT_DOUBLE_EQ(m[1], -1.0);
    EXPECT_DOUBLE_EQ(law.marginal(1).mean(), -1.0);
}

}  // namespace
