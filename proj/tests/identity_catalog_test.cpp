#include <set>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "dmoments/errors.hpp"
#include "dmoments/identity_catalog.hpp"
#include "test_support.hpp"

namespace {

using namespace dmoments;

IdentityInputs point_mass_inputs()
{
    return IdentityInputs{FiniteDistribution<double>::point_mass(1.5),
                          FiniteDistribution<Vec2>::point_mass({1.0, -2.0}),
                          FiniteDistribution<Vec2>::point_mass({1.0, -2.0}),
                          FiniteDistribution<Vec4>::point_mass({1.0, 2.0, 3.0, 4.0}),
                          FiniteDistribution<Vec4>::point_mass({1.0, 2.0, 3.0, 4.0}),
                          0.5,
                          -1.0};
}

TEST(IdentityCatalog, FifteenDistinctNames)
{
    const auto catalog = identity_catalog();
    ASSERT_EQ(catalog.size(), 15u);
    std::set<std::string> names;
    for (const auto& e : catalog) {
        names.emplace(e.name);
        EXPECT_FALSE(e.summary.empty());
    }
    EXPECT_EQ(names.size(), 15u);
    for (const char* required : {"cov-pairwise", "mu3-drep", "lagrange-general", "binet-cauchy-cov"}) {
        EXPECT_EQ(names.count(required), 1u) << required;
    }
}

TEST(IdentityCatalog, BernoulliCovariancePairedWithItself)
{
    const FiniteDistribution<Vec2> xy({Vec2{0.0, 0.0}, Vec2{1.0, 1.0}}, {0.5, 0.5});
    IdentityInputs in = point_mass_inputs();
    in.pair_first = xy;
    in.pair_second = xy;
    const auto report = verify_identity("cov-pairwise", in);
    EXPECT_TRUE(report.passed());
    for (const auto& c : report.comparisons) {
        EXPECT_DOUBLE_EQ(c.lhs, 0.25) << c.label;
        EXPECT_DOUBLE_EQ(c.rhs, 0.25) << c.label;
    }
}

TEST(IdentityCatalog, LagrangeOnTwoPointBivariateIsNonNegative)
{
    const FiniteDistribution<Vec2> xy({Vec2{1.0, 3.0}, Vec2{-2.0, 0.5}}, {0.3, 0.7});
    IdentityInputs in = point_mass_inputs();
    in.pair_first = xy;
    in.pair_second = xy;
    const auto report = verify_identity("lagrange-general", in);
    EXPECT_TRUE(report.passed());
    for (const auto& c : report.comparisons) {
        EXPECT_GE(c.rhs, 0.0) << c.label;
    }
}

TEST(IdentityCatalog, PointMassMakesEveryThirdMomentFormZero)
{
    const auto report = verify_identity("mu3-drep", point_mass_inputs());
    EXPECT_TRUE(report.passed());
    for (const auto& c : report.comparisons) {
        EXPECT_EQ(c.lhs, 0.0) << c.label;
        EXPECT_EQ(c.rhs, 0.0) << c.label;
    }
}

TEST(IdentityCatalog, PointMassEitherPassesOrIsDegenerate)
{
    for (const auto& e : identity_catalog()) {
        try {
            EXPECT_TRUE(verify_identity(e.name, point_mass_inputs()).passed()) << e.name;
        } catch (const DegenerateInput&) {
            SUCCEED() << e.name << " needs positive variance";
        }
    }
}

TEST(IdentityCatalog, RejectsUnknownNamesAndOrders)
{
    RngStream rng{1};
    const auto in = random_identity_inputs(rng);
    EXPECT_THROW(verify_identity("no-such-identity", in), std::invalid_argument);
    EXPECT_THROW(verify_identity("recursive-drep", in, IdentityOptions{1e-10, 1, kDefaultEnumerationCap}),
                 std::invalid_argument);
    EXPECT_THROW(verify_identity("recursive-drep", in, IdentityOptions{1e-10, kMaxOrder + 1, kDefaultEnumerationCap}),
                 std::invalid_argument);
    EXPECT_THROW(random_identity_inputs(rng, 1), std::invalid_argument);
}

TEST(IdentityCatalog, RecursiveEntryRespectsTheCap)
{
    RngStream rng{2};
    const auto in = random_identity_inputs(rng);
    EXPECT_THROW(verify_identity("recursive-drep", in, IdentityOptions{1e-10, 8, 10}), CapExceeded);
}

// The quadratic-only variant of the fourth-moment covariance line equals mu_3,
// which is why the catalog uses the full cubic.
TEST(IdentityCatalog, QuadraticFourthMomentLineGivesThirdMoment)
{
    RngStream rng{3};
    for (int i = 0; i < 50; ++i) {
        const auto law = dmoments::testing::random_law(rng, 2, 6);
        const double mu = law.mean();
        const double value = expect_iid(law, 2, [mu](std::span<const double> x) {
            return (x[0] - x[1]) * (x[0] * x[0] - 2.0 * mu * x[0]);
        });
        EXPECT_TRUE(dmoments::testing::rel_near(value, central_moment_exact(law, 3), 1e-12));
    }
}

TEST(IdentityCatalog, FailsWhenTheLawsAreSwapped)
{
    // a broken identity must be reported, not hidden: feed mismatched tolerance
    RngStream rng{4};
    const auto in = random_identity_inputs(rng);
    const auto report = verify_identity("mu4-drep", in, IdentityOptions{-1.0, 8, kDefaultEnumerationCap});
    EXPECT_FALSE(report.passed());
}

// Randomized laws (support 2..6), every entry, moment orders up to 6.
// The full 100-law, order-8 run is part of the acceptance binary.
TEST(IdentityCatalog, RandomLawsPassAtTightTolerance)
{
    RngStream rng{20240};
    IdentityOptions opt;
    opt.max_order = 6;
    for (int trial = 0; trial < 25; ++trial) {
        const auto in = random_identity_inputs(rng);
        for (const auto& e : identity_catalog()) {
            const auto report = verify_identity(e.name, in, opt);
            EXPECT_TRUE(report.passed()) << e.name << " trial " << trial << " worst "
                                         << report.worst_rel_diff();
        }
    }
}

}  // namespace
