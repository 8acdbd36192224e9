// Small tour of the library: kernels, an exact expectation, and the
// estimators on a simulated Exponential(2) sample.

#include <cstdio>
#include <vector>

#include "dmoments/dmoments.hpp"

int main()
{
    using namespace dmoments;

    // E h_4 over four i.i.d. draws of a skewed three-point law equals mu_4 exactly
    const FiniteDistribution<double> law({0.0, 1.0, 5.0}, {0.7, 0.2, 0.1});
    const double eh4 = expect_iid(law, 4, [](std::span<const double> x) {
        return kernel_h(KernelOrder{4}, x);
    });
    std::printf("three-point law: E h_4 = %.12f, mu_4 = %.12f\n", eh4, central_moment_exact(law, 4));

    const auto exp2 = DistributionSpec::exponential(2.0);
    RngStream rng{2024};
    const auto x = exp2.sample(rng, 12);

    std::printf("\nExponential(2), n = 12\n");
    std::printf("%5s %12s %12s %12s %12s\n", "k", "true", "natural", "d-exhaust", "d-mc");
    RngStream tuples{2024, 0, 1};
    for (int k = 2; k <= 6; ++k) {
        std::printf("%5d %12.6f %12.6f %12.6f %12.6f\n", k, exp2.central_moment(k),
                    natural_moment(x, k).value, d_estimator_exhaustive(x, k).value,
                    d_estimator_mc(x, k, 20000, tuples).value);
    }

    const auto shape = skewness_kurtosis_d(x);
    std::printf("\nskewness %.4f, kurtosis %.4f (population 2 and 9)\n", *shape.skewness,
                shape.kurtosis);
    std::printf("Gini variance %.6f\n", gini_variance(x));
    return 0;
}
