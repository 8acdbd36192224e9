#pragma once

// Catalog of population identities for pairwise-difference representations,
// each evaluated on both sides with the exact enumeration engine.
//
// Entries are addressed by stable names (see identity_catalog()). Each check
// returns every line of the identity as a separate Comparison, so a failure
// pinpoints the offending expression.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmoments/errors.hpp"
#include "dmoments/exact_expectation.hpp"
#include "dmoments/finite_distribution.hpp"
#include "dmoments/kernels.hpp"
#include "dmoments/rng.hpp"

namespace dmoments {

/// Laws the catalog draws on. Univariate entries use `scalar`; the
/// Lagrange / covariance entries use the bivariate pair (two independent,
/// generally non-identical vectors); Binet-Cauchy uses the 4-d pair;
/// the proportional-case entry uses the x-marginals with slopes b1, b2.
struct IdentityInputs {
    FiniteDistribution<double> scalar;
    FiniteDistribution<Vec2> pair_first;
    FiniteDistribution<Vec2> pair_second;
    FiniteDistribution<Vec4> quad_first;
    FiniteDistribution<Vec4> quad_second;
    double b1 = 1.0;
    double b2 = 1.0;
};

struct IdentityOptions {
    double tolerance = 1e-10;
    int max_order = 8;  // highest moment order (= replication count) in the recursive entries
    std::uint64_t cap = kDefaultEnumerationCap;
};

struct IdentityEntry {
    std::string_view name;
    std::string_view summary;
};

namespace detail {

inline constexpr std::array<IdentityEntry, 15> kIdentityCatalog{{
    {"cov-pairwise", "C[X,Y] = 1/2 E(X1-X2)(Y1-Y2) and the four single-replication forms"},
    {"var-pairwise", "variance forms incl. sigma^2 = E(X1-X3)(X1-X2) and E X^2"},
    {"regression-beta", "four expressions of the regression slope of Y on X"},
    {"moment-cov", "mu_3 and mu_4 as covariances of X with powers of X"},
    {"moment-cov-replicated", "mu_3 with three and mu_4 with four replications"},
    {"mu3-drep", "five pairwise-difference forms of mu_3 (plus reference-value forms)"},
    {"mu4-drep", "pairwise-difference forms of mu_4"},
    {"skew-kurt-drep", "pairwise-difference skewness and kurtosis"},
    {"moment-recursion", "mu_{n+1} recursions in lower-order moments"},
    {"recursive-drep", "E mu_bar_k = E mu_tilde_k = E h_k = mu_k and E P_k = mu_k"},
    {"lagrange-general", "moment Lagrange identity for independent vectors"},
    {"lagrange-cov", "covariance Lagrange identity (general, equal variances, same covariance)"},
    {"binet-cauchy-cov", "moment Binet-Cauchy identity and its covariance form"},
    {"lagrange-proportional", "E(X1Y2-X2Y1)^2 = (b2-b1)^2 E(X1X2)^2 when Y_i = b_i X_i"},
    {"correlation-lagrange", "rho^2 = 1 - E(X1Y2-X2Y1)^2 / (2 sigma_X^2 sigma_Y^2), centered"},
}};

struct ScalarMoments {
    double mean;
    double var;
};

template <std::size_t D>
double coordinate_cov(const FiniteDistribution<Vec<D>>& law, std::size_t a, std::size_t b)
{
    const auto m = law.mean();
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < law.size(); ++i) {
        const auto& p = law.support()[i];
        s += law.weights()[i] * (p[a] - m[a]) * (p[b] - m[b]);
    }
    return s.value();
}

template <std::size_t D>
double coordinate_product_mean(const FiniteDistribution<Vec<D>>& law, std::size_t a, std::size_t b)
{
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < law.size(); ++i) {
        const auto& p = law.support()[i];
        s += law.weights()[i] * p[a] * p[b];
    }
    return s.value();
}

template <std::size_t D>
Vec<D> difference(const Vec<D>& a, const Vec<D>& b)
{
    Vec<D> r{};
    for (std::size_t d = 0; d < D; ++d) {
        r[d] = a[d] - b[d];
    }
    return r;
}

inline double raw_moment(const FiniteDistribution<double>& law, int k)
{
    return expect_iid(law, 1, [k](std::span<const double> x) { return ipow(x[0], k); });
}

class CatalogRunner {
public:
    CatalogRunner(const IdentityInputs& in, const IdentityOptions& opt) : in_{in}, opt_{opt} {}

    CheckReport run(std::string_view name)
    {
        report_ = CheckReport{std::string(name), opt_.tolerance, {}};
        if (name == "cov-pairwise") {
            cov_pairwise();
        } else if (name == "var-pairwise") {
            var_pairwise();
        } else if (name == "regression-beta") {
            regression_beta();
        } else if (name == "moment-cov") {
            moment_cov();
        } else if (name == "moment-cov-replicated") {
            moment_cov_replicated();
        } else if (name == "mu3-drep") {
            mu3_drep();
        } else if (name == "mu4-drep") {
            mu4_drep();
        } else if (name == "skew-kurt-drep") {
            skew_kurt_drep();
        } else if (name == "moment-recursion") {
            moment_recursion();
        } else if (name == "recursive-drep") {
            recursive_drep();
        } else if (name == "lagrange-general") {
            lagrange_general();
        } else if (name == "lagrange-cov") {
            lagrange_cov();
        } else if (name == "binet-cauchy-cov") {
            binet_cauchy_cov();
        } else if (name == "lagrange-proportional") {
            lagrange_proportional();
        } else if (name == "correlation-lagrange") {
            correlation_lagrange();
        } else {
            throw std::invalid_argument("unknown identity '" + std::string(name) + "'");
        }
        return std::move(report_);
    }

private:
    using Args = std::span<const double>;
    using Args2 = std::span<const Vec2>;

    void add(std::string label, double lhs, double rhs)
    {
        report_.comparisons.push_back(compare(std::move(label), lhs, rhs, opt_.tolerance));
    }

    template <typename Fn>
    double e(std::size_t m, Fn&& g) const
    {
        return expect_iid(in_.scalar, m, std::forward<Fn>(g), opt_.cap);
    }

    ScalarMoments scalar_moments() const
    {
        return {in_.scalar.mean(), central_moment_exact(in_.scalar, 2)};
    }

    // (a)
    void cov_pairwise()
    {
        const auto& law = in_.pair_first;
        const double c = coordinate_cov(law, 0, 1);
        const auto e2 = [&](auto&& g) { return expect_iid(law, 2, g, opt_.cap); };
        add("1/2 E(X1-X2)(Y1-Y2)", c,
            0.5 * e2([](Args2 z) { return (z[0][0] - z[1][0]) * (z[0][1] - z[1][1]); }));
        add("E X1(Y1-Y2)", c, e2([](Args2 z) { return z[0][0] * (z[0][1] - z[1][1]); }));
        add("-E X2(Y1-Y2)", c, -e2([](Args2 z) { return z[1][0] * (z[0][1] - z[1][1]); }));
        add("E (X1-X2)Y1", c, e2([](Args2 z) { return (z[0][0] - z[1][0]) * z[0][1]; }));
        add("-E (X1-X2)Y2", c, -e2([](Args2 z) { return (z[0][0] - z[1][0]) * z[1][1]; }));
    }

    // (b)
    void var_pairwise()
    {
        const auto [mu, var] = scalar_moments();
        add("1/2 E(X1-X2)^2", var, 0.5 * e(2, [](Args x) { return ipow(x[0] - x[1], 2); }));
        add("E X1(X1-X2)", var, e(2, [](Args x) { return x[0] * (x[0] - x[1]); }));
        add("-E X2(X1-X2)", var, -e(2, [](Args x) { return x[1] * (x[0] - x[1]); }));
        add("E (X1-X3)(X1-X2)", var, e(3, [](Args x) { return (x[0] - x[2]) * (x[0] - x[1]); }));
        add("E X^2 = 1/2 E(X1-X2)^2 + mu^2", raw_moment(in_.scalar, 2),
            0.5 * e(2, [](Args x) { return ipow(x[0] - x[1], 2); }) + mu * mu);
    }

    // (c)
    void regression_beta()
    {
        const auto& law = in_.pair_first;
        const double var_x = coordinate_cov(law, 0, 0);
        if (!(var_x > 0.0)) {
            throw DegenerateInput("regression-beta: X has zero variance");
        }
        const double beta = coordinate_cov(law, 0, 1) / var_x;
        const auto e2 = [&](auto&& g) { return expect_iid(law, 2, g, opt_.cap); };
        add("E(X1-X2)(Y1-Y2) / E(X1-X2)^2", beta,
            e2([](Args2 z) { return (z[0][0] - z[1][0]) * (z[0][1] - z[1][1]); }) /
                e2([](Args2 z) { return ipow(z[0][0] - z[1][0], 2); }));
        add("E(X1-X2)Y1 / E(X1-X2)X1", beta,
            e2([](Args2 z) { return (z[0][0] - z[1][0]) * z[0][1]; }) /
                e2([](Args2 z) { return (z[0][0] - z[1][0]) * z[0][0]; }));
        add("E X1(Y1-Y2) / E X1(X1-X2)", beta,
            e2([](Args2 z) { return z[0][0] * (z[0][1] - z[1][1]); }) /
                e2([](Args2 z) { return z[0][0] * (z[0][0] - z[1][0]); }));
    }

    // (d)
    void moment_cov()
    {
        const auto [mu, var] = scalar_moments();
        const double mu3 = central_moment_exact(in_.scalar, 3);
        const double mu4 = central_moment_exact(in_.scalar, 4);
        const double ex2 = raw_moment(in_.scalar, 2);
        const double ex3 = raw_moment(in_.scalar, 3);
        const double ex4 = raw_moment(in_.scalar, 4);
        const double cov_x_x2 = ex3 - mu * ex2;
        const double cov_x_x3 = ex4 - mu * ex3;

        add("mu3 = C[X,(X-mu)^2]", mu3,
            e(1, [mu](Args x) { return x[0] * ipow(x[0] - mu, 2); }) - mu * var);
        add("mu3 = C[X,X^2] - 2 mu sigma^2", mu3, cov_x_x2 - 2.0 * mu * var);
        add("mu3 = E(X1-X2)(X1-mu)^2", mu3,
            e(2, [mu](Args x) { return (x[0] - x[1]) * ipow(x[0] - mu, 2); }));
        add("mu3 = E(X1-X2)X1^2 - 2 mu sigma^2", mu3,
            e(2, [](Args x) { return (x[0] - x[1]) * x[0] * x[0]; }) - 2.0 * mu * var);
        add("mu3 = 1/2 E(X1-X2)[(X1-mu)^2-(X2-mu)^2]", mu3, 0.5 * e(2, [mu](Args x) {
                return (x[0] - x[1]) * (ipow(x[0] - mu, 2) - ipow(x[1] - mu, 2));
            }));
        add("mu3 = 1/2 E(X1-X2)(X1^2-X2^2) - mu E(X1-X2)^2", mu3,
            0.5 * e(2, [](Args x) { return (x[0] - x[1]) * (x[0] * x[0] - x[1] * x[1]); }) -
                mu * e(2, [](Args x) { return ipow(x[0] - x[1], 2); }));

        add("mu4 = C[X,(X-mu)^3]", mu4,
            e(1, [mu](Args x) { return x[0] * ipow(x[0] - mu, 3); }) - mu * mu3);
        add("mu4 = C[X,X^3] - 3 mu C[X,X^2] + 3 mu^2 sigma^2", mu4,
            cov_x_x3 - 3.0 * mu * cov_x_x2 + 3.0 * mu * mu * var);
        add("mu4 = E(X1-X2)(X1-mu)^3", mu4,
            e(2, [mu](Args x) { return (x[0] - x[1]) * ipow(x[0] - mu, 3); }));
        // The cubic in X1 must carry all three non-constant terms of (X1-mu)^3;
        // the quadratic X1^2 - 2 mu X1 alone reproduces mu3, not mu4.
        add("mu4 = E(X1-X2)(X1^3 - 3 mu X1^2 + 3 mu^2 X1)", mu4, e(2, [mu](Args x) {
                return (x[0] - x[1]) *
                       (ipow(x[0], 3) - 3.0 * mu * x[0] * x[0] + 3.0 * mu * mu * x[0]);
            }));
        add("mu4 = 1/2 E(X1-X2)[(X1-mu)^3-(X2-mu)^3]", mu4, 0.5 * e(2, [mu](Args x) {
                return (x[0] - x[1]) * (ipow(x[0] - mu, 3) - ipow(x[1] - mu, 3));
            }));
        add("mu4 = 1/2 E(X1-X2)(X1^3-X2^3) - 3 mu mu3 - 3 mu^2 sigma^2", mu4,
            0.5 * e(2, [](Args x) { return (x[0] - x[1]) * (ipow(x[0], 3) - ipow(x[1], 3)); }) -
                3.0 * mu * mu3 - 3.0 * mu * mu * var);
    }

    // (e)
    void moment_cov_replicated()
    {
        const double mu = in_.scalar.mean();
        const double mu3 = central_moment_exact(in_.scalar, 3);
        const double mu4 = central_moment_exact(in_.scalar, 4);
        const double ex3 = e(1, [](Args x) { return x[0]; });
        const double d2 = e(2, [](Args x) { return ipow(x[0] - x[1], 2); });
        const double d_sq = e(2, [](Args x) { return (x[0] - x[1]) * (x[0] * x[0] - x[1] * x[1]); });
        const double d_cu = e(2, [](Args x) { return (x[0] - x[1]) * (ipow(x[0], 3) - ipow(x[1], 3)); });
        (void)mu;

        add("mu3 = 1/2 E(X1-X2)(X1^2-X2^2) - E X3 E(X1-X2)^2", mu3, 0.5 * d_sq - ex3 * d2);
        add("mu3 = 1/2 E(X1-X2)[(X1^2-X2^2) - 2 X3 (X1-X2)]", mu3, 0.5 * e(3, [](Args x) {
                const double d = x[0] - x[1];
                return d * ((x[0] * x[0] - x[1] * x[1]) - 2.0 * x[2] * d);
            }));
        add("mu4 = 1/2 E(..)(X1^3-X2^3) - 3/2 E X3 E(..)(X1^2-X2^2) + 3/2 E X3 E X4 E(X1-X2)^2",
            mu4, 0.5 * d_cu - 1.5 * ex3 * d_sq + 1.5 * ex3 * ex3 * d2);
        add("mu4 = 1/2 E[(X1-X2)(X1^3-X2^3) - 3 X3 (X1-X2)(X1^2-X2^2) + 3 X3 X4 (X1-X2)^2]", mu4,
            0.5 * e(4, [](Args x) {
                const double d = x[0] - x[1];
                return d * (ipow(x[0], 3) - ipow(x[1], 3)) -
                       3.0 * x[2] * d * (x[0] * x[0] - x[1] * x[1]) + 3.0 * x[2] * x[3] * d * d;
            }));
    }

    // (f)
    void mu3_drep()
    {
        const double mu3 = central_moment_exact(in_.scalar, 3);
        add("E(X1-X3)(X1-X2)^2", mu3,
            e(3, [](Args x) { return (x[0] - x[2]) * ipow(x[0] - x[1], 2); }));
        add("1/2 E(X1-X2)[(X1-X3)^2-(X2-X3)^2]", mu3, 0.5 * e(3, [](Args x) {
                return (x[0] - x[1]) * (ipow(x[0] - x[2], 2) - ipow(x[1] - x[2], 2));
            }));
        add("1/2 E(X1-X2)^2[(X1-X3)+(X2-X3)]", mu3, 0.5 * e(3, [](Args x) {
                return ipow(x[0] - x[1], 2) * ((x[0] - x[2]) + (x[1] - x[2]));
            }));
        add("1/6 E D1 D2 D3", mu3, e(3, [](Args x) {
                const auto d = sum_of_differences_d3(x);
                return d[0] * d[1] * d[2];
            }) / 6.0);
        add("9/2 E(X1-Xbar)(X2-Xbar)(X3-Xbar)", mu3, 4.5 * e(3, [](Args x) {
                const double m = (x[0] + x[1] + x[2]) / 3.0;
                return (x[0] - m) * (x[1] - m) * (x[2] - m);
            }));
        add("1/2 E[(X1-X3)-(X2-X3)][(X1-X3)^2-(X2-X3)^2]", mu3, 0.5 * e(3, [](Args x) {
                const double a = x[0] - x[2];
                const double b = x[1] - x[2];
                return (a - b) * (a * a - b * b);
            }));
        add("1/2 E[(X1-X3)-(X2-X3)]^2[(X1-X3)+(X2-X3)]", mu3, 0.5 * e(3, [](Args x) {
                const double a = x[0] - x[2];
                const double b = x[1] - x[2];
                return (a - b) * (a - b) * (a + b);
            }));
    }

    // (g)
    void mu4_drep()
    {
        const double var = central_moment_exact(in_.scalar, 2);
        const double mu4 = central_moment_exact(in_.scalar, 4);
        const double d4 = e(2, [](Args x) { return ipow(x[0] - x[1], 4); });
        const double d2 = e(2, [](Args x) { return ipow(x[0] - x[1], 2); });
        add("1/2 E(X1-X2)^4 - 3 sigma^4", mu4, 0.5 * d4 - 3.0 * var * var);
        add("1/2 E(X1-X2)^4 - 3/4 (E(X1-X2)^2)^2", mu4, 0.5 * d4 - 0.75 * d2 * d2);
        add("E[1/2 (X1-X2)^4 - 3/4 (X1-X2)^2 (X3-X4)^2]", mu4, e(4, [](Args x) {
                const double a = ipow(x[0] - x[1], 2);
                return 0.5 * a * a - 0.75 * a * ipow(x[2] - x[3], 2);
            }));
    }

    // (h)
    void skew_kurt_drep()
    {
        const auto [mu, var] = scalar_moments();
        if (!(var > 0.0)) {
            throw DegenerateInput("skew-kurt-drep: zero variance");
        }
        const double sigma = std::sqrt(var);
        const double sigma3 = var * sigma;
        const double skew = central_moment_exact(in_.scalar, 3) / sigma3;
        const double kurt = central_moment_exact(in_.scalar, 4) / (var * var);
        const double d2 = e(2, [](Args x) { return ipow(x[0] - x[1], 2); });
        const double d4 = e(2, [](Args x) { return ipow(x[0] - x[1], 4); });
        const double t3 = e(3, [](Args x) { return (x[0] - x[2]) * ipow(x[0] - x[1], 2); });
        const double ddd = e(3, [](Args x) {
            const auto d = sum_of_differences_d3(x);
            return d[0] * d[1] * d[2];
        });
        const double d2_32 = std::pow(d2, 1.5);
        add("Sk = E(X1-X2)(X1^2-X2^2) / (2 sigma^3) - 2 mu/sigma", skew,
            e(2, [](Args x) { return (x[0] - x[1]) * (x[0] * x[0] - x[1] * x[1]); }) /
                    (2.0 * sigma3) -
                2.0 * mu / sigma);
        add("Sk = E(X1-X3)(X1-X2)^2 / sigma^3", skew, t3 / sigma3);
        add("Sk = sqrt(8) E(X1-X3)(X1-X2)^2 / (E(X1-X2)^2)^(3/2)", skew,
            std::sqrt(8.0) * t3 / d2_32);
        add("Sk = sqrt(2)/3 E D1 D2 D3 / (E(X1-X2)^2)^(3/2)", skew,
            std::sqrt(2.0) / 3.0 * ddd / d2_32);
        add("Kur = 2 E(X1-X2)^4 / (E(X1-X2)^2)^2 - 3", kurt, 2.0 * d4 / (d2 * d2) - 3.0);
    }

    // (i)
    void moment_recursion()
    {
        const double mu = in_.scalar.mean();
        std::vector<double> m(static_cast<std::size_t>(opt_.max_order) + 1, 0.0);
        for (int k = 1; k <= opt_.max_order; ++k) {
            m[static_cast<std::size_t>(k)] = central_moment_exact(in_.scalar, k);
        }
        auto mom = [&](int k) { return m[static_cast<std::size_t>(k)]; };
        for (int n = 1; n + 1 <= opt_.max_order; ++n) {
            const double target = mom(n + 1);
            const std::string lbl = "mu_" + std::to_string(n + 1);
            add(lbl + " = E X(X-mu)^n - mu mu_n", target,
                e(1, [mu, n](Args x) { return x[0] * ipow(x[0] - mu, n); }) - mu * mom(n));
            add(lbl + " = E(X1-X2)(X1-mu)^n", target,
                e(2, [mu, n](Args x) { return (x[0] - x[1]) * ipow(x[0] - mu, n); }));
            double correction = 0.0;
            for (int j = 2; j <= n - 1; ++j) {
                const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                correction += sign * static_cast<double>(binomial(n, j)) * mom(j) * mom(n + 1 - j);
            }
            add(lbl + " = E(X1-X3)(X1-X2)^n - sum", target,
                e(3, [n](Args x) { return (x[0] - x[2]) * ipow(x[0] - x[1], n); }) - correction);
            if ((n + 1) % 2 == 0) {
                double even_corr = 0.0;
                for (int j = 2; j <= n - 1; ++j) {
                    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                    even_corr +=
                        sign * static_cast<double>(binomial(n + 1, j)) * mom(j) * mom(n + 1 - j);
                }
                add(lbl + " = 1/2 [E(X1-X2)^(n+1) - sum]", target,
                    0.5 * (e(2, [n](Args x) { return ipow(x[0] - x[1], n + 1); }) - even_corr));
            }
        }
    }

    // (j)
    void recursive_drep()
    {
        for (int k = 2; k <= opt_.max_order; ++k) {
            const double target = central_moment_exact(in_.scalar, k);
            // One pass over the k-fold product space; P_{k-1} also takes exactly k
            // replications. Block tables are refreshed only where the odometer moved.
            std::optional<BlockEvaluator<Family::H>> h;
            std::optional<BlockEvaluator<Family::MuBar>> bar;
            const auto e = expect_iid_many<4>(
                in_.scalar, static_cast<std::size_t>(k),
                [&](Args x, std::size_t first_changed, std::span<double> out) {
                    if (first_changed == 0 || !h) {
                        h.emplace(x, k);
                        bar.emplace(x, k);
                    } else {
                        h->refresh(static_cast<int>(first_changed));
                        bar->refresh(static_cast<int>(first_changed));
                    }
                    out[0] = bar->eval(0, k);
                    out[1] = k % 2 == 0 ? mu_tilde_from(*bar, x, k) : 0.0;
                    out[2] = h->eval(0, k);
                    out[3] = k >= 3 ? kernel_p(x[0], x.subspan(1)) : 0.0;
                },
                opt_.cap);
            const std::string sfx = "_" + std::to_string(k);
            add("E mu_bar" + sfx, target, e[0]);
            if (k % 2 == 0) {
                add("E mu_tilde" + sfx, target, e[1]);
            }
            add("E h" + sfx, target, e[2]);
            if (k >= 3) {
                add("E P_" + std::to_string(k - 1), central_moment_exact(in_.scalar, k - 1), e[3]);
            }
        }
    }

    // (k)
    void lagrange_general()
    {
        const auto& p1 = in_.pair_first;
        const auto& p2 = in_.pair_second;
        const double lhs = 0.5 * (coordinate_product_mean(p1, 0, 0) * coordinate_product_mean(p2, 1, 1) +
                                  coordinate_product_mean(p2, 0, 0) * coordinate_product_mean(p1, 1, 1)) -
                           coordinate_product_mean(p1, 0, 1) * coordinate_product_mean(p2, 0, 1);
        const double rhs = 0.5 * expect_pair(p1, p2, [](Args2 z) {
                               return ipow(z[0][0] * z[1][1] - z[1][0] * z[0][1], 2);
                           }, opt_.cap);
        add("1/2(E X1^2 E Y2^2 + E X2^2 E Y1^2) - E X1Y1 E X2Y2 = 1/2 E(X1Y2-X2Y1)^2", lhs, rhs);
        add("1/2 E(X1Y2-X2Y1)^2 >= 0", std::min(rhs, 0.0), 0.0);
        const double cs_gap = 0.5 * (coordinate_cov(p1, 0, 0) * coordinate_cov(p2, 1, 1) +
                                     coordinate_cov(p2, 0, 0) * coordinate_cov(p1, 1, 1)) -
                              coordinate_cov(p1, 0, 1) * coordinate_cov(p2, 0, 1);
        add("C1 C2 <= 1/2(sx1 sy2 + sx2 sy1)", std::min(cs_gap, 0.0), 0.0);
    }

    static double centered_cross_sq(Args2 z, const Vec2& m1, const Vec2& m2)
    {
        const double x1 = z[0][0] - m1[0];
        const double y1 = z[0][1] - m1[1];
        const double x2 = z[1][0] - m2[0];
        const double y2 = z[1][1] - m2[1];
        return ipow(x1 * y2 - x2 * y1, 2);
    }

    double centered_lagrange_rhs(const FiniteDistribution<Vec2>& p1,
                                 const FiniteDistribution<Vec2>& p2) const
    {
        const Vec2 m1 = p1.mean();
        const Vec2 m2 = p2.mean();
        return 0.5 * expect_pair(p1, p2, [&](Args2 z) { return centered_cross_sq(z, m1, m2); },
                                 opt_.cap);
    }

    // (l)
    void lagrange_cov()
    {
        const auto& p1 = in_.pair_first;
        const auto& p2 = in_.pair_second;
        add("1/2(sX1 sY2 + sX2 sY1) - C1 C2 = 1/2 E(X1Y2-X2Y1)^2 (centered)",
            0.5 * (coordinate_cov(p1, 0, 0) * coordinate_cov(p2, 1, 1) +
                   coordinate_cov(p2, 0, 0) * coordinate_cov(p1, 1, 1)) -
                coordinate_cov(p1, 0, 1) * coordinate_cov(p2, 0, 1),
            centered_lagrange_rhs(p1, p2));

        // second vector: same covariance matrix as the first, different mean
        const auto shifted = p1.translated(difference(p2.mean(), p1.mean()));
        const double rhs = centered_lagrange_rhs(p1, shifted);
        add("equal variances: sX1 sY1 - C1 C2",
            coordinate_cov(p1, 0, 0) * coordinate_cov(p1, 1, 1) -
                coordinate_cov(p1, 0, 1) * coordinate_cov(shifted, 0, 1),
            rhs);
        add("same covariance: sX1 sY1 - C1^2",
            coordinate_cov(p1, 0, 0) * coordinate_cov(p1, 1, 1) - ipow(coordinate_cov(p1, 0, 1), 2),
            rhs);
    }

    // (m)
    void binet_cauchy_cov()
    {
        using Args4 = std::span<const Vec4>;
        enum : std::size_t { A = 0, B = 1, C = 2, D = 3 };
        const auto& q1 = in_.quad_first;
        const auto& q2 = in_.quad_second;
        const auto pm = [](const auto& q, std::size_t i, std::size_t j) {
            return coordinate_product_mean(q, i, j);
        };
        const double lhs = expect_pair(q1, q2, [](Args4 z) {
            return (z[0][A] * z[1][B] - z[1][A] * z[0][B]) * (z[0][C] * z[1][D] - z[1][C] * z[0][D]);
        }, opt_.cap);
        add("E(A1B2-A2B1)(C1D2-C2D1) = E A1C1 E B2D2 + E A2C2 E B1D1 - [..]", lhs,
            pm(q1, A, C) * pm(q2, B, D) + pm(q2, A, C) * pm(q1, B, D) -
                (pm(q1, A, D) * pm(q2, B, C) + pm(q2, A, D) * pm(q1, B, C)));

        const auto shifted = q1.translated(difference(q2.mean(), q1.mean()));
        const Vec4 m1 = q1.mean();
        const Vec4 m2 = shifted.mean();
        const double rhs = 0.5 * expect_pair(q1, shifted, [&](Args4 z) {
            const auto c = [&](std::size_t r, std::size_t i) {
                return z[r][i] - (r == 0 ? m1[i] : m2[i]);
            };
            return (c(0, A) * c(1, B) - c(1, A) * c(0, B)) * (c(0, C) * c(1, D) - c(1, C) * c(0, D));
        }, opt_.cap);
        add("C[A,C]C[B,D] - C[A,D]C[B,C] = 1/2 E(..centered..)",
            coordinate_cov(q1, A, C) * coordinate_cov(q1, B, D) -
                coordinate_cov(q1, A, D) * coordinate_cov(q1, B, C),
            rhs);

        const double lag = 0.5 * expect_pair(q1, shifted, [&](Args4 z) {
            const double a1 = z[0][A] - m1[A];
            const double b1 = z[0][B] - m1[B];
            const double a2 = z[1][A] - m2[A];
            const double b2 = z[1][B] - m2[B];
            return ipow(a1 * b2 - a2 * b1, 2);
        }, opt_.cap);
        add("A=C, B=D: sA sB - C[A,B]^2 = 1/2 E(A1B2-A2B1)^2 (centered)",
            coordinate_cov(q1, A, A) * coordinate_cov(q1, B, B) - ipow(coordinate_cov(q1, A, B), 2),
            lag);
    }

    // (n)
    void lagrange_proportional()
    {
        const auto x1 = in_.pair_first.marginal(0);
        const auto x2 = in_.pair_second.marginal(0);
        const double b1 = in_.b1;
        const double b2 = in_.b2;
        const double cross = expect_pair(x1, x2, [b1, b2](Args x) {
            return ipow(x[0] * (b2 * x[1]) - x[1] * (b1 * x[0]), 2);
        }, opt_.cap);
        const double prod = expect_pair(x1, x2, [](Args x) { return ipow(x[0] * x[1], 2); },
                                        opt_.cap);
        add("E(X1Y2-X2Y1)^2 = (b2-b1)^2 E(X1X2)^2", cross, (b2 - b1) * (b2 - b1) * prod);
        add("b1 = b2 gives zero", expect_pair(x1, x2, [b1](Args x) {
                return ipow(x[0] * (b1 * x[1]) - x[1] * (b1 * x[0]), 2);
            }, opt_.cap), 0.0);
    }

    // (o)
    void correlation_lagrange()
    {
        const auto& p1 = in_.pair_first;
        const double vx = coordinate_cov(p1, 0, 0);
        const double vy = coordinate_cov(p1, 1, 1);
        if (!(vx > 0.0) || !(vy > 0.0)) {
            throw DegenerateInput("correlation-lagrange: zero variance");
        }
        const double c = coordinate_cov(p1, 0, 1);
        const double rho2 = c * c / (vx * vy);
        add("rho^2 = 1 - E(X1Y2-X2Y1)^2/(2 sX sY), iid", rho2,
            1.0 - 2.0 * centered_lagrange_rhs(p1, p1) / (2.0 * vx * vy));
        const auto shifted = p1.translated(difference(in_.pair_second.mean(), p1.mean()));
        add("rho^2 = 1 - E(X1Y2-X2Y1)^2/(2 sX sY), same covariance", rho2,
            1.0 - 2.0 * centered_lagrange_rhs(p1, shifted) / (2.0 * vx * vy));
    }

    const IdentityInputs& in_;
    const IdentityOptions& opt_;
    CheckReport report_;
};

template <typename Point>
FiniteDistribution<Point> random_law(RngStream& rng, int max_support)
{
    const auto size = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_support - 1)));
    std::vector<Point> support(static_cast<std::size_t>(size));
    std::vector<double> weights(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        auto& p = support[static_cast<std::size_t>(i)];
        if constexpr (std::is_same_v<Point, double>) {
            p = -2.0 + 4.0 * rng.uniform();
        } else {
            for (auto& c : p) {
                c = -2.0 + 4.0 * rng.uniform();
            }
        }
        // exponential spacings normalized: a flat draw on the simplex
        weights[static_cast<std::size_t>(i)] = rng.exponential(1.0);
    }
    return FiniteDistribution<Point>(std::move(support), std::move(weights));
}

}  // namespace detail

/// The catalog: 15 stable names, in a fixed order.
inline std::span<const IdentityEntry> identity_catalog() noexcept
{
    return detail::kIdentityCatalog;
}

/// Evaluate one catalog identity. Throws std::invalid_argument for unknown
/// names, CapExceeded when an enumeration is too large and DegenerateInput
/// when a ratio identity meets zero variance.
inline CheckReport verify_identity(std::string_view name, const IdentityInputs& inputs,
                                   const IdentityOptions& options = {})
{
    if (options.max_order < 2 || options.max_order > kMaxOrder) {
        throw std::invalid_argument("verify_identity: max_order outside [2, K_MAX]");
    }
    detail::CatalogRunner runner{inputs, options};
    return runner.run(name);
}

/// Random laws for property runs: support size uniform in [2, max_support],
/// points uniform on [-2, 2] (per coordinate), weights flat on the simplex.
inline IdentityInputs random_identity_inputs(RngStream& rng, int max_support = 6)
{
    if (max_support < 2) {
        throw std::invalid_argument("random_identity_inputs: max_support must be >= 2");
    }
    auto scalar = detail::random_law<double>(rng, max_support);
    auto p1 = detail::random_law<Vec2>(rng, max_support);
    auto p2 = detail::random_law<Vec2>(rng, max_support);
    auto q1 = detail::random_law<Vec4>(rng, max_support);
    auto q2 = detail::random_law<Vec4>(rng, max_support);
    const double b1 = -2.0 + 4.0 * rng.uniform();
    const double b2 = -2.0 + 4.0 * rng.uniform();
    return IdentityInputs{std::move(scalar), std::move(p1), std::move(p2), std::move(q1),
                          std::move(q2), b1, b2};
}

}  // namespace dmoments
