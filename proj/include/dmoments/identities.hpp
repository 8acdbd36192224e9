#pragma once

// Summation identities on real vectors. Each check computes both sides
// independently and reports the discrepancy.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "dmoments/compensated_sum.hpp"
#include "dmoments/estimators.hpp"

namespace dmoments {

struct IdentityReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;  // abs_diff / max(1, |lhs|, |rhs|)

    [[nodiscard]] bool passed(double tol = 1e-10) const { return std::isfinite(rel_diff) && rel_diff <= tol; }
};

enum class PairwiseForm {
    Triangular,  // sum over i < j
    Full,        // sum over all (i, j), halved
};

namespace detail {

inline IdentityReport make_report(std::string name, double lhs, double rhs)
{
    IdentityReport r{std::move(name), lhs, rhs, std::abs(lhs - rhs), 0.0};
    r.rel_diff = r.abs_diff / std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return r;
}

inline void require_lengths(std::span<const double> a, std::span<const double> b, const char* what)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": vectors differ in length");
    }
}

/// sum over pairs of (a_i b_j - a_j b_i)(c_i d_j - c_j d_i)
inline double pairwise_determinant_sum(std::span<const double> a, std::span<const double> b,
                                       std::span<const double> c, std::span<const double> d,
                                       PairwiseForm form)
{
    CompensatedSum<double> s;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = form == PairwiseForm::Triangular ? i + 1 : 0;
        for (std::size_t j = j0; j < n; ++j) {
            s += difference_of_products(a[i], b[j], a[j], b[i]) *
                 difference_of_products(c[i], d[j], c[j], d[i]);
        }
    }
    return form == PairwiseForm::Triangular ? s.value() : 0.5 * s.value();
}

inline double gini_pairwise_side(std::span<const double> x, std::span<const double> y,
                                 PairwiseForm form)
{
    CompensatedSum<double> s;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = form == PairwiseForm::Triangular ? i + 1 : 0;
        for (std::size_t j = j0; j < n; ++j) {
            s += (x[i] - x[j]) * (y[i] - y[j]);
        }
    }
    const auto nd = static_cast<double>(n);
    const double pairs = form == PairwiseForm::Triangular ? nd * (nd - 1.0) : 2.0 * nd * (nd - 1.0);
    return s.value() / pairs;
}

inline double centred_side(std::span<const double> x, std::span<const double> y)
{
    const double mx = compensated_mean(x);
    const double my = compensated_mean(y);
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - mx) * (y[i] - my);
    }
    return s.value() / (static_cast<double>(x.size()) - 1.0);
}

}  // namespace detail

/// sum (x_i - xbar)(y_i - ybar)/(n-1) against the pairwise form.
inline IdentityReport check_gini_covariance(std::span<const double> x, std::span<const double> y,
                                            PairwiseForm form = PairwiseForm::Triangular)
{
    detail::require_lengths(x, y, "check_gini_covariance");
    detail::require_sample(x, 2, "check_gini_covariance");
    detail::require_sample(y, 2, "check_gini_covariance");
    return detail::make_report("gini-covariance", detail::centred_side(x, y),
                               detail::gini_pairwise_side(x, y, form));
}

inline IdentityReport check_gini_variance(std::span<const double> x,
                                          PairwiseForm form = PairwiseForm::Triangular)
{
    auto r = check_gini_covariance(x, x, form);
    r.name = "gini-variance";
    return r;
}

/// (sum a c)(sum b d) - (sum a d)(sum b c) = sum_{i<j} (a_i b_j - a_j b_i)(c_i d_j - c_j d_i).
inline IdentityReport check_binet_cauchy(std::span<const double> a, std::span<const double> b,
                                         std::span<const double> c, std::span<const double> d,
                                         PairwiseForm form = PairwiseForm::Triangular)
{
    detail::require_lengths(a, b, "check_binet_cauchy");
    detail::require_lengths(a, c, "check_binet_cauchy");
    detail::require_lengths(a, d, "check_binet_cauchy");
    const double ac = accurate_dot(a, c);
    const double bd = accurate_dot(b, d);
    const double ad = accurate_dot(a, d);
    const double bc = accurate_dot(b, c);
    return detail::make_report("binet-cauchy", difference_of_products(ac, bd, ad, bc),
                               detail::pairwise_determinant_sum(a, b, c, d, form));
}

struct LagrangeReport {
    IdentityReport identity;
    bool nonnegative = true;  // lhs >= -1e-12 (Cauchy-Schwarz)
    bool proportional = true; // every 2x2 determinant x_i y_j - x_j y_i vanishes
};

/// (sum x^2)(sum y^2) - (sum xy)^2 = sum_{i<j} (x_i y_j - x_j y_i)^2.
inline LagrangeReport check_lagrange(std::span<const double> x, std::span<const double> y,
                                     PairwiseForm form = PairwiseForm::Triangular)
{
    LagrangeReport out;
    out.identity = check_binet_cauchy(x, y, x, y, form);
    out.identity.name = "lagrange";
    out.nonnegative = out.identity.lhs >= -1e-12;
    for (std::size_t i = 0; i < x.size() && out.proportional; ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            if (difference_of_products(x[i], y[j], x[j], y[i]) != 0.0) {
                out.proportional = false;
                break;
            }
        }
    }
    return out;
}

}  // namespace dmoments
