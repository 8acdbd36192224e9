#pragma once

// Brute-force expectations over finite-support laws.
//
// E{ g(Z_1, ..., Z_m) } with Z_i independent, Z_i ~ laws[i], is the weighted sum
// of g over the full product of supports. Every population identity in the
// toolkit is checked against this engine; nothing here uses closed forms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmoments/compensated_sum.hpp"
#include "dmoments/errors.hpp"
#include "dmoments/finite_distribution.hpp"
#include "dmoments/kernels.hpp"

namespace dmoments {

/// Default ceiling on the number of product-space states enumerated.
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Number of product-space states, or throws CapExceeded.
template <typename Point>
std::uint64_t product_state_count(std::span<const FiniteDistribution<Point>* const> laws,
                                  std::uint64_t cap = kDefaultEnumerationCap)
{
    std::uint64_t states = 1;
    for (const auto* law : laws) {
        const auto s = static_cast<std::uint64_t>(law->size());
        if (states > cap / s) {
            throw CapExceeded("exact expectation: product space exceeds enumeration cap of " +
                              std::to_string(cap) + " states");
        }
        states *= s;
    }
    return states;
}

namespace detail {

/// Odometer over the product of supports with running partial weight
/// products; calls visit(weight, std::span<const Point>, first_changed) once
/// per state in a fixed order, where coordinates before `first_changed` are
/// the same as in the previous call (0 on the first call).
template <typename Point, typename Visit>
void enumerate_product(std::span<const FiniteDistribution<Point>* const> laws, Visit&& visit,
                       std::uint64_t cap)
{
    const std::size_t m = laws.size();
    if (m == 0) {
        throw std::invalid_argument("exact expectation: need at least one replication");
    }
    product_state_count(laws, cap);

    std::vector<std::size_t> digit(m, 0);
    std::vector<Point> point(m);
    // prefix[d] = product of the weights chosen at depths < d
    std::vector<double> prefix(m + 1, 1.0);
    for (std::size_t d = 0; d < m; ++d) {
        point[d] = laws[d]->support()[0];
        prefix[d + 1] = prefix[d] * laws[d]->weights()[0];
    }
    const std::span<const Point> args{point};
    std::size_t first_changed = 0;
    for (;;) {
        visit(prefix[m], args, first_changed);

        std::size_t d = m;
        while (d > 0) {
            --d;
            if (++digit[d] < laws[d]->size()) {
                break;
            }
            digit[d] = 0;
            if (d == 0) {
                return;
            }
        }
        for (std::size_t e = d; e < m; ++e) {
            point[e] = laws[e]->support()[digit[e]];
            prefix[e + 1] = prefix[e] * laws[e]->weights()[digit[e]];
        }
        first_changed = d;
    }
}

}  // namespace detail

/// E{ g(Z_1..Z_m) } for independent Z_i ~ *laws[i]. `g` receives std::span<const Point>.
/// Terms are accumulated with compensated summation in a fixed order, so the
/// result is deterministic.
template <typename Point, typename Fn>
double expect_product(std::span<const FiniteDistribution<Point>* const> laws, Fn&& g,
                      std::uint64_t cap = kDefaultEnumerationCap)
{
    CompensatedSum<double> acc;
    detail::enumerate_product<Point>(
        laws, [&](double w, std::span<const Point> z, std::size_t) { acc += w * g(z); }, cap);
    return acc.value();
}

/// Several expectations over the same i.i.d. product space in one pass.
/// `g(z, first_changed, out)` writes N values into the std::span<double> `out`;
/// z[0..first_changed) is unchanged since the previous call, which lets `g`
/// reuse partial results.
template <std::size_t N, typename Point, typename Fn>
std::array<double, N> expect_iid_many(const FiniteDistribution<Point>& law, std::size_t m, Fn&& g,
                                      std::uint64_t cap = kDefaultEnumerationCap)
{
    const std::vector<const FiniteDistribution<Point>*> laws(m, &law);
    std::array<CompensatedSum<double>, N> acc{};
    std::array<double, N> values{};
    detail::enumerate_product<Point>(
        std::span<const FiniteDistribution<Point>* const>{laws},
        [&](double w, std::span<const Point> z, std::size_t first_changed) {
            g(z, first_changed, std::span<double>{values});
            for (std::size_t i = 0; i < N; ++i) {
                acc[i] += w * values[i];
            }
        },
        cap);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = acc[i].value();
    }
    return out;
}

/// E{ g(Z_1..Z_m) } with Z_1..Z_m i.i.d. from `law`.
template <typename Point, typename Fn>
double expect_iid(const FiniteDistribution<Point>& law, std::size_t m, Fn&& g,
                  std::uint64_t cap = kDefaultEnumerationCap)
{
    if (m == 0) {
        throw std::invalid_argument("expect_iid: replication count must be >= 1");
    }
    const std::vector<const FiniteDistribution<Point>*> laws(m, &law);
    return expect_product<Point>(std::span<const FiniteDistribution<Point>* const>{laws},
                                 std::forward<Fn>(g), cap);
}

/// Two independent (not necessarily identically distributed) replications.
template <typename Point, typename Fn>
double expect_pair(const FiniteDistribution<Point>& first, const FiniteDistribution<Point>& second,
                   Fn&& g, std::uint64_t cap = kDefaultEnumerationCap)
{
    const std::array<const FiniteDistribution<Point>*, 2> laws{&first, &second};
    return expect_product<Point>(std::span<const FiniteDistribution<Point>* const>{laws},
                                 std::forward<Fn>(g), cap);
}

/// mu_k = E{(X - mu_X)^k}; exactly 0 for k = 1.
inline double central_moment_exact(const FiniteDistribution<double>& law, int k)
{
    if (k < 1) {
        throw std::invalid_argument("central_moment_exact: order must be >= 1");
    }
    if (k == 1) {
        return 0.0;
    }
    const double mean = law.mean();
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < law.size(); ++i) {
        s += law.weights()[i] * detail::ipow(law.support()[i] - mean, k);
    }
    return s.value();
}

/// One side-by-side comparison inside a check report.
struct Comparison {
    std::string label;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;  // |lhs - rhs| / scale
    double scale = 1.0;     // max(1, |lhs|, |rhs|) unless stated otherwise
    bool pass = false;
};

struct CheckReport {
    std::string name;
    double tolerance = 0.0;
    std::vector<Comparison> comparisons;

    [[nodiscard]] bool passed() const
    {
        return !comparisons.empty() &&
               std::all_of(comparisons.begin(), comparisons.end(),
                           [](const Comparison& c) { return c.pass; });
    }
    [[nodiscard]] double worst_rel_diff() const
    {
        double w = 0.0;
        for (const auto& c : comparisons) {
            w = std::max(w, c.rel_diff);
        }
        return w;
    }
};

/// Pass iff |lhs - rhs| <= tol * max(1, |lhs|, |rhs|, extra_scale).
inline Comparison compare(std::string label, double lhs, double rhs, double tol,
                          double extra_scale = 0.0)
{
    Comparison c;
    c.label = std::move(label);
    c.lhs = lhs;
    c.rhs = rhs;
    c.abs_diff = std::abs(lhs - rhs);
    c.scale = std::max({1.0, std::abs(lhs), std::abs(rhs), std::abs(extra_scale)});
    c.rel_diff = c.abs_diff / c.scale;
    c.pass = std::isfinite(c.abs_diff) && c.rel_diff <= tol;
    return c;
}

/// E{(X_1 - X_2)^j} = 0 for every odd j <= max_odd_order (X_1 - X_2 is symmetric about 0).
/// Each value is judged against the scale max(1, E|X_1 - X_2|^j).
inline CheckReport odd_moment_symmetry_check(const FiniteDistribution<double>& law,
                                             int max_odd_order, double tol = 1e-10,
                                             std::uint64_t cap = kDefaultEnumerationCap)
{
    if (max_odd_order < 1 || max_odd_order > 2 * kMaxOrder - 1) {
        throw std::invalid_argument("odd_moment_symmetry_check: max order outside [1, 2*K_MAX-1]");
    }
    CheckReport report{"odd-difference-moments", tol, {}};
    for (int j = 1; j <= max_odd_order; j += 2) {
        const double value = expect_iid(
            law, 2, [j](std::span<const double> x) { return detail::ipow(x[0] - x[1], j); }, cap);
        const double magnitude = expect_iid(
            law, 2,
            [j](std::span<const double> x) { return std::abs(detail::ipow(x[0] - x[1], j)); }, cap);
        report.comparisons.push_back(
            compare("E(X1-X2)^" + std::to_string(j), value, 0.0, tol, magnitude));
    }
    return report;
}

}  // namespace dmoments
