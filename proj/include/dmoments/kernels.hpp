#pragma once

// Location-free polynomial kernels whose expectation under i.i.d. replications
// is a central moment:
//
//   kernel_h         minimal unbiased kernels h_k (symmetrized h_3 base)
//   kernel_mu_bar    the recursive family mu_bar_k (raw mu_bar_3 base)
//   kernel_mu_tilde  the even-order family mu_tilde_k
//   kernel_p         the product kernel prod_i (x0 - x_i), k+1 replications
//
// All kernels depend on their arguments only through pairwise differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "dmoments/compensated_sum.hpp"

#ifndef DMOMENTS_MAX_ORDER
#define DMOMENTS_MAX_ORDER 16
#endif

namespace dmoments {

/// Largest kernel order supported (K_MAX). Binomials up to 2*K_MAX are exact in 64 bits.
inline constexpr int kMaxOrder = DMOMENTS_MAX_ORDER;
static_assert(kMaxOrder >= 4 && kMaxOrder <= 30, "binomial(2*K_MAX, K_MAX) must fit in uint64");

/// Moment order k with 2 <= k <= kMaxOrder (1 is admitted for mu_bar, where mu_bar_1 = 0).
class KernelOrder {
public:
    constexpr explicit KernelOrder(int k, int min_order = 2) : k_{k}
    {
        if (k < min_order || k > kMaxOrder) {
            throw std::invalid_argument("kernel order " + std::to_string(k) + " outside [" +
                                        std::to_string(min_order) + ", " +
                                        std::to_string(kMaxOrder) + "]");
        }
    }
    [[nodiscard]] constexpr int value() const noexcept { return k_; }
    constexpr operator int() const noexcept { return k_; }

private:
    int k_;
};

/// Exact n choose j for 0 <= j <= n <= 2*kMaxOrder.
constexpr std::uint64_t binomial(int n, int j)
{
    if (n < 0 || j < 0 || j > n) {
        throw std::invalid_argument("binomial: need 0 <= j <= n");
    }
    if (n > 2 * kMaxOrder) {
        throw std::invalid_argument("binomial: n exceeds 2*K_MAX");
    }
    if (j > n - j) {
        j = n - j;
    }
    std::uint64_t r = 1;
    // r * (n - i) is always divisible by (i + 1) after the multiplication
    for (int i = 0; i < j; ++i) {
        r = r * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    }
    return r;
}

namespace detail {

inline constexpr auto kBinomialTable = [] {
    std::array<std::array<double, 2 * kMaxOrder + 1>, 2 * kMaxOrder + 1> t{};
    for (int n = 0; n <= 2 * kMaxOrder; ++n) {
        for (int j = 0; j <= n; ++j) {
            t[n][j] = static_cast<double>(binomial(n, j));
        }
    }
    return t;
}();

template <typename T>
constexpr T ipow(T base, int e) noexcept
{
    T r{1.0};
    bool first = true;
    while (e > 0) {
        if (e & 1) {
            r = first ? base : r * base;
            first = false;
        }
        e >>= 1;
        if (e > 0) {
            base = base * base;
        }
    }
    return r;
}

inline void require_arity(std::size_t got, int want, const char* what)
{
    if (got != static_cast<std::size_t>(want)) {
        throw std::invalid_argument(std::string(what) + ": expected tuple of length " +
                                    std::to_string(want) + ", got " + std::to_string(got));
    }
}

enum class Family { H, MuBar };

/// Values of the kernel family on every contiguous block of a tuple.
///
/// The order-L recursion only combines a leading block with the block that
/// follows it, so filling the table by increasing length evaluates each
/// block exactly once. Blocks are carried in double-double: at order 10 the
/// recursion cancels about four decimal digits. The table keeps a view of `x`: after the caller
/// changes x[from..], refresh(from) recomputes only the blocks reaching it.
template <Family F>
class BlockEvaluator {
public:
    BlockEvaluator(std::span<const double> x, int max_len) : x_{x}, max_len_{max_len}
    {
        refresh(0);
    }

    void refresh(int from)
    {
        for (int len = 2; len <= max_len_; ++len) {
            for (int off = std::max(0, from - len + 1); off + len <= max_len_; ++off) {
                table_[slot(off, len)] = compute(off, len);
            }
        }
    }

    [[nodiscard]] double eval(int offset, int len) const { return eval_dd(offset, len).value(); }

    [[nodiscard]] DoubleDouble eval_dd(int offset, int len) const
    {
        return len < 2 ? DoubleDouble{} : table_[slot(offset, len)];
    }

private:
    static constexpr std::size_t slot(int off, int len) noexcept
    {
        return static_cast<std::size_t>(off) * (kMaxOrder + 1) + static_cast<std::size_t>(len);
    }

    DoubleDouble compute(int off, int len) const
    {
        const double* x = x_.data() + off;
        const auto d12 = DoubleDouble::difference(x[0], x[1]);
        switch (len) {
            case 2:
                return d12 * d12 * 0.5;
            case 3: {
                const auto d13 = DoubleDouble::difference(x[0], x[2]);
                if constexpr (F == Family::H) {
                    return d12 * d12 * (d13 + DoubleDouble::difference(x[1], x[2])) * 0.5;
                } else {
                    return d13 * d12 * d12;
                }
            }
            case 4: {
                const auto d34 = DoubleDouble::difference(x[2], x[3]);
                const auto s12 = d12 * d12;
                return s12 * (s12 * 0.5 - d34 * d34 * 0.75);
            }
            default:
                break;
        }
        // order len = m + 1 with m >= 4:
        // (x1 - x3)(x1 - x2)^m - sum_{j=2}^{m-1} (-1)^j C(m, j) f_j(x_1..x_j) f_{m+1-j}(x_{j+1}..)
        const int m = len - 1;
        DoubleDouble acc = DoubleDouble::difference(x[0], x[2]) * ipow(d12, m);
        for (int j = 2; j <= m - 1; ++j) {
            const DoubleDouble term = eval_dd(off, j) * eval_dd(off + j, len - j) * kBinomialTable[m][j];
            acc = (j % 2 == 0) ? acc - term : acc + term;
        }
        return acc;
    }

    std::span<const double> x_;
    int max_len_;
    std::array<DoubleDouble, (kMaxOrder + 1) * (kMaxOrder + 1)> table_;  // filled for len >= 2
};

}  // namespace detail

/// Minimal unbiased kernel h_k(x_1..x_k): E h_k(X_1..X_k) = mu_k for i.i.d. X_i.
///
/// h_2 = (x1-x2)^2 / 2, h_3 = (x1-x2)^2 [(x1-x3)+(x2-x3)] / 2,
/// h_4 = (x1-x2)^4 / 2 - 3/4 (x1-x2)^2 (x3-x4)^2, and for k >= 5 the recursion
/// with disjoint argument blocks.
inline double kernel_h(KernelOrder k, std::span<const double> x)
{
    detail::require_arity(x.size(), k, "kernel_h");
    detail::BlockEvaluator<detail::Family::H> ev{x, k};
    return ev.eval(0, k);
}

/// mu_bar_k(x_1..x_k). Accepts k = 1 (mu_bar_1 = 0, tuple of length 0 or 1).
///
/// Differs from kernel_h as a function from k = 3 on (mu_bar_3 is the raw
/// (x1-x3)(x1-x2)^2 form); both have expectation mu_k.
inline double kernel_mu_bar(int k, std::span<const double> x)
{
    const KernelOrder order{k, 1};
    if (order == 1) {
        if (x.size() > 1) {
            throw std::invalid_argument("kernel_mu_bar: order 1 takes at most one argument");
        }
        return 0.0;
    }
    detail::require_arity(x.size(), order, "kernel_mu_bar");
    detail::BlockEvaluator<detail::Family::MuBar> ev{x, order};
    return ev.eval(0, order);
}

namespace detail {

inline double mu_tilde_from(const BlockEvaluator<Family::MuBar>& ev, std::span<const double> x, int k)
{
    DoubleDouble acc = ipow(DoubleDouble::difference(x[0], x[1]), k);
    for (int j = 2; j <= k - 2; ++j) {
        const DoubleDouble term = ev.eval_dd(0, j) * ev.eval_dd(j, k - j) * kBinomialTable[k][j];
        acc = (j % 2 == 0) ? acc - term : acc + term;
    }
    return (acc * 0.5).value();
}

}  // namespace detail

/// mu_tilde_k for even k:
/// (1/2) [ (x1-x2)^k - sum_{j=2}^{k-2} (-1)^j C(k,j) mu_bar_j(x_1..x_j) mu_bar_{k-j}(x_{j+1}..x_k) ].
/// The inner factors use mu_bar throughout (mu_tilde_j would be equally valid for even j).
inline double kernel_mu_tilde(KernelOrder k, std::span<const double> x)
{
    if (k % 2 != 0) {
        throw std::invalid_argument("kernel_mu_tilde: order must be even");
    }
    detail::require_arity(x.size(), k, "kernel_mu_tilde");
    detail::BlockEvaluator<detail::Family::MuBar> ev{x, k};
    return detail::mu_tilde_from(ev, x, k);
}

struct MuBarTilde {
    double bar;
    double tilde;  // NaN for odd k
};

/// mu_bar_k and mu_tilde_k on the same tuple, sharing their common sub-blocks.
inline MuBarTilde kernel_mu_bar_tilde(KernelOrder k, std::span<const double> x)
{
    detail::require_arity(x.size(), k, "kernel_mu_bar_tilde");
    detail::BlockEvaluator<detail::Family::MuBar> ev{x, k};
    const double bar = ev.eval(0, k);
    return {bar, k % 2 == 0 ? detail::mu_tilde_from(ev, x, k)
                            : std::numeric_limits<double>::quiet_NaN()};
}

/// Product kernel P_k = prod_{i=1}^k (x0 - x_i); needs k + 1 replications.
inline double kernel_p(double x0, std::span<const double> x)
{
    if (x.empty()) {
        throw std::invalid_argument("kernel_p: empty tuple");
    }
    double r = 1.0;
    for (const double xi : x) {
        r *= x0 - xi;
    }
    return r;
}

/// D_i = sum_{j != i} (x_i - x_j) = 3 (x_i - mean) for a triple.
inline std::array<double, 3> sum_of_differences_d3(std::span<const double> x)
{
    detail::require_arity(x.size(), 3, "sum_of_differences_d3");
    const double d12 = x[0] - x[1];
    const double d13 = x[0] - x[2];
    const double d23 = x[1] - x[2];
    return {d12 + d13, -d12 + d23, -d13 - d23};
}

}  // namespace dmoments
