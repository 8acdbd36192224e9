#pragma once

// Sample-level estimators: natural central moments, exhaustive and Monte Carlo
// D-estimators built from the minimal kernels h_k, Gini variance/covariance,
// regression slope, and pairwise skewness/kurtosis.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmoments/compensated_sum.hpp"
#include "dmoments/errors.hpp"
#include "dmoments/kernels.hpp"
#include "dmoments/rng.hpp"

namespace dmoments {

enum class EstimatorKind { Natural, DExhaustive, DMonteCarlo, Pairwise };

inline std::string_view to_string(EstimatorKind e) noexcept
{
    switch (e) {
        case EstimatorKind::Natural:
            return "natural";
        case EstimatorKind::DExhaustive:
            return "d-exhaustive";
        case EstimatorKind::DMonteCarlo:
            return "d-mc";
        case EstimatorKind::Pairwise:
            return "pairwise";
    }
    return "?";
}

struct MomentEstimate {
    EstimatorKind estimator = EstimatorKind::Natural;
    int order = 0;
    double value = 0.0;
    std::uint64_t tuples_used = 0;
    std::optional<double> mc_std_error;  // DMonteCarlo only; NaN when N = 1
};

namespace detail {

inline void require_sample(std::span<const double> x, std::size_t min_n, const char* what)
{
    if (x.size() < min_n) {
        throw std::invalid_argument(std::string(what) + ": need at least " + std::to_string(min_n) +
                                    " observations, got " + std::to_string(x.size()));
    }
    for (const double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite observation");
        }
    }
}

inline void require_same_length(std::span<const double> x, std::span<const double> y,
                                const char* what)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument(std::string(what) + ": samples differ in length (" +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                                    ")");
    }
}

inline bool is_constant(std::span<const double> x) noexcept
{
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return lo == x.end() || *lo == *hi;
}

inline double compensated_mean(std::span<const double> x)
{
    CompensatedSum<double> s;
    for (const double v : x) {
        s += v;
    }
    return s.value() / static_cast<double>(x.size());
}

/// n!/(n-k)!, or nullopt if it exceeds `cap`.
inline std::optional<std::uint64_t> falling_factorial(std::size_t n, int k, std::uint64_t cap)
{
    std::uint64_t r = 1;
    for (int i = 0; i < k; ++i) {
        const auto f = static_cast<std::uint64_t>(n) - static_cast<std::uint64_t>(i);
        if (r > cap / f) {
            return std::nullopt;
        }
        r *= f;
    }
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------- natural

enum class NaturalDivisor { NMinusOne, N };

/// m_k(n) = sum (x_i - xbar)^k / (n - 1), or / n with NaturalDivisor::N.
inline MomentEstimate natural_moment(std::span<const double> x, int k,
                                     NaturalDivisor divisor = NaturalDivisor::NMinusOne)
{
    detail::require_sample(x, 2, "natural_moment");
    const KernelOrder order{k, 1};
    MomentEstimate est{EstimatorKind::Natural, order, 0.0, x.size(), std::nullopt};
    if (detail::is_constant(x)) {
        return est;
    }
    const double mean = detail::compensated_mean(x);
    CompensatedSum<double> s;
    for (const double v : x) {
        s += detail::ipow(v - mean, k);
    }
    const auto n = static_cast<double>(x.size());
    est.value = s.value() / (divisor == NaturalDivisor::NMinusOne ? n - 1.0 : n);
    return est;
}

// ---------------------------------------------------------------- D-estimators

inline constexpr std::uint64_t kDefaultTupleCap = 100'000'000;

enum class ExhaustiveRoute {
    Auto,        // SubsetDP when n <= kSubsetDpMaxN, otherwise BruteForce
    BruteForce,  // literal mean of h_k over every ordered distinct k-tuple
    SubsetDP,    // same value via ordering-averaged recursion over index subsets
};

inline constexpr std::size_t kSubsetDpMaxN = 20;

struct ExhaustiveOptions {
    ExhaustiveRoute route = ExhaustiveRoute::Auto;
    std::uint64_t tuple_cap = kDefaultTupleCap;
};

namespace detail {

inline double exhaustive_brute_force(std::span<const double> x, int k)
{
    const std::size_t n = x.size();
    std::vector<double> tuple(static_cast<std::size_t>(k));
    std::vector<unsigned char> used(n, 0);
    CompensatedSum<double> acc;
    std::uint64_t count = 0;

    // depth-first walk over ordered distinct index tuples
    auto walk = [&](auto&& self, int depth) -> void {
        if (depth == k) {
            acc += kernel_h(KernelOrder{k}, tuple);
            ++count;
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i] != 0) {
                continue;
            }
            used[i] = 1;
            tuple[static_cast<std::size_t>(depth)] = x[i];
            self(self, depth + 1);
            used[i] = 0;
        }
    };
    walk(walk, 0);
    return acc.value() / static_cast<double>(count);
}

/// U(S) = mean of h_|S| over all orderings of the observations indexed by S.
///
/// h_s's recursion splits its arguments into a leading block of j and a
/// trailing block of s - j. Averaged over orderings, the leading block is a
/// uniformly random j-subset T with independently shuffled halves, so
///   U(S) = A(S) - sum_j (-1)^j C(s-1, j) avg_{|T|=j} U(T) U(S \ T)
/// where A(S) averages (x_a - x_c)(x_a - x_b)^(s-1) over ordered distinct
/// triples of S. Orders <= 4 are averaged over permutations directly.
class SubsetAverager {
public:
    explicit SubsetAverager(std::span<const double> x)
        : x_{x}, memo_(std::size_t{1} << x.size(), std::numeric_limits<double>::quiet_NaN())
    {
    }

    double mean_over_orderings(std::uint32_t mask)
    {
        double& slot = memo_[mask];
        if (!std::isnan(slot)) {
            return slot;
        }
        slot = compute(mask);
        return slot;
    }

private:
    double compute(std::uint32_t mask)
    {
        const int s = std::popcount(mask);
        std::array<double, 32> pts{};
        int c = 0;
        for (std::uint32_t m = mask; m != 0; m &= m - 1) {
            pts[static_cast<std::size_t>(c++)] = x_[static_cast<std::size_t>(std::countr_zero(m))];
        }
        if (s <= 1) {
            return 0.0;
        }
        if (s <= 4) {
            std::array<double, 4> perm{};
            std::copy_n(pts.begin(), s, perm.begin());
            std::sort(perm.begin(), perm.begin() + s);
            CompensatedSum<double> acc;
            int count = 0;
            do {
                acc += kernel_h(KernelOrder{s}, std::span<const double>(perm.data(), static_cast<std::size_t>(s)));
                ++count;
            } while (std::next_permutation(perm.begin(), perm.begin() + s));
            // each distinct arrangement of tied values stands for equally many permutations
            return acc.value() / count;
        }

        const int m = s - 1;
        CompensatedSum<double> lead;
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < s; ++b) {
                if (b == a) {
                    continue;
                }
                const double pw = ipow(pts[static_cast<std::size_t>(a)] - pts[static_cast<std::size_t>(b)], m);
                for (int cc = 0; cc < s; ++cc) {
                    if (cc == a || cc == b) {
                        continue;
                    }
                    lead += (pts[static_cast<std::size_t>(a)] - pts[static_cast<std::size_t>(cc)]) * pw;
                }
            }
        }
        CompensatedSum<double> acc{lead.value() / static_cast<double>(s * (s - 1) * (s - 2))};

        // per-size averages of U(T) U(S \ T)
        std::array<CompensatedSum<double>, 33> cross{};
        for (std::uint32_t t = (mask - 1) & mask; t != 0; t = (t - 1) & mask) {
            const int j = std::popcount(t);
            if (j < 2 || j > m - 1) {
                continue;
            }
            cross[static_cast<std::size_t>(j)] += mean_over_orderings(t) * mean_over_orderings(mask ^ t);
        }
        for (int j = 2; j <= m - 1; ++j) {
            const double avg = cross[static_cast<std::size_t>(j)].value() /
                               static_cast<double>(binomial(s, j));
            const double term = kBinomialTable[m][j] * avg;
            acc += (j % 2 == 0) ? -term : term;
        }
        return acc.value();
    }

    std::span<const double> x_;
    std::vector<double> memo_;
};

inline double exhaustive_subset_dp(std::span<const double> x, int k)
{
    const std::size_t n = x.size();
    SubsetAverager avg{x};
    const std::uint32_t full = (1u << n) - 1u;
    if (static_cast<std::size_t>(k) == n) {
        return avg.mean_over_orderings(full);
    }
    // every k-subset is equally likely as the index set of a uniform ordered tuple
    CompensatedSum<double> acc;
    std::uint64_t count = 0;
    for (std::uint32_t t = (1u << k) - 1u; t <= full;) {
        acc += avg.mean_over_orderings(t);
        ++count;
        // Gosper's hack: next mask with the same popcount
        const std::uint32_t c = t & (~t + 1u);
        const std::uint32_t r = t + c;
        t = (((r ^ t) >> 2) / c) | r;
    }
    return acc.value() / static_cast<double>(count);
}

}  // namespace detail

/// Mean of h_k over all n!/(n-k)! ordered tuples of distinct indices (unbiased for mu_k).
inline MomentEstimate d_estimator_exhaustive(std::span<const double> x, int k,
                                             const ExhaustiveOptions& options = {})
{
    const KernelOrder order{k};
    detail::require_sample(x, 2, "d_estimator_exhaustive");
    if (x.size() < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("d_estimator_exhaustive: need n >= k");
    }
    const auto tuples = detail::falling_factorial(x.size(), k, options.tuple_cap);
    if (!tuples) {
        throw CapExceeded("d_estimator_exhaustive: n!/(n-k)! exceeds the tuple cap of " +
                          std::to_string(options.tuple_cap));
    }
    ExhaustiveRoute route = options.route;
    if (route == ExhaustiveRoute::Auto) {
        route = x.size() <= kSubsetDpMaxN ? ExhaustiveRoute::SubsetDP : ExhaustiveRoute::BruteForce;
    }
    if (route == ExhaustiveRoute::SubsetDP && x.size() > kSubsetDpMaxN) {
        throw CapExceeded("d_estimator_exhaustive: subset route limited to n <= " +
                          std::to_string(kSubsetDpMaxN));
    }
    MomentEstimate est{EstimatorKind::DExhaustive, order, 0.0, *tuples, std::nullopt};
    if (detail::is_constant(x)) {
        return est;
    }
    est.value = route == ExhaustiveRoute::SubsetDP ? detail::exhaustive_subset_dp(x, k)
                                                   : detail::exhaustive_brute_force(x, k);
    return est;
}

/// Mean of h_k over N index tuples, each uniform over ordered distinct k-tuples
/// (independent across tuples). Attaches the Monte Carlo standard error sd/sqrt(N).
inline MomentEstimate d_estimator_mc(std::span<const double> x, int k, std::uint64_t tuples,
                                     RngStream& rng)
{
    const KernelOrder order{k};
    detail::require_sample(x, 2, "d_estimator_mc");
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("d_estimator_mc: need n >= k");
    }
    if (tuples == 0) {
        throw std::invalid_argument("d_estimator_mc: need N >= 1");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::array<double, kMaxOrder> buf{};
    const std::span<const double> tuple{buf.data(), static_cast<std::size_t>(k)};

    CompensatedSum<double> sum;
    double mean = 0.0;  // Welford, for the spread only
    double m2 = 0.0;
    for (std::uint64_t t = 0; t < tuples; ++t) {
        // partial Fisher-Yates: a uniform ordered k-subset whatever the current permutation
        for (int i = 0; i < k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const auto j = ui + static_cast<std::size_t>(rng.uniform_index(n - ui));
            std::swap(idx[ui], idx[j]);
            buf[ui] = x[idx[ui]];
        }
        const double h = kernel_h(order, tuple);
        sum += h;
        const double delta = h - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (h - mean);
    }
    const auto nt = static_cast<double>(tuples);
    MomentEstimate est{EstimatorKind::DMonteCarlo, order, sum.value() / nt, tuples, std::nullopt};
    est.mc_std_error = tuples > 1 ? std::sqrt(m2 / (nt - 1.0) / nt)
                                  : std::numeric_limits<double>::quiet_NaN();
    return est;
}

// ---------------------------------------------------------------- Gini

enum class Route {
    Algebraic,  // O(n) centred sums
    Pairwise,   // O(n^2) sum over i < j
    Verify,     // both; throws RouteMismatch beyond 1e-10 relative
};

inline constexpr double kRouteTolerance = 1e-10;

namespace detail {

inline double gini_cov_algebraic(std::span<const double> x, std::span<const double> y)
{
    // corrected two-pass: the second sums remove the rounding left in the means
    const double mx = compensated_mean(x);
    const double my = compensated_mean(y);
    CompensatedSum<double> sxy;
    CompensatedSum<double> sx;
    CompensatedSum<double> sy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sx += dx;
        sy += dy;
    }
    const auto n = static_cast<double>(x.size());
    return (sxy.value() - sx.value() * sy.value() / n) / (n - 1.0);
}

inline double gini_cov_pairwise(std::span<const double> x, std::span<const double> y)
{
    CompensatedSum<double> s;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            s += (x[i] - x[j]) * (y[i] - y[j]);
        }
    }
    const auto nd = static_cast<double>(n);
    return s.value() / (nd * (nd - 1.0));
}

inline double routed(double (*fast)(std::span<const double>, std::span<const double>),
                     double (*slow)(std::span<const double>, std::span<const double>),
                     std::span<const double> x, std::span<const double> y, Route route,
                     const char* what)
{
    switch (route) {
        case Route::Algebraic:
            return fast(x, y);
        case Route::Pairwise:
            return slow(x, y);
        case Route::Verify:
            break;
    }
    const double a = fast(x, y);
    const double p = slow(x, y);
    // |s_xy| <= s_x s_y, so a covariance near zero is judged on that scale
    const double bound = std::sqrt(std::abs(fast(x, x) * fast(y, y)));
    if (!(std::abs(a - p) <= kRouteTolerance * std::max({std::abs(a), std::abs(p), bound}))) {
        throw RouteMismatch(std::string(what) + ": algebraic and pairwise routes disagree");
    }
    return a;
}

}  // namespace detail

/// s_XY(n) = 1/(n(n-1)) sum_{i<j} (x_i - x_j)(y_i - y_j).
inline double gini_covariance(std::span<const double> x, std::span<const double> y,
                              Route route = Route::Algebraic)
{
    detail::require_same_length(x, y, "gini_covariance");
    detail::require_sample(x, 2, "gini_covariance");
    detail::require_sample(y, 2, "gini_covariance");
    return detail::routed(detail::gini_cov_algebraic, detail::gini_cov_pairwise, x, y, route,
                          "gini_covariance");
}

/// s_X^2(n) = 1/(n(n-1)) sum_{i<j} (x_i - x_j)^2.
inline double gini_variance(std::span<const double> x, Route route = Route::Algebraic)
{
    detail::require_sample(x, 2, "gini_variance");
    if (detail::is_constant(x)) {
        return 0.0;
    }
    return detail::routed(detail::gini_cov_algebraic, detail::gini_cov_pairwise, x, x, route,
                          "gini_variance");
}

/// Slope of the least-squares line of y on x: s_XY / s_X^2.
inline double regression_beta(std::span<const double> x, std::span<const double> y,
                              Route route = Route::Algebraic)
{
    detail::require_same_length(x, y, "regression_beta");
    detail::require_sample(x, 2, "regression_beta");
    detail::require_sample(y, 2, "regression_beta");
    if (detail::is_constant(x)) {
        throw DegenerateInput("regression_beta: x has zero variance");
    }
    if (detail::is_constant(y)) {
        return 0.0;
    }
    return gini_covariance(x, y, route) / gini_variance(x, route);
}

// ---------------------------------------------------------------- skewness / kurtosis

struct ShapeEstimate {
    std::optional<double> skewness;  // needs n >= 3
    double kurtosis = 0.0;
    double excess_kurtosis = 0.0;
};

namespace detail {

struct PairwiseAverages {
    double t3;  // avg over distinct ordered (i, j, l) of (x_i - x_l)(x_i - x_j)^2
    double p2;  // avg over distinct ordered (i, j) of (x_i - x_j)^2
    double p4;  // same for the fourth power
};

inline PairwiseAverages pairwise_averages_algebraic(std::span<const double> x)
{
    const double mean = compensated_mean(x);
    std::array<CompensatedSum<double>, 5> s{};
    for (const double v : x) {
        const double a = v - mean;
        const double a2 = a * a;
        s[1] += a;
        s[2] += a2;
        s[3] += a2 * a;
        s[4] += a2 * a2;
    }
    const double n = static_cast<double>(x.size());
    const double s1 = s[1].value();
    const double s2 = s[2].value();
    const double s3 = s[3].value();
    const double s4 = s[4].value();
    // cubes over coincident pairs cancel by antisymmetry, so the distinct-triple
    // sum equals the full triple sum
    const double t3 = n * n * s3 - 3.0 * n * s1 * s2 + 2.0 * s1 * s1 * s1;
    const double p2 = 2.0 * n * s2 - 2.0 * s1 * s1;
    const double p4 = 2.0 * n * s4 - 8.0 * s1 * s3 + 6.0 * s2 * s2;
    const double pairs = n * (n - 1.0);
    return {x.size() >= 3 ? t3 / (pairs * (n - 2.0)) : std::numeric_limits<double>::quiet_NaN(),
            p2 / pairs, p4 / pairs};
}

inline PairwiseAverages pairwise_averages_brute(std::span<const double> x)
{
    const std::size_t n = x.size();
    CompensatedSum<double> t3;
    CompensatedSum<double> p2;
    CompensatedSum<double> p4;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double d = x[i] - x[j];
            const double d2 = d * d;
            p2 += d2;
            p4 += d2 * d2;
            for (std::size_t l = 0; l < n; ++l) {
                if (l != i && l != j) {
                    t3 += (x[i] - x[l]) * d2;
                }
            }
        }
    }
    const double nd = static_cast<double>(n);
    const double pairs = nd * (nd - 1.0);
    return {n >= 3 ? t3.value() / (pairs * (nd - 2.0)) : std::numeric_limits<double>::quiet_NaN(),
            p2.value() / pairs, p4.value() / pairs};
}

inline ShapeEstimate shape_from(const PairwiseAverages& a)
{
    ShapeEstimate r;
    if (!std::isnan(a.t3)) {
        r.skewness = std::sqrt(8.0) * a.t3 / std::pow(a.p2, 1.5);
    }
    r.kurtosis = 2.0 * a.p4 / (a.p2 * a.p2) - 3.0;
    r.excess_kurtosis = r.kurtosis - 3.0;
    return r;
}

}  // namespace detail

/// Plug-in pairwise skewness and kurtosis (ratios of unbiased averages, so not
/// themselves unbiased):
///   Sk  = sqrt(8) avg[(x_i - x_l)(x_i - x_j)^2] / avg[(x_i - x_j)^2]^(3/2)
///   Kur = 2 avg[(x_i - x_j)^4] / avg[(x_i - x_j)^2]^2 - 3,  EKur = Kur - 3.
/// The Pairwise route loops over index tuples (O(n^3)).
inline ShapeEstimate skewness_kurtosis_d(std::span<const double> x, Route route = Route::Algebraic)
{
    detail::require_sample(x, 2, "skewness_kurtosis_d");
    if (detail::is_constant(x)) {
        throw DegenerateInput("skewness_kurtosis_d: constant sample");
    }
    if (route == Route::Algebraic) {
        return detail::shape_from(detail::pairwise_averages_algebraic(x));
    }
    if (route == Route::Pairwise) {
        return detail::shape_from(detail::pairwise_averages_brute(x));
    }
    const auto fast = detail::shape_from(detail::pairwise_averages_algebraic(x));
    const auto slow = detail::shape_from(detail::pairwise_averages_brute(x));
    const auto close = [](double a, double b) {
        return std::abs(a - b) <= kRouteTolerance * std::max({1.0, std::abs(a), std::abs(b)});
    };
    const bool skew_ok = !fast.skewness || close(*fast.skewness, *slow.skewness);
    if (!skew_ok || !close(fast.kurtosis, slow.kurtosis)) {
        throw RouteMismatch("skewness_kurtosis_d: algebraic and pairwise routes disagree");
    }
    return fast;
}

}  // namespace dmoments
