#pragma once

#include <cmath>
#include <iterator>

namespace dmoments {

/// Compensated summation: each addition's rounding error is recovered exactly
/// (Knuth's branch-free TwoSum) and accumulated separately.
///
/// Equivalent to Neumaier's improvement of Kahan summation: low-order bits are
/// kept even when an addend is larger than the running sum, which is the
/// common case when terms of mixed sign cancel.
template <typename Real = double>
class CompensatedSum {
public:
    constexpr CompensatedSum() = default;
    constexpr explicit CompensatedSum(Real initial) : sum_{initial} {}

    constexpr CompensatedSum& operator+=(Real value) noexcept
    {
        const Real t = sum_ + value;
        const Real bv = t - sum_;
        compensation_ += (sum_ - (t - bv)) + (value - bv);
        sum_ = t;
        return *this;
    }

    constexpr CompensatedSum& operator-=(Real value) noexcept { return *this += -value; }

    /// Merge another partial sum (used to combine per-chunk partials in index order).
    constexpr CompensatedSum& operator+=(const CompensatedSum& other) noexcept
    {
        *this += other.sum_;
        compensation_ += other.compensation_;
        return *this;
    }

    [[nodiscard]] constexpr Real value() const noexcept { return sum_ + compensation_; }

private:
    Real sum_ = Real{0};
    Real compensation_ = Real{0};
};

/// Error-free product: returns a*b rounded, with the exact rounding error in `err`.
inline double two_product(double a, double b, double& err) noexcept
{
    const double p = a * b;
    err = std::fma(a, b, -p);
    return p;
}

/// Compensated dot product (Ogita-Rump-Oishi Dot2): about twice working precision.
template <typename RangeA, typename RangeB>
double accurate_dot(const RangeA& a, const RangeB& b)
{
    double s = 0.0;
    double c = 0.0;
    auto ib = std::begin(b);
    for (auto ia = std::begin(a); ia != std::end(a); ++ia, ++ib) {
        double pe;
        const double p = two_product(*ia, *ib, pe);
        const double t = s + p;
        const double z = t - s;
        c += ((s - (t - z)) + (p - z)) + pe;
        s = t;
    }
    return s + c;
}

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2: about 106 significant bits.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    /// Exact a - b.
    static DoubleDouble difference(double a, double b) noexcept
    {
        const double s = a - b;
        const double bb = s - a;
        return {s, (a - (s - bb)) - (b + bb)};
    }

    [[nodiscard]] double value() const noexcept { return hi + lo; }

    friend DoubleDouble operator-(DoubleDouble a) noexcept { return {-a.hi, -a.lo}; }

    friend DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept
    {
        double s = a.hi + b.hi;
        double bb = s - a.hi;
        double e = (a.hi - (s - bb)) + (b.hi - bb);
        const double t = a.lo + b.lo;
        bb = t - a.lo;
        const double f = (a.lo - (t - bb)) + (b.lo - bb);
        e += t;
        double h = s + e;
        e -= h - s;
        e += f;
        s = h + e;
        return {s, e - (s - h)};
    }

    friend DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept { return a + (-b); }

    friend DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept
    {
        double e;
        const double p = two_product(a.hi, b.hi, e);
        e += a.hi * b.lo + a.lo * b.hi;
        const double s = p + e;
        return {s, e - (s - p)};
    }

    friend DoubleDouble operator*(DoubleDouble a, double b) noexcept
    {
        double e;
        const double p = two_product(a.hi, b, e);
        e += a.lo * b;
        const double s = p + e;
        return {s, e - (s - p)};
    }
};

/// a*b - c*d with a single rounding error (Kahan's fma trick).
inline double difference_of_products(double a, double b, double c, double d) noexcept
{
    const double cd = c * d;
    const double err = std::fma(-c, d, cd);
    const double dop = std::fma(a, b, -cd);
    return dop + err;
}

}  // namespace dmoments
