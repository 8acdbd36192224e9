#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dmoments/compensated_sum.hpp"

namespace dmoments {

template <std::size_t D>
using Vec = std::array<double, D>;
using Vec2 = Vec<2>;
using Vec4 = Vec<4>;

namespace detail {

inline bool all_finite(double v) noexcept { return std::isfinite(v); }

template <std::size_t D>
bool all_finite(const Vec<D>& v) noexcept
{
    return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

}  // namespace detail

/// Finite-support probability law over points of type `Point` (double or Vec<D>).
///
/// Construction normalizes: zero-weight points are dropped, duplicate points
/// are merged (summed weight, first-appearance order kept) and weights are
/// rescaled to sum to one.
template <typename Point>
class FiniteDistribution {
public:
    using point_type = Point;

    FiniteDistribution(std::vector<Point> support, std::vector<double> weights)
    {
        if (support.size() != weights.size()) {
            throw std::invalid_argument("FiniteDistribution: support and weights differ in length");
        }
        if (support.empty()) {
            throw std::invalid_argument("FiniteDistribution: empty support");
        }
        CompensatedSum<double> total;
        std::map<Point, std::size_t> index;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (!detail::all_finite(support[i])) {
                throw std::invalid_argument("FiniteDistribution: non-finite support point");
            }
            if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
                throw std::invalid_argument("FiniteDistribution: weights must be finite and >= 0");
            }
            if (weights[i] == 0.0) {
                continue;
            }
            total += weights[i];
            const auto [it, inserted] = index.try_emplace(support[i], support_.size());
            if (inserted) {
                support_.push_back(support[i]);
                weights_.push_back(weights[i]);
            } else {
                weights_[it->second] += weights[i];
            }
        }
        if (support_.empty()) {
            throw std::invalid_argument("FiniteDistribution: all weights are zero");
        }
        const double t = total.value();
        for (auto& w : weights_) {
            w /= t;
        }
    }

    /// Degenerate law at a single point.
    static FiniteDistribution point_mass(Point p) { return FiniteDistribution({p}, {1.0}); }

    /// Empirical law of a data vector: mass 1/n on each observation.
    static FiniteDistribution empirical(std::span<const Point> data)
    {
        return FiniteDistribution(std::vector<Point>(data.begin(), data.end()),
                                  std::vector<double>(data.size(), 1.0));
    }

    [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }
    [[nodiscard]] const std::vector<Point>& support() const noexcept { return support_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    [[nodiscard]] Point mean() const
    {
        if constexpr (std::is_same_v<Point, double>) {
            CompensatedSum<double> s;
            for (std::size_t i = 0; i < size(); ++i) {
                s += weights_[i] * support_[i];
            }
            return s.value();
        } else {
            Point m{};
            for (std::size_t d = 0; d < m.size(); ++d) {
                CompensatedSum<double> s;
                for (std::size_t i = 0; i < size(); ++i) {
                    s += weights_[i] * support_[i][d];
                }
                m[d] = s.value();
            }
            return m;
        }
    }

    /// Same weights, every point shifted by `shift` (covariance structure unchanged).
    [[nodiscard]] FiniteDistribution translated(const Point& shift) const
    {
        std::vector<Point> moved = support_;
        for (auto& p : moved) {
            if constexpr (std::is_same_v<Point, double>) {
                p += shift;
            } else {
                for (std::size_t d = 0; d < p.size(); ++d) {
                    p[d] += shift[d];
                }
            }
        }
        return FiniteDistribution(std::move(moved), weights_);
    }

    /// Law of coordinate `d` (vector points only).
    [[nodiscard]] FiniteDistribution<double> marginal(std::size_t d) const
        requires(!std::is_same_v<Point, double>)
    {
        std::vector<double> xs;
        xs.reserve(size());
        for (const auto& p : support_) {
            xs.push_back(p.at(d));
        }
        return FiniteDistribution<double>(std::move(xs), weights_);
    }

private:
    std::vector<Point> support_;
    std::vector<double> weights_;
};

}  // namespace dmoments
