#pragma once

// Sampling laws for the simulation harness, each with closed-form central moments.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dmoments/exact_expectation.hpp"
#include "dmoments/finite_distribution.hpp"
#include "dmoments/kernels.hpp"
#include "dmoments/rng.hpp"

namespace dmoments {

/// Exponential law with rate lambda (mean 1/lambda). "exp:2" is rate 2, mean 1/2.
struct Exponential {
    double rate = 1.0;
};

struct Normal {
    double mean = 0.0;
    double sd = 1.0;
};

struct Finite {
    FiniteDistribution<double> law;
};

using DistributionKind = std::variant<Exponential, Normal, Finite>;

/// Number of derangements of k objects, exact for k <= 20.
constexpr std::uint64_t derangement(int k)
{
    if (k < 0 || k > 20) {
        throw std::invalid_argument("derangement: k outside [0, 20]");
    }
    std::uint64_t prev = 1;  // D(0)
    std::uint64_t cur = 0;   // D(1)
    if (k == 0) {
        return prev;
    }
    for (int i = 2; i <= k; ++i) {
        const std::uint64_t next = static_cast<std::uint64_t>(i - 1) * (cur + prev);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace detail {

inline double derangement_real(int k)
{
    if (k <= 20) {
        return static_cast<double>(derangement(k));
    }
    double prev = static_cast<double>(derangement(19));
    double cur = static_cast<double>(derangement(20));
    for (int i = 21; i <= k; ++i) {
        const double next = (i - 1) * (cur + prev);
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double parse_real(std::string_view text, std::string_view what)
{
    // std::from_chars for double is available in libstdc++ 11
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw std::invalid_argument(std::string(what) + ": cannot parse number '" +
                                    std::string(text) + "'");
    }
    return v;
}

}  // namespace detail

class DistributionSpec {
public:
    explicit DistributionSpec(DistributionKind kind) : kind_{std::move(kind)} { validate(); }

    static DistributionSpec exponential(double rate) { return DistributionSpec{Exponential{rate}}; }
    static DistributionSpec normal(double mean, double sd) { return DistributionSpec{Normal{mean, sd}}; }
    static DistributionSpec finite(FiniteDistribution<double> law)
    {
        return DistributionSpec{Finite{std::move(law)}};
    }

    [[nodiscard]] const DistributionKind& kind() const noexcept { return kind_; }

    [[nodiscard]] double mean() const
    {
        return std::visit(
            [](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    return 1.0 / d.rate;
                } else if constexpr (std::is_same_v<T, Normal>) {
                    return d.mean;
                } else {
                    return d.law.mean();
                }
            },
            kind_);
    }

    /// Exponential(l): D(k)/l^k. Normal: sd^k (k-1)!! for even k, else 0.
    /// Finite: central_moment_exact.
    [[nodiscard]] double central_moment(int k) const
    {
        if (k < 1) {
            throw std::invalid_argument("central_moment: order must be >= 1");
        }
        return std::visit(
            [k](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    return detail::derangement_real(k) / std::pow(d.rate, k);
                } else if constexpr (std::is_same_v<T, Normal>) {
                    if (k % 2 != 0) {
                        return 0.0;
                    }
                    double dfact = 1.0;
                    for (int i = k - 1; i > 1; i -= 2) {
                        dfact *= i;
                    }
                    return dfact * std::pow(d.sd, k);
                } else {
                    return central_moment_exact(d.law, k);
                }
            },
            kind_);
    }

    double draw(RngStream& rng) const
    {
        return std::visit(
            [&rng](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    return rng.exponential(d.rate);
                } else if constexpr (std::is_same_v<T, Normal>) {
                    return d.mean + d.sd * rng.standard_normal();
                } else {
                    // inverse CDF over the support in stored order
                    const double u = rng.uniform();
                    const auto& w = d.law.weights();
                    double c = 0.0;
                    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
                        c += w[i];
                        if (u < c) {
                            return d.law.support()[i];
                        }
                    }
                    return d.law.support().back();
                }
            },
            kind_);
    }

    /// Fills `out` with i.i.d. draws.
    void sample_into(RngStream& rng, std::span<double> out) const
    {
        for (auto& v : out) {
            v = draw(rng);
        }
    }

    [[nodiscard]] std::vector<double> sample(RngStream& rng, std::size_t n) const
    {
        if (n == 0) {
            throw std::invalid_argument("sample: n must be >= 1");
        }
        std::vector<double> out(n);
        sample_into(rng, out);
        return out;
    }

    /// "exp:2", "normal:0,1"; finite laws are built by the caller (see io.hpp).
    [[nodiscard]] std::string describe() const
    {
        return std::visit(
            [](const auto& d) -> std::string {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    return "exp:" + format_real(d.rate);
                } else if constexpr (std::is_same_v<T, Normal>) {
                    return "normal:" + format_real(d.mean) + "," + format_real(d.sd);
                } else {
                    return "finite(" + std::to_string(d.law.size()) + " points)";
                }
            },
            kind_);
    }

private:
    static std::string format_real(double v)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    void validate() const
    {
        std::visit(
            [](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    if (!(d.rate > 0.0) || !std::isfinite(d.rate)) {
                        throw std::invalid_argument("Exponential: rate must be finite and > 0");
                    }
                } else if constexpr (std::is_same_v<T, Normal>) {
                    if (!(d.sd > 0.0) || !std::isfinite(d.sd) || !std::isfinite(d.mean)) {
                        throw std::invalid_argument("Normal: need finite mean and sd > 0");
                    }
                }
            },
            kind_);
    }

    DistributionKind kind_;
};

inline double closed_form_central_moment(const DistributionSpec& spec, int k)
{
    return spec.central_moment(k);
}

/// Parses "exp:RATE" or "normal:MEAN,SD". `finite:@file` is handled by
/// parse_distribution_spec in io.hpp, which can read files.
inline DistributionSpec parse_parametric_spec(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("distribution '" + std::string(text) +
                                    "': expected exp:RATE, normal:MEAN,SD or finite:@FILE");
    }
    const auto head = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    if (head == "exp") {
        return DistributionSpec::exponential(detail::parse_real(args, "exp"));
    }
    if (head == "normal") {
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) {
            throw std::invalid_argument("normal: expected normal:MEAN,SD");
        }
        return DistributionSpec::normal(detail::parse_real(args.substr(0, comma), "normal"),
                                        detail::parse_real(args.substr(comma + 1), "normal"));
    }
    throw std::invalid_argument("unknown distribution kind '" + std::string(head) + "'");
}

}  // namespace dmoments
