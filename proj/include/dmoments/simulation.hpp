#pragma once

// Seeded bias experiments: natural estimator against the exhaustive (n = k)
// or Monte Carlo (n > k) D-estimator, reduced into a BiasReport.
//
// Replication r draws its sample from RngStream(seed, r, 0) and its Monte
// Carlo tuples from RngStream(seed, r, 1). Replications are grouped into
// fixed-size chunks whose compensated partial sums are combined in chunk
// order, so the report is bit-identical for any thread count.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmoments/compensated_sum.hpp"
#include "dmoments/distributions.hpp"
#include "dmoments/estimators.hpp"
#include "dmoments/io.hpp"
#include "dmoments/parallel.hpp"
#include "dmoments/rng.hpp"

namespace dmoments {

enum class ExperimentMode { MinimalNEqualsK, MonteCarloNGreaterK };

inline std::string_view to_string(ExperimentMode m) noexcept
{
    return m == ExperimentMode::MinimalNEqualsK ? "minimal" : "monte-carlo";
}

inline ExperimentMode parse_mode(std::string_view s)
{
    if (s == "minimal" || s == "table1") {
        return ExperimentMode::MinimalNEqualsK;
    }
    if (s == "monte-carlo" || s == "mc" || s == "table2") {
        return ExperimentMode::MonteCarloNGreaterK;
    }
    throw std::invalid_argument("unknown experiment mode '" + std::string(s) + "'");
}

struct ExperimentConfig {
    DistributionSpec distribution = DistributionSpec::exponential(2.0);
    std::string distribution_text = "exp:2";
    std::vector<int> orders{2, 3, 4, 5, 6, 7, 8};
    std::vector<std::size_t> sample_sizes;  // MonteCarloNGreaterK only
    std::uint64_t replications = 100'000;
    std::uint64_t mc_tuples = 30'000;
    std::uint64_t seed = 0;
    ExperimentMode mode = ExperimentMode::MinimalNEqualsK;
    unsigned threads = 1;
    NaturalDivisor divisor = NaturalDivisor::NMinusOne;
};

struct BiasRow {
    std::string estimator;
    std::size_t n = 0;
    int order = 0;
    double true_value = 0.0;
    double mean_bias = 0.0;
    double std_error = 0.0;
    std::uint64_t replications = 0;

    bool operator==(const BiasRow&) const = default;
};

struct BiasReport {
    std::uint64_t seed = 0;
    std::string distribution;
    std::string mode;
    std::uint64_t mc_tuples = 0;
    std::vector<BiasRow> rows;

    bool operator==(const BiasReport&) const = default;

    [[nodiscard]] const BiasRow* find(std::string_view estimator, std::size_t n, int order) const
    {
        for (const auto& r : rows) {
            if (r.estimator == estimator && r.n == n && r.order == order) {
                return &r;
            }
        }
        return nullptr;
    }
};

inline void validate(const ExperimentConfig& c)
{
    if (c.orders.empty()) {
        throw std::invalid_argument("experiment: no orders");
    }
    for (const int k : c.orders) {
        if (k < 2 || k > kMaxOrder) {
            throw std::invalid_argument("experiment: order " + std::to_string(k) +
                                        " outside [2, K_MAX]");
        }
    }
    if (c.replications < 2) {
        throw std::invalid_argument("experiment: need R >= 2 for a standard error");
    }
    if (c.mode == ExperimentMode::MonteCarloNGreaterK) {
        if (c.sample_sizes.empty()) {
            throw std::invalid_argument("experiment: monte-carlo mode needs sample sizes");
        }
        const int kmax = *std::max_element(c.orders.begin(), c.orders.end());
        for (const auto n : c.sample_sizes) {
            if (n < static_cast<std::size_t>(kmax) || n < 2) {
                throw std::invalid_argument("experiment: every n must be >= max order");
            }
        }
        if (c.mc_tuples == 0) {
            throw std::invalid_argument("experiment: need N >= 1 tuples");
        }
    }
    if (c.threads == 0) {
        throw std::invalid_argument("experiment: threads must be >= 1");
    }
}

/// Reads an experiment from a JSON document. Keys (all optional):
/// distribution ("exp:2"), mode ("minimal" | "monte-carlo"), orders
/// ([2,3] or "2..8"), sample_sizes ([50,100] or "50,100"), replications,
/// mc_tuples, seed, threads, natural_divisor ("n-1" | "n").
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    const auto ints = [](const nlohmann::json& v) {
        std::vector<long long> out;
        if (v.is_string()) {
            out = parse_int_list(v.get<std::string>());
        } else {
            for (const auto& e : v) {
                out.push_back(e.get<long long>());
            }
        }
        return out;
    };
    if (j.contains("distribution")) {
        c.distribution_text = j.at("distribution").get<std::string>();
        c.distribution = parse_distribution_spec(c.distribution_text);
    }
    if (j.contains("mode")) {
        c.mode = parse_mode(j.at("mode").get<std::string>());
    }
    if (j.contains("orders")) {
        c.orders.clear();
        for (const auto k : ints(j.at("orders"))) {
            c.orders.push_back(static_cast<int>(k));
        }
    }
    if (j.contains("sample_sizes")) {
        for (const auto n : ints(j.at("sample_sizes"))) {
            if (n < 1) {
                throw std::invalid_argument("experiment: sample sizes must be positive");
            }
            c.sample_sizes.push_back(static_cast<std::size_t>(n));
        }
    }
    c.replications = j.value("replications", c.replications);
    c.mc_tuples = j.value("mc_tuples", c.mc_tuples);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("natural_divisor")) {
        const auto d = j.at("natural_divisor").get<std::string>();
        if (d == "n-1") {
            c.divisor = NaturalDivisor::NMinusOne;
        } else if (d == "n") {
            c.divisor = NaturalDivisor::N;
        } else {
            throw std::invalid_argument("natural_divisor must be \"n-1\" or \"n\"");
        }
    }
    return c;
}

namespace detail {

struct Cell {
    EstimatorKind kind;
    std::size_t n;
    int order;
};

inline std::vector<Cell> experiment_cells(const ExperimentConfig& c)
{
    std::vector<Cell> cells;
    if (c.mode == ExperimentMode::MinimalNEqualsK) {
        for (const int k : c.orders) {
            cells.push_back({EstimatorKind::Natural, static_cast<std::size_t>(k), k});
            cells.push_back({EstimatorKind::DExhaustive, static_cast<std::size_t>(k), k});
        }
    } else {
        for (const auto n : c.sample_sizes) {
            for (const int k : c.orders) {
                cells.push_back({EstimatorKind::Natural, n, k});
                cells.push_back({EstimatorKind::DMonteCarlo, n, k});
            }
        }
    }
    return cells;
}

struct CellSums {
    CompensatedSum<double> dev;     // sum of (estimate - true)
    CompensatedSum<double> dev_sq;  // sum of (estimate - true)^2
};

inline constexpr std::uint64_t kChunk = 1024;

}  // namespace detail

inline BiasReport run_bias_experiment(const ExperimentConfig& config)
{
    validate(config);
    const auto cells = detail::experiment_cells(config);
    std::vector<double> truth(cells.size());
    std::size_t n_max = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        truth[c] = config.distribution.central_moment(cells[c].order);
        n_max = std::max(n_max, cells[c].n);
    }

    const std::uint64_t R = config.replications;
    const std::uint64_t chunks = (R + detail::kChunk - 1) / detail::kChunk;
    std::vector<std::vector<detail::CellSums>> partial(chunks,
                                                       std::vector<detail::CellSums>(cells.size()));

    auto run_chunk = [&](std::uint64_t chunk) {
        std::vector<double> sample(n_max);
        auto& sums = partial[chunk];
        const std::uint64_t end = std::min(R, (chunk + 1) * detail::kChunk);
        for (std::uint64_t r = chunk * detail::kChunk; r < end; ++r) {
            RngStream sample_rng{config.seed, r, 0};
            RngStream tuple_rng{config.seed, r, 1};
            config.distribution.sample_into(sample_rng, sample);
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const auto& cell = cells[c];
                const std::span<const double> x{sample.data(), cell.n};
                double v = 0.0;
                switch (cell.kind) {
                    case EstimatorKind::Natural:
                        v = natural_moment(x, cell.order, config.divisor).value;
                        break;
                    case EstimatorKind::DExhaustive:
                        v = d_estimator_exhaustive(x, cell.order).value;
                        break;
                    case EstimatorKind::DMonteCarlo:
                        v = d_estimator_mc(x, cell.order, config.mc_tuples, tuple_rng).value;
                        break;
                    case EstimatorKind::Pairwise:
                        break;
                }
                const double d = v - truth[c];
                sums[c].dev += d;
                sums[c].dev_sq += d * d;
            }
        }
    };

    parallel_for(chunks, config.threads, run_chunk);

    BiasReport report;
    report.seed = config.seed;
    report.distribution = config.distribution_text;
    report.mode = std::string(to_string(config.mode));
    report.mc_tuples = config.mode == ExperimentMode::MonteCarloNGreaterK ? config.mc_tuples : 0;
    const auto Rd = static_cast<double>(R);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        detail::CellSums total;
        for (const auto& p : partial) {
            total.dev += p[c].dev;
            total.dev_sq += p[c].dev_sq;
        }
        const double mean_dev = total.dev.value() / Rd;
        const double ss = std::max(0.0, total.dev_sq.value() - Rd * mean_dev * mean_dev);
        BiasRow row;
        row.estimator = std::string(to_string(cells[c].kind));
        row.n = cells[c].n;
        row.order = cells[c].order;
        row.true_value = truth[c];
        row.mean_bias = mean_dev;
        row.std_error = std::sqrt(ss / (Rd - 1.0) / Rd);
        row.replications = R;
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------- rendering

enum class Format { Csv, Json, Markdown };

inline Format parse_format(std::string_view s)
{
    if (s == "csv") {
        return Format::Csv;
    }
    if (s == "json") {
        return Format::Json;
    }
    if (s == "md" || s == "markdown") {
        return Format::Markdown;
    }
    throw std::invalid_argument("unknown format '" + std::string(s) + "'");
}

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline nlohmann::json to_json(const BiasReport& r)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"estimator", row.estimator},
                        {"n", row.n},
                        {"order", row.order},
                        {"true_value", row.true_value},
                        {"mean_bias", row.mean_bias},
                        {"std_error", row.std_error},
                        {"replications", row.replications}});
    }
    return {{"seed", r.seed},
            {"distribution", r.distribution},
            {"mode", r.mode},
            {"mc_tuples", r.mc_tuples},
            {"rows", rows}};
}

inline BiasReport bias_report_from_json(const nlohmann::json& j)
{
    BiasReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.distribution = j.at("distribution").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.mc_tuples = j.value("mc_tuples", std::uint64_t{0});
    for (const auto& row : j.at("rows")) {
        r.rows.push_back({row.at("estimator").get<std::string>(), row.at("n").get<std::size_t>(),
                          row.at("order").get<int>(), row.at("true_value").get<double>(),
                          row.at("mean_bias").get<double>(), row.at("std_error").get<double>(),
                          row.at("replications").get<std::uint64_t>()});
    }
    return r;
}

namespace detail {

inline std::string render_csv(const BiasReport& r)
{
    std::string out = "estimator,n,order,true_value,mean_bias,std_error,replications\n";
    for (const auto& row : r.rows) {
        out += row.estimator + ',' + std::to_string(row.n) + ',' + std::to_string(row.order) + ',' +
               format_double(row.true_value) + ',' + format_double(row.mean_bias) + ',' +
               format_double(row.std_error) + ',' + std::to_string(row.replications) + '\n';
    }
    return out;
}

inline std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// One table per sample size (a single table when n = k), orders as columns,
// true values first, then mean bias (standard error) per estimator.
inline std::string render_markdown(const BiasReport& r)
{
    const bool minimal = r.mode == to_string(ExperimentMode::MinimalNEqualsK);
    std::map<std::size_t, std::vector<const BiasRow*>> groups;
    for (const auto& row : r.rows) {
        groups[minimal ? 0 : row.n].push_back(&row);
    }
    std::string out;
    out += "Bias of central-moment estimators, " + r.distribution + ", R = " +
           (r.rows.empty() ? std::string("0") : std::to_string(r.rows.front().replications)) +
           ", seed " + std::to_string(r.seed) + "\n";
    for (const auto& [n, rows] : groups) {
        std::set<int> orders;
        std::vector<std::string> estimators;
        for (const auto* row : rows) {
            orders.insert(row->order);
            if (std::find(estimators.begin(), estimators.end(), row->estimator) == estimators.end()) {
                estimators.push_back(row->estimator);
            }
        }
        out += "\n";
        out += minimal ? std::string("n = k\n\n") : "n = " + std::to_string(n) + "\n\n";
        out += "| |";
        for (const int k : orders) {
            out += " k=" + std::to_string(k) + " |";
        }
        out += "\n|---|";
        for (std::size_t i = 0; i < orders.size(); ++i) {
            out += "---:|";
        }
        out += "\n| True value |";
        for (const int k : orders) {
            const auto it = std::find_if(rows.begin(), rows.end(),
                                         [k](const BiasRow* b) { return b->order == k; });
            out += " " + fixed((*it)->true_value, 4) + " |";
        }
        out += "\n";
        for (const auto& est : estimators) {
            out += "| " + est + " |";
            for (const int k : orders) {
                const auto it = std::find_if(rows.begin(), rows.end(), [&](const BiasRow* b) {
                    return b->order == k && b->estimator == est;
                });
                out += it == rows.end() ? std::string(" |")
                                        : " " + fixed((*it)->mean_bias, 3) + " (" +
                                              fixed((*it)->std_error, 3) + ") |";
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace detail

inline std::string summarize(const BiasReport& r, Format f)
{
    if (r.rows.empty()) {
        throw std::invalid_argument("summarize: empty report");
    }
    switch (f) {
        case Format::Csv:
            return detail::render_csv(r);
        case Format::Json:
            return to_json(r).dump(2) + "\n";
        case Format::Markdown:
            return detail::render_markdown(r);
    }
    return {};
}

// ---------------------------------------------------------------- checks

struct SignatureCheck {
    std::string label;
    bool pass = false;
    std::string detail;
};

/// n = k mode: the D-estimator is within 5 SE of zero at every order, and the
/// natural estimator is negatively biased beyond 5 SE at orders >= 3.
inline std::vector<SignatureCheck> check_unbiasedness_signature(const BiasReport& r,
                                                                double z = 5.0)
{
    std::vector<SignatureCheck> out;
    for (const auto& row : r.rows) {
        SignatureCheck c;
        c.detail = "bias " + format_double(row.mean_bias) + ", se " + format_double(row.std_error);
        if (row.estimator == to_string(EstimatorKind::DExhaustive) ||
            row.estimator == to_string(EstimatorKind::DMonteCarlo)) {
            c.label = row.estimator + " k=" + std::to_string(row.order) + " n=" +
                      std::to_string(row.n) + " |bias| <= " + format_double(z) + " se";
            c.pass = std::abs(row.mean_bias) <= z * row.std_error;
        } else if (row.estimator == to_string(EstimatorKind::Natural) && row.order >= 3) {
            c.label = "natural k=" + std::to_string(row.order) + " n=" + std::to_string(row.n) +
                      " bias < -" + format_double(z) + " se";
            c.pass = row.mean_bias < -z * row.std_error;
        } else {
            continue;
        }
        out.push_back(std::move(c));
    }
    return out;
}

/// n > k mode: per sample size, |bias(d-mc)| < |bias(natural)| for at least
/// `min_wins` of the orders 3..8 present in the report.
inline std::vector<SignatureCheck> check_dominance_signature(const BiasReport& r, int min_wins = 5)
{
    std::map<std::size_t, std::pair<int, int>> tally;  // n -> (wins, orders)
    std::map<std::size_t, std::string> notes;
    for (const auto& row : r.rows) {
        if (row.estimator != to_string(EstimatorKind::Natural) || row.order < 3 || row.order > 8) {
            continue;
        }
        const auto* d = r.find(to_string(EstimatorKind::DMonteCarlo), row.n, row.order);
        if (d == nullptr) {
            continue;
        }
        auto& [wins, total] = tally[row.n];
        ++total;
        const bool win = std::abs(d->mean_bias) < std::abs(row.mean_bias);
        wins += win ? 1 : 0;
        notes[row.n] += " k=" + std::to_string(row.order) + (win ? ":D" : ":natural");
    }
    std::vector<SignatureCheck> out;
    for (const auto& [n, t] : tally) {
        const int need = std::min(min_wins, t.second);
        out.push_back({"n=" + std::to_string(n) + " d-mc beats natural at >= " +
                           std::to_string(need) + " of " + std::to_string(t.second) + " orders",
                       t.first >= need,
                       std::to_string(t.first) + " wins;" + notes[n]});
    }
    return out;
}

}  // namespace dmoments
