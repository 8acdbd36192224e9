// dmoments: command-line front end.
//
//   verify    numeric summation identities or the exact-expectation catalog
//   estimate  estimators on a data file
//   expect    exact E{kernel} on a finite law
//   simulate  bias experiments
//   moments   closed-form central moments
//
// Exit status: 0 success, 1 failed check, 2 usage or input error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmoments/dmoments.hpp"
#include "table.hpp"

namespace {

using namespace dmoments;
using cli::Table;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string out;
    unsigned threads = 1;
    bool check = false;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--seed", c.seed, "RNG seed (random and printed when omitted)");
    sub->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"csv", "json", "md"}))
        ->capture_default_str();
    sub->add_option("--out", c.out, "write output to PATH instead of stdout");
    sub->add_option("--threads", c.threads, "worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    sub->add_flag("--check", c.check, "exit 1 if any check fails");
}

std::uint64_t effective_seed(const Common& c)
{
    std::uint64_t s = 0;
    if (c.seed) {
        s = *c.seed;
    } else {
        std::random_device rd;
        s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    std::cerr << "seed: " << s << "\n";
    return s;
}

void emit(const Common& c, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
        throw InputError("cannot write '" + c.out + "'");
    }
    f << text;
}

std::vector<int> orders_from(const std::string& text)
{
    std::vector<int> out;
    for (const auto v : parse_int_list(text)) {
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// ------------------------------------------------------------------ moments

struct MomentsArgs {
    std::string dist;
    std::string orders = "2..8";
};

int run_moments(const Common& c, const MomentsArgs& a)
{
    const auto spec = parse_distribution_spec(a.dist);
    Table t{{"order", "central_moment"}, {}};
    for (const int k : orders_from(a.orders)) {
        t.add({k, spec.central_moment(k)});
    }
    emit(c, cli::render(t, parse_format(c.format)));
    return kExitOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
    std::string numeric;
    std::string catalog;
    std::size_t n = 50;
    std::optional<std::uint64_t> trials;
    std::vector<std::string> data;
    double tolerance = 1e-10;
    int max_support = 6;
    int max_order = 8;
    std::string dist;
};

struct Tally {
    std::uint64_t trials = 0;
    std::uint64_t passed = 0;
    double worst = 0.0;
    std::vector<std::string> failures;

    void record(bool ok, double rel, const std::string& what)
    {
        ++trials;
        passed += ok ? 1 : 0;
        worst = std::max(worst, rel);
        if (!ok && failures.size() < 5) {
            failures.push_back(what);
        }
    }
};

const std::vector<std::string> kNumericNames{"gini-variance", "gini-covariance", "lagrange",
                                             "binet-cauchy"};

std::vector<double> random_vector(RngStream& rng, std::size_t n)
{
    std::vector<double> v(n);
    for (auto& e : v) {
        e = -10.0 + 20.0 * rng.uniform();
    }
    return v;
}

Tally numeric_trials(const std::string& name, std::size_t index, const VerifyArgs& a,
                     std::uint64_t seed, std::uint64_t trials, unsigned threads)
{
    std::vector<std::pair<bool, double>> results(trials);
    std::vector<std::string> notes(trials);
    parallel_for(trials, threads, [&](std::uint64_t t) {
        RngStream rng{seed, t, index};
        std::array<std::vector<double>, 4> v;
        for (auto& e : v) {
            e = random_vector(rng, a.n);
        }
        bool ok = false;
        double rel = 0.0;
        if (name == "gini-variance") {
            const auto r = check_gini_variance(v[0]);
            ok = r.passed(a.tolerance);
            rel = r.rel_diff;
        } else if (name == "gini-covariance") {
            const auto r = check_gini_covariance(v[0], v[1]);
            ok = r.passed(a.tolerance);
            rel = r.rel_diff;
        } else if (name == "lagrange") {
            const auto r = check_lagrange(v[0], v[1]);
            ok = r.identity.passed(a.tolerance) && r.nonnegative;
            rel = r.identity.rel_diff;
        } else {
            const auto r = check_binet_cauchy(v[0], v[1], v[2], v[3]);
            ok = r.passed(a.tolerance);
            rel = r.rel_diff;
        }
        results[t] = {ok, rel};
        notes[t] = name + " trial " + std::to_string(t) + " rel " + format_double(rel);
    });
    Tally tally;
    for (std::uint64_t t = 0; t < trials; ++t) {
        tally.record(results[t].first, results[t].second, notes[t]);
    }
    return tally;
}

Tally numeric_on_data(const std::string& name, const VerifyArgs& a)
{
    std::vector<std::vector<double>> v;
    for (const auto& path : a.data) {
        v.push_back(read_data_vector(path));
    }
    const std::size_t need = name == "gini-variance" ? 1 : name == "binet-cauchy" ? 4 : 2;
    if (v.size() < need) {
        throw UsageError(name + " needs " + std::to_string(need) + " --data files");
    }
    Tally tally;
    if (name == "gini-variance") {
        const auto r = check_gini_variance(v[0]);
        tally.record(r.passed(a.tolerance), r.rel_diff, name);
    } else if (name == "gini-covariance") {
        const auto r = check_gini_covariance(v[0], v[1]);
        tally.record(r.passed(a.tolerance), r.rel_diff, name);
    } else if (name == "lagrange") {
        const auto r = check_lagrange(v[0], v[1]);
        tally.record(r.identity.passed(a.tolerance) && r.nonnegative, r.identity.rel_diff, name);
    } else {
        const auto r = check_binet_cauchy(v[0], v[1], v[2], v[3]);
        tally.record(r.passed(a.tolerance), r.rel_diff, name);
    }
    return tally;
}

int run_verify(const Common& c, const VerifyArgs& a)
{
    if (a.numeric.empty() == a.catalog.empty()) {
        throw UsageError("verify: give exactly one of --numeric NAME or --catalog NAME");
    }
    Table t{{"check", "trials", "passed", "failed", "worst_rel_diff"}, {}};
    std::vector<std::string> failures;
    const auto add_row = [&](const std::string& name, const Tally& tally) {
        t.add({name, tally.trials, tally.passed, tally.trials - tally.passed, tally.worst});
        failures.insert(failures.end(), tally.failures.begin(), tally.failures.end());
    };

    if (!a.numeric.empty()) {
        std::vector<std::string> names;
        if (a.numeric == "all") {
            names = kNumericNames;
        } else if (std::find(kNumericNames.begin(), kNumericNames.end(), a.numeric) !=
                   kNumericNames.end()) {
            names = {a.numeric};
        } else {
            throw UsageError("unknown numeric identity '" + a.numeric + "'");
        }
        if (!a.data.empty()) {
            for (const auto& name : names) {
                add_row(name, numeric_on_data(name, a));
            }
        } else {
            if (a.n < 2) {
                throw UsageError("--n must be >= 2");
            }
            const std::uint64_t seed = effective_seed(c);
            const std::uint64_t trials = a.trials.value_or(1000);
            for (std::size_t i = 0; i < names.size(); ++i) {
                const auto idx = static_cast<std::size_t>(
                    std::find(kNumericNames.begin(), kNumericNames.end(), names[i]) -
                    kNumericNames.begin());
                add_row(names[i], numeric_trials(names[i], idx, a, seed, trials, c.threads));
            }
        }
    } else {
        std::vector<std::string> names;
        for (const auto& e : identity_catalog()) {
            if (a.catalog == "all" || a.catalog == e.name) {
                names.emplace_back(e.name);
            }
        }
        if (names.empty()) {
            throw UsageError("unknown catalog identity '" + a.catalog + "'");
        }
        std::optional<FiniteDistribution<double>> fixed_law;
        if (!a.dist.empty()) {
            const auto spec = parse_distribution_spec(a.dist);
            const auto* fin = std::get_if<Finite>(&spec.kind());
            if (fin == nullptr) {
                throw UsageError("--dist for the catalog must be finite:@FILE");
            }
            fixed_law = fin->law;
        }
        const std::uint64_t seed = effective_seed(c);
        const std::uint64_t laws = a.trials.value_or(100);
        IdentityOptions opt;
        opt.tolerance = a.tolerance;
        opt.max_order = a.max_order;
        std::vector<std::vector<CheckReport>> reports(laws);
        parallel_for(laws, c.threads, [&](std::uint64_t l) {
            RngStream rng{seed, l};
            auto inputs = random_identity_inputs(rng, a.max_support);
            if (fixed_law) {
                inputs.scalar = *fixed_law;
            }
            for (const auto& name : names) {
                reports[l].push_back(verify_identity(name, inputs, opt));
            }
        });
        for (std::size_t i = 0; i < names.size(); ++i) {
            Tally tally;
            for (std::uint64_t l = 0; l < laws; ++l) {
                const auto& r = reports[l][i];
                std::string what = names[i] + " law " + std::to_string(l);
                for (const auto& cmp : r.comparisons) {
                    if (!cmp.pass) {
                        what += ": " + cmp.label + " lhs " + format_double(cmp.lhs) + " rhs " +
                                format_double(cmp.rhs);
                        break;
                    }
                }
                tally.record(r.passed(), r.worst_rel_diff(), what);
            }
            add_row(names[i], tally);
        }
    }
    emit(c, cli::render(t, parse_format(c.format)));
    for (const auto& f : failures) {
        std::cerr << "FAIL " << f << "\n";
    }
    // a verification that fails is a failed check whether or not --check was given
    return failures.empty() ? kExitOk : kExitCheckFailed;
}

// ------------------------------------------------------------------ expect

struct ExpectArgs {
    std::string dist;
    std::string kernel = "h";
    int order = 2;
    double tolerance = 1e-10;
    std::uint64_t cap = kDefaultEnumerationCap;
};

int run_expect(const Common& c, const ExpectArgs& a)
{
    const auto spec = parse_distribution_spec(a.dist);
    const auto* fin = std::get_if<Finite>(&spec.kind());
    if (fin == nullptr) {
        throw UsageError("expect needs a finite law (--dist finite:@FILE)");
    }
    const auto& law = fin->law;
    const int k = a.order;
    using Args = std::span<const double>;
    double value = 0.0;
    std::size_t reps = static_cast<std::size_t>(k);
    std::optional<double> target = central_moment_exact(law, k);
    double extra_scale = 0.0;
    if (a.kernel == "h") {
        value = expect_iid(law, reps, [k](Args x) { return kernel_h(KernelOrder{k}, x); }, a.cap);
    } else if (a.kernel == "mu-bar") {
        value = expect_iid(law, reps, [k](Args x) { return kernel_mu_bar(k, x); }, a.cap);
    } else if (a.kernel == "mu-tilde") {
        if (k % 2 != 0) {
            throw UsageError("mu-tilde needs an even order");
        }
        value = expect_iid(law, reps, [k](Args x) { return kernel_mu_tilde(KernelOrder{k}, x); },
                           a.cap);
    } else if (a.kernel == "p") {
        reps = static_cast<std::size_t>(k) + 1;
        value = expect_iid(law, reps, [](Args x) { return kernel_p(x[0], x.subspan(1)); }, a.cap);
    } else if (a.kernel == "diff-power") {
        // E(X1 - X2)^k: zero for odd k, no closed target for even k
        reps = 2;
        value = expect_iid(law, 2, [k](Args x) { return detail::ipow(x[0] - x[1], k); }, a.cap);
        if (k % 2 != 0) {
            target = 0.0;
            extra_scale = expect_iid(
                law, 2, [k](Args x) { return std::abs(detail::ipow(x[0] - x[1], k)); }, a.cap);
        } else {
            target.reset();
        }
    } else {
        throw UsageError("unknown kernel '" + a.kernel + "'");
    }
    Table t{{"kernel", "order", "replications", "expectation", "central_moment", "rel_diff", "pass"},
            {}};
    bool pass = true;
    nlohmann::json rel = nullptr;
    nlohmann::json ok = nullptr;
    if (target) {
        const auto cmp = compare("E " + a.kernel, value, *target, a.tolerance, extra_scale);
        pass = cmp.pass;
        rel = cmp.rel_diff;
        ok = cmp.pass;
    }
    t.add({a.kernel, k, reps, value, target ? nlohmann::json(*target) : nlohmann::json(nullptr),
           rel, ok});
    emit(c, cli::render(t, parse_format(c.format)));
    return (c.check && !pass) ? kExitCheckFailed : kExitOk;
}

// ------------------------------------------------------------------ estimate

struct EstimateArgs {
    std::string file;
    std::string y_file;
    std::size_t column = 0;
    std::string method = "natural";
    std::string orders = "2";
    std::uint64_t tuples = 30'000;
    bool verify_pairwise = false;
    std::uint64_t cap = kDefaultTupleCap;
};

int run_estimate(const Common& c, const EstimateArgs& a)
{
    const auto x = read_data_vector(a.file, a.column);
    const Route route = a.verify_pairwise ? Route::Verify : Route::Algebraic;
    Table t{{"method", "order", "n", "value", "tuples_used", "mc_std_error"}, {}};
    const auto n = x.size();
    const auto need_y = [&] {
        if (a.y_file.empty()) {
            throw UsageError(a.method + " needs --y-file");
        }
        return read_data_vector(a.y_file, a.column);
    };
    if (a.method == "natural" || a.method == "natural-n" || a.method == "d-exhaustive" ||
        a.method == "d-mc") {
        std::optional<RngStream> rng;
        if (a.method == "d-mc") {
            rng.emplace(effective_seed(c));
        }
        for (const int k : orders_from(a.orders)) {
            MomentEstimate e;
            if (a.method == "natural") {
                e = natural_moment(x, k);
            } else if (a.method == "natural-n") {
                e = natural_moment(x, k, NaturalDivisor::N);
            } else if (a.method == "d-exhaustive") {
                e = d_estimator_exhaustive(x, k, {ExhaustiveRoute::Auto, a.cap});
            } else {
                e = d_estimator_mc(x, k, a.tuples, *rng);
            }
            t.add({a.method, k, n, e.value, e.tuples_used,
                   e.mc_std_error ? nlohmann::json(*e.mc_std_error) : nlohmann::json(nullptr)});
        }
    } else if (a.method == "gini-variance") {
        t.add({a.method, 2, n, gini_variance(x, route), nullptr, nullptr});
    } else if (a.method == "gini-covariance") {
        t.add({a.method, 2, n, gini_covariance(x, need_y(), route), nullptr, nullptr});
    } else if (a.method == "regression-beta") {
        t.add({a.method, nullptr, n, regression_beta(x, need_y(), route), nullptr, nullptr});
    } else if (a.method == "skew-kurt") {
        const auto s = skewness_kurtosis_d(x, route);
        t.add({"skewness", 3, n, s.skewness ? nlohmann::json(*s.skewness) : nlohmann::json(nullptr),
               nullptr, nullptr});
        t.add({"kurtosis", 4, n, s.kurtosis, nullptr, nullptr});
        t.add({"excess-kurtosis", 4, n, s.excess_kurtosis, nullptr, nullptr});
    } else {
        throw UsageError("unknown method '" + a.method + "'");
    }
    emit(c, cli::render(t, parse_format(c.format)));
    return kExitOk;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string config;
    std::string from_json;
    std::string dist;
    std::string mode;
    std::string orders;
    std::string sizes;
    std::optional<std::uint64_t> replications;
    std::optional<std::uint64_t> tuples;
    std::string divisor;
};

int run_simulate(const Common& c, const SimulateArgs& a, CLI::App* sub)
{
    BiasReport report;
    ExperimentMode mode = ExperimentMode::MinimalNEqualsK;
    if (!a.from_json.empty()) {
        report = bias_report_from_json(nlohmann::json::parse(read_text_file(a.from_json)));
        mode = parse_mode(report.mode);
    } else {
        nlohmann::json j = nlohmann::json::object();
        if (!a.config.empty()) {
            j = nlohmann::json::parse(read_text_file(a.config));
        }
        if (!a.dist.empty()) {
            j["distribution"] = a.dist;
        }
        if (!a.mode.empty()) {
            j["mode"] = a.mode;
        }
        if (!a.orders.empty()) {
            j["orders"] = a.orders;
        }
        if (!a.sizes.empty()) {
            j["sample_sizes"] = a.sizes;
        }
        if (a.replications) {
            j["replications"] = *a.replications;
        }
        if (a.tuples) {
            j["mc_tuples"] = *a.tuples;
        }
        if (!a.divisor.empty()) {
            j["natural_divisor"] = a.divisor;
        }
        Common seeded = c;
        if (!seeded.seed && j.contains("seed")) {
            seeded.seed = j.at("seed").get<std::uint64_t>();
        }
        auto cfg = experiment_config_from_json(j);
        if (cfg.mode == ExperimentMode::MonteCarloNGreaterK && cfg.sample_sizes.empty()) {
            cfg.sample_sizes = {50, 100};
        }
        if (!j.contains("replications")) {
            cfg.replications = cfg.mode == ExperimentMode::MinimalNEqualsK ? 100'000 : 500;
        }
        cfg.seed = effective_seed(seeded);
        if (sub->get_option("--threads")->count() > 0 || !j.contains("threads")) {
            cfg.threads = c.threads;
        }
        mode = cfg.mode;
        report = run_bias_experiment(cfg);
    }
    emit(c, summarize(report, parse_format(c.format)));
    if (!c.check) {
        return kExitOk;
    }
    const auto checks = mode == ExperimentMode::MinimalNEqualsK ? check_unbiasedness_signature(report)
                                                                : check_dominance_signature(report);
    bool ok = true;
    for (const auto& chk : checks) {
        std::cerr << (chk.pass ? "PASS " : "FAIL ") << chk.label << " (" << chk.detail << ")\n";
        ok = ok && chk.pass;
    }
    return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pairwise-difference central-moment toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    Common c_moments;
    Common c_verify;
    Common c_expect;
    Common c_estimate;
    Common c_simulate;

    MomentsArgs moments;
    auto* sub_moments = app.add_subcommand("moments", "closed-form central moments of a law");
    add_common(sub_moments, c_moments);
    sub_moments->add_option("--dist", moments.dist, "exp:RATE | normal:MEAN,SD | finite:@FILE")
        ->required();
    sub_moments->add_option("--orders", moments.orders, "orders, e.g. 2..8")->capture_default_str();

    VerifyArgs verify;
    auto* sub_verify =
        app.add_subcommand("verify", "numeric identities (--numeric) or the exact catalog (--catalog)");
    add_common(sub_verify, c_verify);
    sub_verify->add_option("--numeric", verify.numeric,
                           "gini-variance | gini-covariance | lagrange | binet-cauchy | all");
    sub_verify->add_option("--catalog", verify.catalog, "catalog identity name or all");
    sub_verify->add_option("--n", verify.n, "vector length for random numeric trials")
        ->capture_default_str();
    sub_verify->add_option("--trials", verify.trials,
                           "random trials (numeric, default 1000) or laws (catalog, default 100)");
    sub_verify->add_option("--data", verify.data, "data files instead of random vectors");
    sub_verify->add_option("--tolerance", verify.tolerance)->capture_default_str();
    sub_verify->add_option("--max-support", verify.max_support)
        ->check(CLI::Range(2, 64))
        ->capture_default_str();
    sub_verify->add_option("--max-order", verify.max_order)
        ->check(CLI::Range(2, kMaxOrder))
        ->capture_default_str();
    sub_verify->add_option("--dist", verify.dist, "fixed univariate law finite:@FILE for the catalog");

    ExpectArgs expect;
    auto* sub_expect = app.add_subcommand("expect", "exact expectation of a kernel on a finite law");
    add_common(sub_expect, c_expect);
    sub_expect->add_option("--dist", expect.dist, "finite:@FILE")->required();
    sub_expect->add_option("--kernel", expect.kernel)
        ->check(CLI::IsMember({"h", "mu-bar", "mu-tilde", "p", "diff-power"}))
        ->capture_default_str();
    sub_expect->add_option("--order", expect.order)
        ->check(CLI::Range(1, 2 * kMaxOrder - 1))
        ->capture_default_str();
    sub_expect->add_option("--tolerance", expect.tolerance)->capture_default_str();
    sub_expect->add_option("--cap", expect.cap, "enumeration cap")->capture_default_str();

    EstimateArgs estimate;
    auto* sub_estimate = app.add_subcommand("estimate", "estimators on a data file");
    add_common(sub_estimate, c_estimate);
    sub_estimate->add_option("--file", estimate.file, "CSV column or JSON array")->required();
    sub_estimate->add_option("--y-file", estimate.y_file, "second variable (covariance, regression)");
    sub_estimate->add_option("--column", estimate.column, "CSV column, 0-based")
        ->capture_default_str();
    sub_estimate
        ->add_option("--method", estimate.method)
        ->check(CLI::IsMember({"natural", "natural-n", "d-exhaustive", "d-mc", "gini-variance",
                               "gini-covariance", "regression-beta", "skew-kurt"}))
        ->capture_default_str();
    sub_estimate->add_option("--order,--orders", estimate.orders, "order(s), e.g. 3 or 2..6")
        ->capture_default_str();
    sub_estimate->add_option("--tuples", estimate.tuples, "Monte Carlo tuples N")
        ->capture_default_str();
    sub_estimate->add_flag("--verify-pairwise", estimate.verify_pairwise,
                           "cross-check O(n) results against the pairwise sums");
    sub_estimate->add_option("--cap", estimate.cap, "tuple cap for d-exhaustive")
        ->capture_default_str();

    SimulateArgs simulate;
    auto* sub_simulate = app.add_subcommand("simulate", "bias experiments");
    add_common(sub_simulate, c_simulate);
    sub_simulate->add_option("--config", simulate.config, "experiment JSON");
    sub_simulate->add_option("--from-json", simulate.from_json,
                             "re-render a saved JSON report instead of running");
    sub_simulate->add_option("--dist", simulate.dist, "default exp:2");
    sub_simulate->add_option("--mode", simulate.mode)
        ->check(CLI::IsMember({"minimal", "monte-carlo"}));
    sub_simulate->add_option("--orders", simulate.orders, "default 2..8");
    sub_simulate->add_option("--n", simulate.sizes, "sample sizes (monte-carlo), default 50,100");
    sub_simulate->add_option("--replications", simulate.replications,
                             "default 100000 (minimal) or 500 (monte-carlo)");
    sub_simulate->add_option("--tuples", simulate.tuples, "Monte Carlo tuples N, default 30000");
    sub_simulate->add_option("--natural-divisor", simulate.divisor)
        ->check(CLI::IsMember({"n-1", "n"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sub_moments->parsed()) {
            return run_moments(c_moments, moments);
        }
        if (sub_verify->parsed()) {
            return run_verify(c_verify, verify);
        }
        if (sub_expect->parsed()) {
            return run_expect(c_expect, expect);
        }
        if (sub_estimate->parsed()) {
            return run_estimate(c_estimate, estimate);
        }
        if (sub_simulate->parsed()) {
            return run_simulate(c_simulate, simulate, sub_simulate);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
