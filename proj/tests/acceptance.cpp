// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--only N[,N...]] [--threads T]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dmoments/dmoments.hpp"

namespace {

using namespace dmoments;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

unsigned g_threads = 1;

// 1. every catalog identity on 100 random laws
Outcome exact_catalog()
{
    RngStream rng{1001};
    IdentityOptions opt;  // tolerance 1e-10, orders up to 8
    int failures = 0;
    double worst = 0.0;
    std::string first_failure;
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = random_identity_inputs(rng, 6);
        for (const auto& e : identity_catalog()) {
            const auto report = verify_identity(e.name, in, opt);
            worst = std::max(worst, report.worst_rel_diff());
            if (!report.passed()) {
                ++failures;
                if (first_failure.empty()) {
                    first_failure = " first: " + std::string(e.name) + " law " + std::to_string(trial);
                }
            }
        }
    }
    return {failures == 0, "100 laws x " + std::to_string(identity_catalog().size()) +
                               " identities, " + std::to_string(failures) + " failures, worst rel diff " +
                               num(worst, 3) + first_failure};
}

// 2. E d_estimator_exhaustive = mu_k by enumeration over every sample of a 3-point law
Outcome exact_unbiasedness()
{
    const std::array<FiniteDistribution<double>, 3> laws{
        FiniteDistribution<double>({0.0, 1.0, 5.0}, {0.7, 0.2, 0.1}),
        FiniteDistribution<double>({-1.3, 0.4, 2.2}, {0.25, 0.5, 0.25}),
        FiniteDistribution<double>({-0.6, 0.9, 3.7}, {0.45, 0.35, 0.2}),
    };
    const std::array<std::pair<int, int>, 5> cases{{{2, 2}, {3, 3}, {4, 4}, {5, 4}, {4, 3}}};
    double worst = 0.0;
    bool pass = true;
    for (const auto& law : laws) {
        for (const auto& [n, k] : cases) {
            const double e = expect_iid(law, static_cast<std::size_t>(n), [k = k](std::span<const double> z) {
                return d_estimator_exhaustive(z, k).value;
            });
            const auto c = compare("", e, central_moment_exact(law, k), 1e-9);
            worst = std::max(worst, c.rel_diff);
            pass = pass && c.pass;
        }
    }
    return {pass, "3 laws x (n,k) in {(2,2),(3,3),(4,4),(5,4),(4,3)}, worst rel diff " + num(worst, 3)};
}

constexpr std::uint64_t kTableOneSeed = 42;

ExperimentConfig table_one_config(unsigned threads)
{
    ExperimentConfig c;
    c.orders = {2, 3, 4, 5, 6, 7, 8};
    c.replications = 100'000;
    c.seed = kTableOneSeed;
    c.threads = threads;
    return c;
}

BiasReport& table_one_report()
{
    static BiasReport report = run_bias_experiment(table_one_config(1));
    return report;
}

// 3. n = k experiment against the published natural-estimator cells
Outcome table_one()
{
    const auto& r = table_one_report();
    constexpr double kPublishedReplications = 2e7;
    const std::array<double, 6> published{-0.167, -0.258, -0.768, -2.171, -8.321, -33.739};
    bool pass = true;
    std::string detail;
    for (int k = 3; k <= 8; ++k) {
        const auto* nat = r.find("natural", static_cast<std::size_t>(k), k);
        // the published cell is itself an average over 2e7 replications
        const double se_pub = nat->std_error * std::sqrt(static_cast<double>(nat->replications) / kPublishedReplications);
        const double combined = std::hypot(nat->std_error, se_pub);
        const double z = (nat->mean_bias - published[static_cast<std::size_t>(k - 3)]) / combined;
        pass = pass && std::abs(z) <= 5.0;
        detail += " k" + std::to_string(k) + " nat " + num(nat->mean_bias) + " z=" + num(z, 2);
    }
    for (int k = 2; k <= 8; ++k) {
        const auto* d = r.find("d-exhaustive", static_cast<std::size_t>(k), k);
        const double z = d->mean_bias / d->std_error;
        pass = pass && std::abs(z) <= 5.0;
        detail += " | D k" + std::to_string(k) + " z=" + num(z, 2);
    }
    const double mu6 = r.find("natural", 6, 6)->true_value;
    pass = pass && mu6 == 4.140625;
    return {pass, "seed " + std::to_string(kTableOneSeed) + ", R=1e5, mu6=" + num(mu6, 8) + ";" + detail};
}

// 4. n > k experiment: d-mc beats natural at >= 5 of orders 3..8, per n
Outcome table_two()
{
    ExperimentConfig c;
    c.mode = ExperimentMode::MonteCarloNGreaterK;
    c.orders = {3, 4, 5, 6, 7, 8};
    c.sample_sizes = {50, 100};
    c.replications = 500;
    c.mc_tuples = 30'000;
    c.seed = 42;
    c.threads = g_threads;
    const auto r = run_bias_experiment(c);
    bool pass = true;
    std::string detail = "seed 42, R=500, N=30000;";
    for (const auto& check : check_dominance_signature(r, 5)) {
        pass = pass && check.pass;
        detail += " " + check.label + " (" + check.detail + ")";
    }
    return {pass, detail};
}

// 5. numeric summation identities on 1000 random instances each
Outcome numeric_identities()
{
    RngStream rng{1005};
    double worst = 0.0;
    bool pass = true;
    double min_lagrange = 0.0;
    const auto vec = [&rng](std::size_t n) {
        std::vector<double> v(n);
        for (auto& e : v) {
            e = 4.0 * rng.uniform() - 2.0;
        }
        return v;
    };
    for (int i = 0; i < 1000; ++i) {
        const auto n = 2 + rng.uniform_index(99);
        const auto x = vec(n);
        const auto y = vec(n);
        const auto a = vec(n);
        const auto b = vec(n);
        const auto c = vec(n);
        const auto d = vec(n);
        const auto lg = check_lagrange(x, y);
        for (const auto& r : {check_gini_variance(x), check_gini_covariance(x, y), lg.identity,
                              check_binet_cauchy(a, b, c, d)}) {
            worst = std::max(worst, r.rel_diff);
            pass = pass && r.passed(1e-10);
        }
        min_lagrange = std::min(min_lagrange, lg.identity.lhs);
        pass = pass && lg.identity.lhs >= -1e-12;
    }
    return {pass, "4 identities x 1000 instances, worst rel diff " + num(worst, 3) +
                      ", min Lagrange lhs " + num(min_lagrange, 3)};
}

double on_grid(double v) { return std::ldexp(std::round(std::ldexp(v, 40)), -40); }

// 6. kernel invariance, homogeneity and the exact-expectation cross-oracle
Outcome kernel_invariants()
{
    RngStream rng{1006};
    double worst = 0.0;
    const auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
    };
    std::vector<double> x;
    std::vector<double> shifted;
    std::vector<double> scaled;
    for (int k = 2; k <= 10; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        x.resize(ku);
        shifted.resize(ku);
        scaled.resize(ku);
        for (int t = 0; t < 1000; ++t) {
            // grid points and short dyadic factors keep x + c and lambda x exact
            const double c = on_grid(16.0 * rng.uniform() - 8.0);
            const double lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) *
                                  std::ldexp(static_cast<double>(1 + 2 * rng.uniform_index(8)),
                                             -static_cast<int>(rng.uniform_index(4)));
            for (std::size_t i = 0; i < ku; ++i) {
                x[i] = on_grid(4.0 * rng.uniform() - 2.0);
                shifted[i] = x[i] + c;
                scaled[i] = lambda * x[i];
            }
            const double lk = std::pow(lambda, k);
            const KernelOrder order{k};
            const double h = kernel_h(order, x);
            const double b = kernel_mu_bar(k, x);
            worst = std::max({worst, rel(kernel_h(order, shifted), h), rel(kernel_h(order, scaled), lk * h),
                              rel(kernel_mu_bar(k, shifted), b), rel(kernel_mu_bar(k, scaled), lk * b)});
            if (k % 2 == 0) {
                const double m = kernel_mu_tilde(order, x);
                worst = std::max({worst, rel(kernel_mu_tilde(order, shifted), m),
                                  rel(kernel_mu_tilde(order, scaled), lk * m)});
            }
        }
    }
    double worst_cross = 0.0;
    for (int law_index = 0; law_index < 20; ++law_index) {
        const auto size = 2 + static_cast<int>(rng.uniform_index(5));
        std::vector<double> support(static_cast<std::size_t>(size));
        std::vector<double> weights(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) {
            support[static_cast<std::size_t>(i)] = 4.0 * rng.uniform() - 2.0;
            weights[static_cast<std::size_t>(i)] = rng.exponential(1.0);
        }
        const FiniteDistribution<double> law(std::move(support), std::move(weights));
        for (int k = 2; k <= 6; ++k) {
            const auto e = expect_iid_many<2>(law, static_cast<std::size_t>(k),
                                              [k](std::span<const double> z, std::size_t, std::span<double> out) {
                                                  out[0] = kernel_h(KernelOrder{k}, z);
                                                  out[1] = kernel_mu_bar(k, z);
                                              });
            worst_cross = std::max(worst_cross, rel(e[0], e[1]));
        }
    }
    const bool pass = worst <= 1e-12 && worst_cross <= 1e-10;
    return {pass, "k=2..10 x 1000 tuples, worst rel diff " + num(worst, 3) +
                      "; E h_k vs E mu_bar_k (k<=6, 20 laws) worst " + num(worst_cross, 3)};
}

// 7. closed-form exponential moments against a 1e7-draw Monte Carlo
Outcome closed_form_gate()
{
    const auto spec = DistributionSpec::exponential(2.0);
    constexpr std::size_t kDraws = 10'000'000;
    constexpr int kMax = 8;
    RngStream rng{1007};
    const double mean = spec.mean();
    std::array<CompensatedSum<double>, kMax + 1> sums{};
    for (std::size_t i = 0; i < kDraws; ++i) {
        const double d = spec.draw(rng) - mean;
        double p = d;
        for (int k = 1; k <= kMax; ++k) {
            sums[static_cast<std::size_t>(k)] += p;
            p *= d;
        }
    }
    bool pass = true;
    std::string detail = "1e7 draws, z:";
    const auto nd = static_cast<double>(kDraws);
    for (int k = 2; k <= kMax; ++k) {
        const double mc = sums[static_cast<std::size_t>(k)].value() / nd;
        const double truth = closed_form_central_moment(spec, k);
        const double var = closed_form_central_moment(spec, 2 * k) - truth * truth;
        const double z = (mc - truth) / std::sqrt(var / nd);
        pass = pass && std::abs(z) <= 5.0;
        detail += " k" + std::to_string(k) + "=" + num(z, 2);
    }
    return {pass, detail};
}

// 8. criterion 3 rerun with two threads is bit-identical
Outcome determinism()
{
    const auto& single = table_one_report();
    const auto again = run_bias_experiment(table_one_config(2));
    const bool same = again == single;
    return {same, std::string("threads 1 vs 2, ") + (same ? "reports identical" : "reports differ")};
}

}  // namespace

int main(int argc, char** argv)
{
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            for (const auto v : parse_int_list(argv[++i])) {
                only.insert(static_cast<int>(v));
            }
        } else if (arg == "--threads" && i + 1 < argc) {
            g_threads = static_cast<unsigned>(std::stoul(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--only N[,N...]] [--threads T]\n");
            return 2;
        }
    }

    const std::array<std::pair<const char*, std::function<Outcome()>>, 8> criteria{{
        {"exact identity catalog", exact_catalog},
        {"exact unbiasedness by enumeration", exact_unbiasedness},
        {"n = k bias table", table_one},
        {"n > k Monte Carlo dominance", table_two},
        {"numeric summation identities", numeric_identities},
        {"kernel invariants", kernel_invariants},
        {"closed-form exponential moments", closed_form_gate},
        {"determinism across thread counts", determinism},
    }};

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && only.count(id) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += out.pass ? 0 : 1;
        std::printf("%s %d %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first, secs,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
