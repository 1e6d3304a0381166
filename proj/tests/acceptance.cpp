// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// gated criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/numerics.hpp"
#include "coopcache/sim.hpp"
#include "coopcache/solvers.hpp"
#include "test_support.hpp"

using namespace coopcache;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail = "") {
    std::printf("%s  criterion %d: %s%s%s%s\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.empty() ? "" : "  [", detail.c_str(),
                detail.empty() ? "" : "]");
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void info(const std::string& message) {
    std::printf("INFO  %s\n", message.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
               .count() /
           1000.0;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

bool nondecreasing(const std::vector<double>& xs, double slack) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] < xs[i - 1] - slack) return false;
    }
    return true;
}

Scenario two_group_zipf(std::size_t files, double gamma_r, double lambda_each,
                        std::uint64_t permute_seed) {
    Scenario s;
    s.range_d = 5.0;
    s.groups.push_back({lambda_each, make_zipf(files, gamma_r), std::nullopt});
    s.groups.push_back(
        {lambda_each, permute_pmf(make_zipf(files, gamma_r), permute_seed),
         std::nullopt});
    s.weights = s.social_weights();
    s.validate();
    return s;
}

double isolated_utility(const Scenario& s, std::size_t k, const Pmf& c) {
    const Scenario view = single_group_view(s, k);
    CachingProfile own;
    own.per_group = {c};
    return group_utility(view, own, 0);
}

CachingProfile solve_benchmark(const Scenario& s, Regime regime) {
    CachingProfile caching;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        caching.per_group.push_back(regime == Regime::partial
                                        ? solve_partial(s, k).caching
                                        : solve_noncoop(s, k).caching);
    }
    return caching;
}

// --------------------------------------------------------------------------

void criterion_1_monte_carlo() {
    const auto t0 = std::chrono::steady_clock::now();
    int outliers = 0;
    double worst_sigma = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Scenario s = testsup::random_instance(seed);
        const CachingProfile caching = testsup::random_caching(s, seed + 500);
        const std::size_t k = seed % s.group_count();
        const double closed = group_utility(s, caching, k);
        const auto mc = sim::monte_carlo_utility(s, caching, k, 100000, seed);
        const double sigmas =
            mc.stderr_ > 0.0
                ? std::abs(closed - mc.estimate) / mc.stderr_
                : (closed == mc.estimate ? 0.0 : 1e9);
        worst_sigma = std::max(worst_sigma, sigmas);
        if (sigmas > 3.0) ++outliers;
    }
    const double elapsed = seconds_since(t0);
    report(1, "closed-form utility vs Monte Carlo (20 instances)",
           outliers <= 1 && elapsed < 60.0,
           "outliers=" + std::to_string(outliers) +
               ", worst=" + fmt(worst_sigma) + " sigma, " + fmt(elapsed) +
               " s");
}

void criterion_2_grid_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;

    {  // single group, F=3, non-cooperative
        Scenario s;
        s.range_d = 5.0;
        s.groups.push_back({0.05, Pmf({0.6, 0.3, 0.1}), std::nullopt});
        s.weights = {1.0};
        const GroupSolve gs = solve_noncoop(s, 0);
        const double obj = isolated_utility(s, 0, gs.caching);
        const GridResult grid =
            oracle_grid_search(s, {1.0}, 0.01, Regime::none, 0);
        pass = pass && obj >= grid.objective - 1e-3;
        detail += "none gap=" + fmt(obj - grid.objective);
    }
    Scenario s2;
    s2.range_d = 5.0;
    s2.groups.push_back({0.05, Pmf({0.5, 0.3, 0.2}), std::nullopt});
    s2.groups.push_back({0.05, Pmf({0.2, 0.3, 0.5}), std::nullopt});
    s2.weights = {0.5, 0.5};
    for (std::size_t k = 0; k < 2; ++k) {  // partial, per group
        const GroupSolve gs = solve_partial(s2, k);
        const double obj = partial_coop_utility(s2, k, gs.caching);
        const GridResult grid =
            oracle_grid_search(s2, s2.weights, 0.01, Regime::partial, k);
        pass = pass && obj >= grid.objective - 1e-3;
        detail += ", partial" + std::to_string(k + 1) +
                  " gap=" + fmt(obj - grid.objective);
    }
    {  // full cooperation over the product lattice
        double best = -1.0;
        for (const InitStrategy& init :
             {InitStrategy::uniform(), InitStrategy::adaptive(),
              InitStrategy::randomized(32, 5)}) {
            best = std::max(
                best, solve_full(s2, s2.weights, init).report.weighted_utility);
        }
        const GridResult grid =
            oracle_grid_search(s2, s2.weights, 0.01, Regime::full, 0, 3e7);
        pass = pass && best >= grid.objective - 1e-3;
        detail += ", full gap=" + fmt(best - grid.objective);
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 120.0;
    report(2, "solvers match exhaustive grid search (step 0.01, F=3)", pass,
           detail + ", " + fmt(elapsed) + " s");
}

void criterion_3_kkt() {
    bool pass = true;
    double worst = 0.0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const Scenario s = testsup::random_instance(seed);
        const std::size_t K = s.group_count();
        CachingProfile partial, none;
        std::vector<double> duals_p(K), duals_n(K);
        for (std::size_t k = 0; k < K; ++k) {
            const GroupSolve gp = solve_partial(s, k);
            const GroupSolve gn = solve_noncoop(s, k);
            partial.per_group.push_back(gp.caching);
            none.per_group.push_back(gn.caching);
            duals_p[k] = gp.dual;
            duals_n[k] = gn.dual;
        }
        const SolveTrace full =
            solve_full(s, s.weights, InitStrategy::adaptive());
        const double r_full = full.report.kkt_residual;
        const double r_partial = kkt_residual_partial(s, partial, duals_p);
        const double r_none = kkt_residual_noncoop(s, none, duals_n);
        worst = std::max({worst, r_full, r_partial, r_none});
        pass = pass && r_full <= 1e-6 && r_partial <= 1e-6 && r_none <= 1e-6;
    }
    report(3, "KKT residuals <= 1e-6 for all regimes (10 instances)", pass,
           "worst=" + fmt(worst));
}

void criterion_4_coordinate_descent() {
    const Scenario s = two_group_zipf(5, 0.9, 0.05, 3);
    bool pass = true;
    std::string detail;
    for (const std::vector<double>& w :
         {std::vector<double>{0.1, 0.9}, {0.5, 0.5}}) {
        double uniform_final = 0.0, adaptive_final = 0.0;
        for (int which = 0; which < 3; ++which) {
            const InitStrategy init =
                which == 0   ? InitStrategy::uniform()
                : which == 1 ? InitStrategy::adaptive()
                             : InitStrategy::randomized(32, s.seed);
            try {
                const SolveTrace trace = solve_full(s, w, init);
                pass = pass && trace.report.iterations <= 500;
                pass = pass &&
                       nondecreasing(trace.objective_per_sweep, 1e-12);
                if (which == 0) uniform_final = trace.report.weighted_utility;
                if (which == 1) adaptive_final = trace.report.weighted_utility;
            } catch (const IterationLimitError&) {
                pass = false;
            }
        }
        const bool adaptive_wins = adaptive_final >= uniform_final - 1e-6;
        info("criterion 4: w=(" + fmt(w[0]) + "," + fmt(w[1]) +
             ") adaptive=" + fmt(adaptive_final) +
             " uniform=" + fmt(uniform_final) +
             (adaptive_wins ? " (adaptive >= uniform - 1e-6)"
                            : " (adaptive BELOW uniform - 1e-6; logged, "
                              "not gated)"));
        detail += (detail.empty() ? "" : "; ") + std::string("w1=") +
                  fmt(w[0]) + " adaptive-uniform=" +
                  fmt(adaptive_final - uniform_final);
    }
    report(4, "coordinate descent converges monotonically (all inits)", pass,
           detail);
}

void criterion_5_regime_ordering() {
    const Scenario s = two_group_zipf(100, 0.9, 0.05, 42);
    const SolveTrace full = solve_full(s, s.weights, InitStrategy::adaptive());
    const std::vector<double> full_u = full.report.group_utilities;

    const CachingProfile partial = solve_benchmark(s, Regime::partial);
    const std::vector<double> partial_u = all_group_utilities(s, partial);
    const double partial_social = social_utility(s, partial);

    const CachingProfile none = solve_benchmark(s, Regime::none);
    std::vector<double> none_u(2);
    for (std::size_t k = 0; k < 2; ++k) {
        none_u[k] = isolated_utility(s, k, none.per_group[k]);
    }
    const double none_social = 0.5 * (none_u[0] + none_u[1]);

    bool pass = full.report.social_utility >= partial_social - 1e-9 &&
                full.report.social_utility >= none_social - 1e-9;

    const SweepOutcome sweep =
        pareto_sweep(s, two_group_weight_grid(21), InitStrategy::adaptive());
    auto dominated = [&](const std::vector<double>& u) {
        for (const ParetoPoint& p : sweep.points) {
            if (p.utilities[0] >= u[0] - 5e-3 && p.utilities[1] >= u[1] - 5e-3) {
                return true;
            }
        }
        return false;
    };
    pass = pass && dominated(partial_u) && dominated(none_u);

    // magnitude sanity bands around the reference values
    auto in_band = [](const std::vector<double>& u, double a, double b,
                      double tol) {
        return std::abs(u[0] - a) <= tol && std::abs(u[1] - b) <= tol;
    };
    pass = pass && in_band(full_u, 0.2937, 0.2941, 0.05);
    pass = pass && in_band(partial_u, 0.2839, 0.2371, 0.05);
    pass = pass && in_band(none_u, 0.2189, 0.2173, 0.05);

    report(5, "full cooperation dominates the benchmark regimes (F=100)",
           pass,
           "full=(" + fmt(full_u[0]) + "," + fmt(full_u[1]) + ") partial=(" +
               fmt(partial_u[0]) + "," + fmt(partial_u[1]) + ") none=(" +
               fmt(none_u[0]) + "," + fmt(none_u[1]) + ")");
}

void criterion_6_trends() {
    auto social_triple = [](const Scenario& s, double* out) {
        out[0] = solve_full(s, s.weights, InitStrategy::adaptive())
                     .report.social_utility;
        out[1] = social_utility(s, solve_benchmark(s, Regime::partial));
        const CachingProfile none = solve_benchmark(s, Regime::none);
        double iso = 0.0;
        for (std::size_t k = 0; k < s.group_count(); ++k) {
            iso += s.groups[k].density / s.lambda0() *
                   isolated_utility(s, k, none.per_group[k]);
        }
        out[2] = iso;
    };
    std::vector<std::vector<double>> by_gamma(3), by_density(3);
    for (double gamma_r : {0.2, 0.6, 1.0, 1.4, 1.8}) {
        double u[3];
        social_triple(two_group_zipf(100, gamma_r, 0.05, 42), u);
        for (int i = 0; i < 3; ++i) by_gamma[i].push_back(u[i]);
    }
    for (double lambda0 : {0.02, 0.06, 0.10, 0.14, 0.18}) {
        double u[3];
        social_triple(two_group_zipf(100, 0.9, lambda0 / 2.0, 42), u);
        for (int i = 0; i < 3; ++i) by_density[i].push_back(u[i]);
    }
    bool pass = true;
    for (int i = 0; i < 3; ++i) {
        pass = pass && nondecreasing(by_gamma[i], 1e-3);
        pass = pass && nondecreasing(by_density[i], 1e-3);
    }
    report(6, "social utility nondecreasing in Zipf exponent and density",
           pass,
           "full(gamma): " + fmt(by_gamma[0].front()) + "->" +
               fmt(by_gamma[0].back()) + ", full(lambda0): " +
               fmt(by_density[0].front()) + "->" + fmt(by_density[0].back()));
}

void criterion_7_network_sim() {
    const auto t0 = std::chrono::steady_clock::now();

    auto build = [](std::size_t files, std::uint64_t seed2,
                    std::uint64_t seed3) {
        sim::SimConfig config;
        Scenario& s = config.scenario;
        s.range_d = 5.0;
        s.groups.push_back({0.01, make_zipf(files, 0.9), std::nullopt});
        s.groups.push_back(
            {0.03, permute_pmf(make_zipf(files, 0.9), seed2), std::nullopt});
        s.groups.push_back(
            {0.06, permute_pmf(make_zipf(files, 0.9), seed3), std::nullopt});
        s.groups[0].fixed_count = 100;
        s.groups[1].fixed_count = 300;
        s.groups[2].fixed_count = 600;
        s.weights = s.social_weights();
        s.seed = 5;
        config.area_side = 100.0;
        config.slots = 300;
        config.step_len = 1.0;
        config.placement = sim::Placement::fixed_counts;
        config.seed = 5;
        return config;
    };

    // hard gate: sim trace vs closed form on the same caching profile
    auto sim_gap = [](const sim::SimConfig& config, bool* pass,
                      std::string* detail) {
        const Scenario& s = config.scenario;
        for (const Regime regime :
             {Regime::full, Regime::partial, Regime::none}) {
            CachingProfile caching =
                regime == Regime::full
                    ? solve_full(s, s.weights, InitStrategy::adaptive()).final
                    : solve_benchmark(s, regime);
            const sim::UtilityTrace trace = sim::run(config, caching);
            const std::vector<double> closed = all_group_utilities(s, caching);
            double worst = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                worst = std::max(
                    worst, std::abs(trace.per_slot.back()[k] - closed[k]));
            }
            *pass = *pass && worst <= 0.03;
            *detail += std::string(regime_name(regime)) + " gap=" +
                       fmt(worst) + "; ";
        }
    };

    bool pass = true;
    std::string detail;
    // configuration as written in the general setup (F=100)
    sim_gap(build(100, 21, 22), &pass, &detail);
    // configuration matching the reference triples (F=30); the
    // permutation-independent non-cooperative values identify it
    const sim::SimConfig ref_config = build(30, 23, 47);
    sim_gap(ref_config, &pass, &detail);

    const Scenario& ps = ref_config.scenario;
    const double ref_full[3] = {0.3648, 0.3821, 0.4306};
    const double ref_partial[3] = {0.2747, 0.3016, 0.4426};
    const double ref_none[3] = {0.2281, 0.2993, 0.3850};
    const std::vector<double> full_u =
        solve_full(ps, ps.weights, InitStrategy::adaptive())
            .report.group_utilities;
    const std::vector<double> partial_u =
        all_group_utilities(ps, solve_benchmark(ps, Regime::partial));
    const CachingProfile none = solve_benchmark(ps, Regime::none);
    double band = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        band = std::max(band, std::abs(full_u[k] - ref_full[k]));
        band = std::max(band, std::abs(partial_u[k] - ref_partial[k]));
        band = std::max(band, std::abs(isolated_utility(ps, k,
                                                        none.per_group[k]) -
                                       ref_none[k]));
    }
    pass = pass && band <= 0.06;

    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 300.0;
    report(7, "network simulation tracks the closed forms (3 groups)", pass,
           detail + "band=" + fmt(band) + ", " + fmt(elapsed) + " s");
}

void criterion_8_water_filling() {
    const std::size_t F = 5;
    const Scenario base = two_group_zipf(F, 0.9, 0.05, 4);
    const Pmf base_c = solve_partial(base, 0).caching;
    const double shift = 0.05;
    bool pass = true;
    for (std::size_t f = 0; f < F; ++f) {
        {
            std::vector<double> r1 = base.groups[0].request.probs();
            for (std::size_t g = 0; g < F; ++g) {
                r1[g] += g == f ? shift : -shift / (F - 1);
            }
            Scenario bumped = base;
            bumped.groups[0].request = Pmf(r1);
            pass = pass &&
                   solve_partial(bumped, 0).caching[f] >= base_c[f] - 1e-9;
        }
        {
            std::vector<double> r2 = base.groups[1].request.probs();
            for (std::size_t g = 0; g < F; ++g) {
                r2[g] += g == f ? shift : -shift / (F - 1);
            }
            Scenario bumped = base;
            bumped.groups[1].request = Pmf(r2);
            pass = pass &&
                   solve_partial(bumped, 0).caching[f] <= base_c[f] + 1e-9;
        }
    }
    report(8, "water-filling monotone in own and foreign demand", pass);
}

void criterion_9_numerics() {
    bool pass = lambert_w0(0.0) == 0.0;
    pass = pass && std::abs(lambert_w0(std::exp(1.0)) - 1.0) <= 1e-14;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = std::pow(10.0, -12.0 + 24.0 * i / 99.0);
        const double w = lambert_w0(x);
        worst = std::max(worst, std::abs(w * std::exp(w) - x) / x);
    }
    pass = pass && worst <= 1e-10;
    report(9, "Lambert-W anchors and round trip", pass,
           "worst rel err=" + fmt(worst));
}

}  // namespace

int main() {
    criterion_1_monte_carlo();
    criterion_2_grid_oracles();
    criterion_3_kkt();
    criterion_4_coordinate_descent();
    criterion_5_regime_ordering();
    criterion_6_trends();
    criterion_7_network_sim();
    criterion_8_water_filling();
    criterion_9_numerics();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
