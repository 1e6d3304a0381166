// coopcache: scenario-driven front end for the cooperative caching solvers,
// Pareto sweeps, network simulation and self-validation.
//
// Exit codes: 0 success, 1 input error, 2 iteration limit, 3 failed check.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coopcache/model.hpp"
#include "coopcache/scenario_io.hpp"
#include "coopcache/sim.hpp"
#include "coopcache/solvers.hpp"

namespace {

using namespace coopcache;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitIterationLimit = 2;
constexpr int kExitCheckFailed = 3;

struct CommonArgs {
    std::string scenario_path;
    std::string mode = "full";
    std::string init = "adaptive";
    std::string out_path;
    std::string caching_path;
    int points = 11;
    std::string weights_path;
    std::uint64_t samples = 100000;
    std::optional<std::int64_t> seed_override;
};

Regime parse_mode(const std::string& mode) {
    if (mode == "full") return Regime::full;
    if (mode == "partial") return Regime::partial;
    if (mode == "none") return Regime::none;
    throw ScenarioError("--mode: expected full|partial|none, got \"" + mode +
                        "\"");
}

InitStrategy parse_init(const std::string& init, std::uint64_t seed) {
    if (init == "uniform") return InitStrategy::uniform();
    if (init == "adaptive") return InitStrategy::adaptive();
    if (init.rfind("random:", 0) == 0) {
        const int n = std::stoi(init.substr(7));
        return InitStrategy::randomized(n, seed);
    }
    if (init == "random") return InitStrategy::randomized(32, seed);
    throw ScenarioError("--init: expected uniform|adaptive|random:<n>, got \"" +
                        init + "\"");
}

LoadedScenario load(const CommonArgs& args) {
    LoadedScenario loaded = load_scenario_file(args.scenario_path);
    if (args.seed_override) {
        loaded.scenario.seed = static_cast<std::uint64_t>(*args.seed_override);
        if (loaded.sim_config) {
            loaded.sim_config->scenario.seed = loaded.scenario.seed;
            loaded.sim_config->seed = loaded.scenario.seed;
        }
    }
    return loaded;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
    } else {
        write_text_file(out_path, content);
    }
}

struct RegimeSolution {
    CachingProfile caching;
    UtilityReport report;
    std::optional<SolveTrace> trace;
    bool converged = true;
};

UtilityReport make_benchmark_report(const Scenario& s,
                                    const CachingProfile& caching,
                                    std::vector<double> duals, int evaluations,
                                    Regime regime) {
    UtilityReport report;
    report.group_utilities = all_group_utilities(s, caching);
    report.social_utility = social_utility(s, caching);
    report.weighted_utility = weighted_utility(s, caching, s.weights);
    report.duals = std::move(duals);
    report.kkt_residual =
        regime == Regime::partial
            ? kkt_residual_partial(s, caching, report.duals)
            : kkt_residual_noncoop(s, caching, report.duals);
    report.iterations = evaluations;
    return report;
}

RegimeSolution solve_regime(const Scenario& s, Regime regime,
                            const InitStrategy& init) {
    RegimeSolution solution;
    if (regime == Regime::full) {
        try {
            SolveTrace trace = solve_full(s, s.weights, init);
            solution.caching = trace.final;
            solution.report = trace.report;
            solution.trace = std::move(trace);
        } catch (const IterationLimitError& err) {
            solution.converged = false;
            solution.caching = err.partial().final;
            solution.report = err.partial().report;
            solution.trace = err.partial();
        }
        return solution;
    }
    std::vector<double> duals(s.group_count(), 0.0);
    int evaluations = 0;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        GroupSolve gs = regime == Regime::partial ? solve_partial(s, k)
                                                  : solve_noncoop(s, k);
        solution.caching.per_group.push_back(std::move(gs.caching));
        duals[k] = gs.dual;
        evaluations += gs.evaluations;
    }
    solution.report = make_benchmark_report(s, solution.caching,
                                            std::move(duals), evaluations,
                                            regime);
    return solution;
}

int cmd_optimize(const CommonArgs& args) {
    const LoadedScenario loaded = load(args);
    const Scenario& s = loaded.scenario;
    const Regime regime = parse_mode(args.mode);
    const InitStrategy init = parse_init(args.init, s.seed);
    const RegimeSolution solution = solve_regime(s, regime, init);

    json doc{{"version", 1},
             {"mode", regime_name(regime)},
             {"weights", s.weights},
             {"converged", solution.converged},
             {"caching", caching_to_json(solution.caching)},
             {"report", report_to_json(solution.report)}};
    if (solution.trace) {
        doc["trace"] = {
            {"objective_per_sweep", solution.trace->objective_per_sweep}};
    }
    emit(args.out_path, doc.dump(2));
    if (!solution.converged) {
        std::cerr << "optimize: iteration limit reached after "
                  << s.max_sweeps << " sweeps\n";
        return kExitIterationLimit;
    }
    return kExitOk;
}

int cmd_pareto(const CommonArgs& args) {
    const LoadedScenario loaded = load(args);
    const Scenario& s = loaded.scenario;
    const InitStrategy init = parse_init(args.init, s.seed);

    std::vector<std::vector<double>> grid;
    if (!args.weights_path.empty()) {
        std::ifstream in(args.weights_path);
        if (!in) throw ScenarioError(args.weights_path + ": cannot open file");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ScenarioError(args.weights_path + ": parse error: " +
                                e.what());
        }
        if (!doc.is_array()) {
            throw ScenarioError(args.weights_path +
                                ": expected an array of weight vectors");
        }
        for (const auto& row : doc) {
            grid.push_back(row.get<std::vector<double>>());
        }
    } else if (s.group_count() == 2) {
        grid = two_group_weight_grid(args.points);
    } else {
        throw ScenarioError(
            "pareto: K != 2 needs an explicit weight grid (--weights-file)");
    }

    const SweepOutcome outcome = pareto_sweep(s, grid, init);
    for (const SweepFailure& failure : outcome.failures) {
        std::cerr << "pareto: point " << failure.index
                  << " failed: " << failure.message << "\n";
    }

    const std::size_t K = s.group_count();
    std::ostringstream csv;
    csv << "tag";
    for (std::size_t k = 1; k <= K; ++k) csv << ",w" << k;
    for (std::size_t k = 1; k <= K; ++k) csv << ",u" << k;
    csv << "\n";
    for (const ParetoPoint& point : outcome.points) {
        csv << "sweep";
        for (double w : point.weights) csv << "," << format_csv_number(w);
        for (double u : point.utilities) csv << "," << format_csv_number(u);
        csv << "\n";
    }
    for (const Regime regime : {Regime::partial, Regime::none}) {
        const RegimeSolution bench =
            solve_regime(s, regime, InitStrategy::adaptive());
        csv << regime_name(regime);
        for (std::size_t k = 0; k < K; ++k) csv << ",";
        for (double u : bench.report.group_utilities) {
            csv << "," << format_csv_number(u);
        }
        csv << "\n";
    }
    emit(args.out_path, csv.str());
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
    const LoadedScenario loaded = load(args);
    if (!loaded.sim_config) {
        throw ScenarioError(args.scenario_path +
                            ": simulate needs a \"simulation\" block");
    }
    const Scenario& s = loaded.scenario;
    if (loaded.sim_config->area_side <= 2.0 * s.range_d) {
        std::cerr << "warning: area_side <= 2*range_d; a terminal's "
                     "neighbourhood wraps onto itself\n";
    }
    CachingProfile caching;
    std::string source;
    if (!args.caching_path.empty()) {
        caching = load_caching_file(args.caching_path);
        caching.validate_for(s);
        source = "file:" + args.caching_path;
    } else {
        const Regime regime = parse_mode(args.mode);
        const InitStrategy init = parse_init(args.init, s.seed);
        caching = solve_regime(s, regime, init).caching;
        source = regime_name(regime);
    }

    const sim::UtilityTrace trace = sim::run(*loaded.sim_config, caching);
    const std::string csv = trace_to_csv(trace);

    json summary{{"caching_source", source},
                 {"slots", loaded.sim_config->slots},
                 {"final_trace", trace.per_slot.back()},
                 {"closed_form", all_group_utilities(s, caching)}};
    json deviation = json::array();
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        deviation.push_back(trace.per_slot.back()[k] -
                            summary["closed_form"][k].get<double>());
    }
    summary["deviation"] = deviation;

    if (args.out_path.empty()) {
        std::cout << csv;
        std::cerr << summary.dump(2) << "\n";
    } else {
        write_text_file(args.out_path, csv);
        write_text_file(args.out_path + ".summary.json", summary.dump(2));
        std::cout << summary.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_validate(const CommonArgs& args) {
    const LoadedScenario loaded = load(args);
    const Scenario& s = loaded.scenario;
    json checks = json::array();
    bool all_pass = true;

    auto check_profile = [&](const std::string& label,
                             const CachingProfile& caching,
                             const std::vector<double>& duals, double kkt) {
        for (std::size_t k = 0; k < s.group_count(); ++k) {
            const double closed = group_utility(s, caching, k);
            const auto mc = sim::monte_carlo_utility(
                s, caching, k, args.samples,
                derive_seed(s.seed, RngStream::monte_carlo, k));
            const double dev = std::abs(closed - mc.estimate);
            const bool pass = dev <= 3.0 * mc.stderr_ || dev <= 1e-12;
            all_pass = all_pass && pass;
            checks.push_back({{"name", label + ": monte-carlo group " +
                                           std::to_string(k + 1)},
                              {"closed_form", closed},
                              {"monte_carlo", mc.estimate},
                              {"stderr", mc.stderr_},
                              {"pass", pass}});
        }
        const bool kkt_pass = kkt <= 1e-6;
        all_pass = all_pass && kkt_pass;
        checks.push_back({{"name", label + ": kkt_residual"},
                          {"value", kkt},
                          {"threshold", 1e-6},
                          {"pass", kkt_pass},
                          {"duals", duals}});
    };

    if (!args.caching_path.empty()) {
        CachingProfile caching = load_caching_file(args.caching_path);
        caching.validate_for(s);
        std::vector<double> duals(s.group_count());
        for (std::size_t k = 0; k < s.group_count(); ++k) {
            duals[k] = estimate_dual(s, s.weights, caching, k);
        }
        check_profile("profile", caching, duals,
                      kkt_residual(s, s.weights, caching, duals));
    } else {
        for (const Regime regime :
             {Regime::full, Regime::partial, Regime::none}) {
            const RegimeSolution solution =
                solve_regime(s, regime, InitStrategy::adaptive());
            check_profile(regime_name(regime), solution.caching,
                          solution.report.duals,
                          solution.report.kkt_residual);
        }
    }

    json doc{{"pass", all_pass}, {"checks", checks}};
    emit(args.out_path, doc.dump(2));
    if (!all_pass) {
        for (const auto& c : checks) {
            if (!c["pass"].get<bool>()) {
                std::cerr << "validate: FAILED " << c["name"].get<std::string>()
                          << "\n";
            }
        }
        return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "coopcache: probabilistic caching optimization for heterogeneous "
        "terminal groups"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", args.scenario_path,
                        "Scenario file (JSON)")
            ->required();
        sub->add_option("--out", args.out_path,
                        "Output path (stdout when omitted)");
        sub->add_option("--seed", args.seed_override,
                        "Override the scenario seed");
    };

    CLI::App* optimize =
        app.add_subcommand("optimize", "Solve one cooperation regime");
    add_common(optimize);
    optimize->add_option("--mode", args.mode, "full|partial|none");
    optimize->add_option("--init", args.init, "uniform|adaptive|random:<n>");

    CLI::App* pareto = app.add_subcommand(
        "pareto", "Sweep weight vectors along the utility frontier");
    add_common(pareto);
    pareto->add_option("--points", args.points,
                       "Sweep points for the two-group grid");
    pareto->add_option("--init", args.init, "uniform|adaptive|random:<n>");
    pareto->add_option("--weights-file", args.weights_path,
                       "Explicit weight grid (JSON array of arrays)");

    CLI::App* simulate =
        app.add_subcommand("simulate", "Run the discrete-time network sim");
    add_common(simulate);
    simulate->add_option("--mode", args.mode,
                         "Caching from this regime (full|partial|none)");
    simulate->add_option("--init", args.init, "uniform|adaptive|random:<n>");
    simulate->add_option("--caching", args.caching_path,
                         "Caching profile file instead of solving");

    CLI::App* validate = app.add_subcommand(
        "validate", "Monte-Carlo + KKT self-checks for each regime");
    add_common(validate);
    validate->add_option("--samples", args.samples,
                         "Monte Carlo samples per check");
    validate->add_option("--caching", args.caching_path,
                         "Check this caching profile instead of solving");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitInput;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(args);
        if (pareto->parsed()) return cmd_pareto(args);
        if (simulate->parsed()) return cmd_simulate(args);
        if (validate->parsed()) return cmd_validate(args);
    } catch (const IterationLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIterationLimit;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
