#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/numerics.hpp"
#include "coopcache/parallel.hpp"
#include "coopcache/pmf.hpp"
#include "coopcache/scenario.hpp"

namespace coopcache {

inline constexpr double kMassTol = 1e-6;

enum class Regime { full, partial, none };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::full: return "full";
        case Regime::partial: return "partial";
        case Regime::none: return "none";
    }
    return "?";
}

enum class InitKind { uniform, adaptive, randomized };

struct InitStrategy {
    InitKind kind = InitKind::adaptive;
    int n_restarts = 32;
    std::uint64_t seed = 0;

    static InitStrategy uniform() { return {InitKind::uniform, 1, 0}; }
    static InitStrategy adaptive() { return {InitKind::adaptive, 1, 0}; }
    static InitStrategy randomized(int n, std::uint64_t seed) {
        if (n < 1) {
            throw std::invalid_argument("randomized init: n_restarts >= 1");
        }
        return {InitKind::randomized, n, seed};
    }
};

/// One group's water-filling solve: the distribution, the dual water level,
/// and how many residual evaluations the bisection spent.
struct GroupSolve {
    Pmf caching;
    double dual = 0.0;
    int evaluations = 0;
};

struct SolveTrace {
    std::vector<double> objective_per_sweep;
    CachingProfile final;
    UtilityReport report;
};

struct ParetoPoint {
    std::vector<double> weights;
    std::vector<double> utilities;
    CachingProfile caching;
};

class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& what, SolveTrace partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const SolveTrace& partial() const { return partial_; }

private:
    SolveTrace partial_;
};

namespace detail {

inline double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Clipped water-filled allocations carry the bisection's O(delta_gamma) mass
// error; spread the deficit over coordinates with room so the result is a
// strict Pmf. Clipped coordinates stay put, so the KKT structure survives.
inline void polish_mass(std::vector<double>& c) {
    for (int pass = 0; pass < 8; ++pass) {
        double sum = 0.0;
        for (double v : c) sum += v;
        const double delta = 1.0 - sum;
        if (std::abs(delta) <= 1e-13) return;
        std::size_t room = 0;
        for (double v : c) {
            if (delta > 0.0 ? v < 1.0 : v > 0.0) ++room;
        }
        if (room == 0) return;
        const double share = delta / static_cast<double>(room);
        for (double& v : c) {
            if (delta > 0.0 ? v < 1.0 : v > 0.0) v = clip01(v + share);
        }
    }
}

inline void require_positive_mu(const Scenario& s, std::size_t k,
                                const char* who) {
    if (!(s.mu(k) > 0.0)) {
        throw std::invalid_argument(
            std::string(who) + ": group " + std::to_string(k) +
            " has zero density; allocation undefined");
    }
}

// Shared driver: bisect the dual against the mass residual of `allocate`,
// then push the bracket down to floating point resolution so the best
// response is exact to roundoff. Without the deepening, a boundary
// coordinate mis-clipped by O(tol_dual) costs the objective first-order
// and the coordinate descent trace can wiggle.
template <typename AllocFn>
GroupSolve water_fill(const Scenario& s, AllocFn&& allocate) {
    const std::size_t F = s.file_count();
    std::vector<double> c(F);
    int evaluations = 0;
    auto residual = [&](double gamma) {
        ++evaluations;
        allocate(gamma, c);
        double sum = 0.0;
        for (double v : c) sum += v;
        return sum - 1.0;
    };
    BisectionResult bs = bisect_dual(residual, s.tol_dual);
    if (bs.bracket_width > 0.0) {
        double lo = bs.bracket_lo;
        double hi = bs.bracket_hi;
        double r_lo = residual(lo);
        double r_hi = residual(hi);
        while (true) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double r = residual(mid);
            if (r < 0.0) {
                hi = mid;
                r_hi = r;
            } else {
                lo = mid;
                r_lo = r;
            }
        }
        bs.dual = std::abs(r_lo) <= std::abs(r_hi) ? lo : hi;
    }
    allocate(bs.dual, c);
    polish_mass(c);
    return {Pmf(std::move(c)), bs.dual, evaluations};
}

}  // namespace detail

/// Optimal caching for group k when file sharing stays inside the group:
///   c*_f = [1 - (W(gamma e^{1+mu_k} / r_f) - 1) / mu_k]_0^1.
inline GroupSolve solve_noncoop(const Scenario& s, std::size_t k) {
    detail::check_group_index(s, k);
    detail::require_positive_mu(s, k, "solve_noncoop");
    const double mu_k = s.mu(k);
    const Pmf& r = s.groups[k].request;
    return detail::water_fill(s, [&](double gamma, std::vector<double>& c) {
        const double lg = std::log(gamma);
        for (std::size_t f = 0; f < c.size(); ++f) {
            const double y = lg + 1.0 + mu_k - std::log(r[f]);
            c[f] = detail::clip01(1.0 - (lambert_w0_exp(y) - 1.0) / mu_k);
        }
    });
}

/// Optimal selfish caching for group k under inter-group sharing, assuming
/// the other groups cache faithfully (c_{-k} = r_{-k}):
///   c*_f = [1 - (W(gamma e^{1+mu_0} / (r_f e^{mu_0 barR_f - mu_k barr_f}))
///           - 1) / mu_k]_0^1.
inline GroupSolve solve_partial(const Scenario& s, std::size_t k) {
    detail::check_group_index(s, k);
    detail::require_positive_mu(s, k, "solve_partial");
    const double mu0 = s.mu0();
    const double mu_k = s.mu(k);
    const Pmf& r = s.groups[k].request;
    const std::vector<double> R = social_request(s);
    return detail::water_fill(s, [&](double gamma, std::vector<double>& c) {
        const double lg = std::log(gamma);
        for (std::size_t f = 0; f < c.size(); ++f) {
            const double y = lg + 1.0 + mu0 - std::log(r[f]) -
                             (mu0 * (1.0 - R[f]) - mu_k * (1.0 - r[f]));
            c[f] = detail::clip01(1.0 - (lambert_w0_exp(y) - 1.0) / mu_k);
        }
    });
}

/// Best response of a positive-weight group in the coordinate-descent sweep:
/// maximizes the weighted-sum utility over group k's simplex given c_{-k}.
inline GroupSolve best_response_positive(const Scenario& s,
                                         const CachingProfile& caching,
                                         const std::vector<double>& w,
                                         std::size_t k) {
    detail::check_group_index(s, k);
    s.check_weights(w);
    caching.validate_for(s);
    if (!(w[k] > 0.0)) {
        throw std::invalid_argument(
            "best_response_positive: group weight is zero; "
            "use best_response_zero");
    }
    detail::require_positive_mu(s, k, "best_response_positive");
    const double mu0 = s.mu0();
    const double mu_k = s.mu(k);
    const std::size_t F = s.file_count();
    const Pmf& r = s.groups[k].request;

    // exposure_f = sum_{j != k} mu_j bar c_{j,f} (every other group);
    // cross_f   = sum_{j in K+ \ {k}} w_j r_{j,f} bar c_{j,f} / (w_k r_{k,f}).
    std::vector<double> exposure(F, 0.0), cross(F, 0.0);
    for (std::size_t j = 0; j < s.group_count(); ++j) {
        if (j == k) continue;
        const double mu_j = s.mu(j);
        for (std::size_t f = 0; f < F; ++f) {
            const double barc = 1.0 - caching.per_group[j][f];
            exposure[f] += mu_j * barc;
            if (w[j] > 0.0) {
                cross[f] += w[j] * s.groups[j].request[f] * barc;
            }
        }
    }
    return detail::water_fill(s, [&](double gamma, std::vector<double>& c) {
        const double lg = std::log(gamma);
        for (std::size_t f = 0; f < F; ++f) {
            const double wr = w[k] * r[f];
            const double b = 1.0 / mu_k + cross[f] / wr;
            const double y = lg - std::log(wr) + mu0 - exposure[f] + mu_k * b;
            c[f] = detail::clip01(1.0 - (lambert_w0_exp(y) / mu_k - b));
        }
    });
}

/// Best response of a zero-weight group: it caches purely for the
/// positive-weight groups. Files those groups already cover completely
/// contribute nothing and receive no cache mass.
inline GroupSolve best_response_zero(const Scenario& s,
                                     const CachingProfile& caching,
                                     const std::vector<double>& w,
                                     std::size_t k) {
    detail::check_group_index(s, k);
    s.check_weights(w);
    caching.validate_for(s);
    if (w[k] != 0.0) {
        throw std::invalid_argument(
            "best_response_zero: group weight is positive; "
            "use best_response_positive");
    }
    detail::require_positive_mu(s, k, "best_response_zero");
    const double mu0 = s.mu0();
    const double mu_k = s.mu(k);
    const std::size_t F = s.file_count();

    std::vector<double> dshift(F, 0.0);  // D_{k,f}
    std::vector<bool> degenerate(F, false);
    std::size_t live = 0;
    for (std::size_t f = 0; f < F; ++f) {
        double served = 0.0;  // sum_{j in K+} w_j r_{j,f} bar c_{j,f}
        double expo = 0.0;    // sum_{l != k} mu_l bar c_{l,f}
        for (std::size_t j = 0; j < s.group_count(); ++j) {
            if (j == k) continue;
            const double barc = 1.0 - caching.per_group[j][f];
            expo += s.mu(j) * barc;
            if (w[j] > 0.0) served += w[j] * s.groups[j].request[f] * barc;
        }
        if (served <= 0.0) {
            degenerate[f] = true;
        } else {
            dshift[f] = std::log(served) - mu0 + expo;
            ++live;
        }
    }
    if (live == 0) {
        // Objective is constant in c_k; any feasible point is optimal.
        std::vector<double> c(F, 1.0 / static_cast<double>(F));
        return {Pmf(std::move(c)), 0.0, 0};
    }
    return detail::water_fill(s, [&](double gamma, std::vector<double>& c) {
        const double lgm = std::log(gamma / mu_k);
        for (std::size_t f = 0; f < F; ++f) {
            c[f] = degenerate[f]
                       ? 0.0
                       : detail::clip01(1.0 - (lgm - dshift[f]) / mu_k);
        }
    });
}

/// Starting profile for the coordinate descent. Adaptive initialization
/// hands the groups carrying the top two-thirds of the weight their own
/// request distributions and aligns everyone else with the heaviest group.
inline CachingProfile init_caching(const Scenario& s,
                                   const std::vector<double>& w,
                                   const InitStrategy& strategy,
                                   int restart_index = 0) {
    s.check_weights(w);
    const std::size_t K = s.group_count();
    const std::size_t F = s.file_count();
    CachingProfile profile;
    profile.per_group.reserve(K);
    switch (strategy.kind) {
        case InitKind::uniform: {
            std::vector<double> u(F, 1.0 / static_cast<double>(F));
            for (std::size_t k = 0; k < K; ++k) {
                profile.per_group.emplace_back(u);
            }
            break;
        }
        case InitKind::adaptive: {
            std::vector<std::size_t> order(K);
            for (std::size_t k = 0; k < K; ++k) order[k] = k;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return w[a] > w[b];
                             });
            std::vector<bool> own(K, false);
            double cumulative = 0.0;
            for (std::size_t idx : order) {
                own[idx] = true;
                cumulative += w[idx];
                if (cumulative >= 2.0 / 3.0) break;
            }
            const std::size_t top = order.front();
            for (std::size_t k = 0; k < K; ++k) {
                profile.per_group.push_back(own[k] ? s.groups[k].request
                                                   : s.groups[top].request);
            }
            break;
        }
        case InitKind::randomized: {
            auto rng = make_engine(strategy.seed, RngStream::init,
                                   static_cast<std::uint64_t>(restart_index));
            for (std::size_t k = 0; k < K; ++k) {
                profile.per_group.push_back(random_simplex_pmf(F, rng));
            }
            break;
        }
    }
    return profile;
}

// ---------------------------------------------------------------------------
// KKT residuals (stationarity / primal feasibility / complementary slackness)
// ---------------------------------------------------------------------------

/// Derivative of group k's per-file Lagrangian term in bar c_{k,f}, before
/// subtracting the dual. At an optimum interior coordinates sit exactly at
/// the water level gamma_k.
inline std::vector<double> stationarity_gradient(const Scenario& s,
                                                 const std::vector<double>& w,
                                                 const CachingProfile& caching,
                                                 std::size_t k) {
    const std::size_t F = s.file_count();
    const double mu_k = s.mu(k);
    std::vector<double> grad = mean_cached_neighbors(s, caching);
    for (std::size_t f = 0; f < F; ++f) {
        const double g = std::exp(-grad[f]);
        double inner =
            w[k] * s.groups[k].request[f] *
            (1.0 + mu_k * (1.0 - caching.per_group[k][f]));
        for (std::size_t j = 0; j < s.group_count(); ++j) {
            if (j == k || w[j] == 0.0) continue;
            inner += mu_k * w[j] * s.groups[j].request[f] *
                     (1.0 - caching.per_group[j][f]);
        }
        grad[f] = g * inner;
    }
    return grad;
}

/// Worst violation of group k's KKT system given its dual water level.
inline double group_kkt_violation(const Scenario& s,
                                  const std::vector<double>& w,
                                  const CachingProfile& caching, std::size_t k,
                                  double gamma) {
    constexpr double edge = 1e-12;
    const std::vector<double> grad = stationarity_gradient(s, w, caching, k);
    double worst = std::max(0.0, -gamma);  // dual feasibility
    double mass = 0.0;
    for (std::size_t f = 0; f < grad.size(); ++f) {
        const double c = caching.per_group[k][f];
        mass += c;
        worst = std::max(worst, std::max(c - 1.0, -c));
        if (c >= 1.0 - edge) {
            // bar c at its floor: water level must not exceed the gradient
            worst = std::max(worst, gamma - grad[f]);
        } else if (c <= edge) {
            // bar c at its ceiling: gradient must not exceed the water level
            worst = std::max(worst, grad[f] - gamma);
        } else {
            worst = std::max(worst, std::abs(grad[f] - gamma));
        }
    }
    worst = std::max(worst, std::abs(mass - 1.0));
    worst = std::max(worst, std::abs(gamma * (mass - 1.0)));
    return worst;
}

/// Max KKT violation across groups; 0 means every group sits at an exact
/// coordinate-wise optimum of the weighted objective.
inline double kkt_residual(const Scenario& s, const std::vector<double>& w,
                           const CachingProfile& caching,
                           const std::vector<double>& duals) {
    s.check_weights(w);
    caching.validate_for(s);
    if (duals.size() != s.group_count()) {
        throw std::invalid_argument("kkt_residual: dual vector length");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        worst = std::max(worst,
                         group_kkt_violation(s, w, caching, k, duals[k]));
    }
    return worst;
}

/// Best-effort water level for a profile whose duals are unknown (e.g. a
/// caching file loaded from disk): the median gradient over coordinates that
/// can move. An optimal profile yields a near-exact dual; a corrupted one
/// cannot be rescued by any choice.
inline double estimate_dual(const Scenario& s, const std::vector<double>& w,
                            const CachingProfile& caching, std::size_t k) {
    constexpr double edge = 1e-12;
    const std::vector<double> grad = stationarity_gradient(s, w, caching, k);
    std::vector<double> candidates;
    for (std::size_t f = 0; f < grad.size(); ++f) {
        const double c = caching.per_group[k][f];
        if (c > edge && c < 1.0 - edge) candidates.push_back(grad[f]);
    }
    if (candidates.empty()) {
        for (std::size_t f = 0; f < grad.size(); ++f) {
            if (caching.per_group[k][f] >= 1.0 - edge) {
                candidates.push_back(grad[f]);
            }
        }
    }
    if (candidates.empty()) return 0.0;
    std::nth_element(candidates.begin(),
                     candidates.begin() + candidates.size() / 2,
                     candidates.end());
    return candidates[candidates.size() / 2];
}

/// Scenario view containing only group k (the non-cooperative world where
/// other groups are out of range).
inline Scenario single_group_view(const Scenario& s, std::size_t k) {
    detail::check_group_index(s, k);
    Scenario view;
    view.groups = {s.groups[k]};
    view.range_d = s.range_d;
    view.weights = {1.0};
    view.tol_dual = s.tol_dual;
    view.tol_utility = s.tol_utility;
    view.max_sweeps = s.max_sweeps;
    view.seed = s.seed;
    return view;
}

/// KKT residual of per-group non-cooperative solutions: each group solves
/// its own single-group problem.
inline double kkt_residual_noncoop(const Scenario& s,
                                   const CachingProfile& caching,
                                   const std::vector<double>& duals) {
    double worst = 0.0;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        const Scenario view = single_group_view(s, k);
        CachingProfile own;
        own.per_group = {caching.per_group[k]};
        worst = std::max(
            worst, group_kkt_violation(view, {1.0}, own, 0, duals[k]));
    }
    return worst;
}

/// KKT residual of per-group partial-cooperation solutions: group k is
/// checked against the faithful profile c_{-k} = r_{-k} it optimized for.
inline double kkt_residual_partial(const Scenario& s,
                                   const CachingProfile& caching,
                                   const std::vector<double>& duals) {
    double worst = 0.0;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        CachingProfile faithful;
        faithful.per_group.reserve(s.group_count());
        for (std::size_t j = 0; j < s.group_count(); ++j) {
            faithful.per_group.push_back(j == k ? caching.per_group[k]
                                                : s.groups[j].request);
        }
        std::vector<double> onehot(s.group_count(), 0.0);
        onehot[k] = 1.0;
        worst = std::max(worst, group_kkt_violation(s, onehot, faithful, k,
                                                    duals[k]));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Coordinate descent (full cooperation)
// ---------------------------------------------------------------------------

namespace detail {

inline SolveTrace run_sweeps(const Scenario& s, const std::vector<double>& w,
                             CachingProfile caching) {
    const std::size_t K = s.group_count();
    // Sweep heavier groups first so zero-weight groups adapt to committed
    // allocations; mirrored instances then solve to mirrored points.
    std::vector<std::size_t> order(K);
    for (std::size_t k = 0; k < K; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    SolveTrace trace;
    trace.report.duals.assign(K, 0.0);
    double previous = weighted_utility(s, caching, w);
    trace.objective_per_sweep.push_back(previous);
    bool converged = false;
    int sweeps = 0;
    // Once the objective criterion fires, keep sweeping until the
    // coordinates (and the duals recorded mid-sweep) settle onto the fixed
    // point, so the KKT certificate is tight, not just the objective.
    // Strongly coupled instances can crawl with a near-flat objective for
    // hundreds of sweeps before snapping in; the sweep cap bounds the work
    // and the residual is reported honestly either way.
    constexpr double kKktSettled = 1e-7;
    for (int i = 1; i <= s.max_sweeps; ++i) {
        bool unchanged = true;
        for (std::size_t k : order) {
            GroupSolve gs = w[k] > 0.0
                                ? best_response_positive(s, caching, w, k)
                                : best_response_zero(s, caching, w, k);
            unchanged = unchanged && gs.caching == caching.per_group[k];
            caching.per_group[k] = std::move(gs.caching);
            trace.report.duals[k] = gs.dual;
        }
        const double objective = weighted_utility(s, caching, w);
        trace.objective_per_sweep.push_back(objective);
        sweeps = i;
        if (std::abs(objective - previous) <= s.tol_utility) {
            converged = true;
            if (unchanged) break;
            if (kkt_residual(s, w, caching, trace.report.duals) <=
                kKktSettled) {
                break;
            }
        }
        previous = objective;
    }
    trace.final = std::move(caching);
    trace.report.group_utilities = all_group_utilities(s, trace.final);
    trace.report.social_utility = social_utility(s, trace.final);
    trace.report.weighted_utility = trace.objective_per_sweep.back();
    trace.report.kkt_residual =
        kkt_residual(s, w, trace.final, trace.report.duals);
    trace.report.iterations = sweeps;
    if (!converged) {
        throw IterationLimitError(
            "solve_full: no convergence within " +
                std::to_string(s.max_sweeps) + " sweeps",
            std::move(trace));
    }
    return trace;
}

}  // namespace detail

/// Coordinate descent for the weighted-sum utility maximization: cycles the
/// groups through their exact best responses until the objective settles
/// within tol_utility. Converges to a coordinate-wise (local) maximum.
inline SolveTrace solve_full(const Scenario& s, const std::vector<double>& w,
                             const InitStrategy& strategy) {
    s.validate();
    s.check_weights(w);
    bool any_positive = false;
    for (double wk : w) any_positive = any_positive || wk > 0.0;
    if (!any_positive) {
        throw std::invalid_argument("solve_full: all weights are zero");
    }
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        detail::require_positive_mu(s, k, "solve_full");
    }
    if (strategy.kind != InitKind::randomized) {
        return detail::run_sweeps(s, w, init_caching(s, w, strategy));
    }
    std::optional<SolveTrace> best;
    std::optional<IterationLimitError> last_error;
    for (int restart = 0; restart < strategy.n_restarts; ++restart) {
        const CachingProfile start = init_caching(s, w, strategy, restart);
        try {
            SolveTrace trace = detail::run_sweeps(s, w, start);
            if (!best || trace.report.weighted_utility >
                             best->report.weighted_utility) {
                best = std::move(trace);
            }
        } catch (const IterationLimitError& err) {
            last_error = err;
        }
    }
    if (!best) throw *last_error;
    return *best;
}

/// One solve_full per weight vector; failed points are reported, not fatal.
struct SweepFailure {
    std::size_t index = 0;
    std::string message;
};

struct SweepOutcome {
    std::vector<ParetoPoint> points;
    std::vector<SweepFailure> failures;
};

inline SweepOutcome pareto_sweep(const Scenario& s,
                                 const std::vector<std::vector<double>>& grid,
                                 const InitStrategy& strategy) {
    std::vector<std::optional<ParetoPoint>> slots(grid.size());
    std::vector<std::optional<SweepFailure>> errors(grid.size());
    parallel_for_index(grid.size(), [&](std::size_t i) {
        try {
            SolveTrace trace = solve_full(s, grid[i], strategy);
            slots[i] = ParetoPoint{grid[i], trace.report.group_utilities,
                                   std::move(trace.final)};
        } catch (const std::exception& e) {
            errors[i] = SweepFailure{i, e.what()};
        }
    });
    SweepOutcome outcome;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (slots[i]) {
            outcome.points.push_back(std::move(*slots[i]));
        } else if (errors[i]) {
            outcome.failures.push_back(std::move(*errors[i]));
        }
    }
    return outcome;
}

/// Evenly spaced two-group weight grid (w_1 from 0 to 1), the standard sweep
/// behind the utility-region figures.
inline std::vector<std::vector<double>> two_group_weight_grid(int points) {
    if (points < 2) {
        throw std::invalid_argument("weight grid needs at least 2 points");
    }
    std::vector<std::vector<double>> grid;
    grid.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double w1 =
            static_cast<double>(i) / static_cast<double>(points - 1);
        grid.push_back({w1, 1.0 - w1});
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Exhaustive simplex-lattice oracle
// ---------------------------------------------------------------------------

struct GridResult {
    std::vector<Pmf> allocation;
    double objective = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline double lattice_point_count(int m, std::size_t F) {
    // C(m + F - 1, F - 1), evaluated in floating point for the budget check.
    double count = 1.0;
    for (std::size_t i = 1; i < F; ++i) {
        count *= static_cast<double>(m + i) / static_cast<double>(i);
    }
    return count;
}

// All compositions of m into F nonnegative parts, lexicographic from
// (m, 0, ..., 0) down; the visitor gets the integer coordinates.
template <typename Visitor>
void compose_rec(int m, std::size_t F, std::size_t idx, std::vector<int>& comp,
                 Visitor& visit) {
    if (idx + 1 == F) {
        comp[idx] = m;
        visit(static_cast<const std::vector<int>&>(comp));
        return;
    }
    for (int v = m; v >= 0; --v) {
        comp[idx] = v;
        compose_rec(m - v, F, idx + 1, comp, visit);
    }
}

template <typename Visitor>
void for_each_composition(int m, std::size_t F, Visitor&& visit) {
    std::vector<int> comp(F, 0);
    compose_rec(m, F, 0, comp, visit);
}

}  // namespace detail

/// Exhaustively enumerates caching distributions on the simplex lattice with
/// spacing `step` and returns the best, as an independent check on the
/// closed-form solvers. Refuses instances whose lattice exceeds the budget.
inline GridResult oracle_grid_search(const Scenario& s,
                                     const std::vector<double>& w, double step,
                                     Regime regime, std::size_t k = 0,
                                     double budget = 1e7) {
    if (!(step > 0.0 && step < 1.0)) {
        throw std::invalid_argument("oracle_grid_search: step must be in (0,1)");
    }
    const int m = static_cast<int>(std::lround(1.0 / step));
    const std::size_t F = s.file_count();
    const std::size_t K = s.group_count();
    const double per_group = detail::lattice_point_count(m, F);
    const double total =
        regime == Regime::full ? std::pow(per_group, static_cast<double>(K))
                               : per_group;
    if (total > budget) {
        throw std::length_error(
            "oracle_grid_search: " + std::to_string(total) +
            " lattice points exceed budget " + std::to_string(budget));
    }

    const double inv_m = 1.0 / static_cast<double>(m);
    auto to_pmf = [&](const std::vector<int>& comp) {
        std::vector<double> c(F);
        for (std::size_t f = 0; f < F; ++f) c[f] = comp[f] * inv_m;
        return c;
    };

    GridResult result;
    if (regime == Regime::none || regime == Regime::partial) {
        detail::check_group_index(s, k);
        const Pmf& r = s.groups[k].request;
        const double mu_k = s.mu(k);
        // exp table over lattice values kills the transcendental cost
        std::vector<double> table(static_cast<std::size_t>(m) + 1);
        for (int i = 0; i <= m; ++i) table[i] = std::exp(-mu_k * i * inv_m);
        std::vector<double> prefactor(F, 1.0);
        if (regime == Regime::partial) {
            const std::vector<double> R = social_request(s);
            const double mu0 = s.mu0();
            for (std::size_t f = 0; f < F; ++f) {
                prefactor[f] = std::exp(-mu0 * R[f] + mu_k * r[f]);
            }
        } else {
            detail::require_positive_mu(s, k, "oracle_grid_search");
        }
        std::vector<int> best_comp;
        detail::for_each_composition(m, F, [&](const std::vector<int>& comp) {
            double obj = 0.0;
            for (std::size_t f = 0; f < F; ++f) {
                const double c = comp[f] * inv_m;
                obj += r[f] * (1.0 - (1.0 - c) * prefactor[f] *
                                         table[static_cast<std::size_t>(
                                             comp[f])]);
            }
            if (obj > result.objective) {
                result.objective = obj;
                best_comp = comp;
            }
        });
        result.allocation = {Pmf(to_pmf(best_comp))};
        return result;
    }

    // Full cooperation: product of per-group lattices.
    s.check_weights(w);
    std::vector<std::vector<int>> lattice;
    lattice.reserve(static_cast<std::size_t>(per_group));
    detail::for_each_composition(
        m, F, [&](const std::vector<int>& comp) { lattice.push_back(comp); });
    std::vector<std::vector<double>> table(K);
    for (std::size_t j = 0; j < K; ++j) {
        table[j].resize(static_cast<std::size_t>(m) + 1);
        const double mu_j = s.mu(j);
        for (int i = 0; i <= m; ++i) {
            table[j][static_cast<std::size_t>(i)] = std::exp(-mu_j * i * inv_m);
        }
    }
    std::vector<std::size_t> pick(K, 0);
    std::vector<std::size_t> best_pick(K, 0);
    while (true) {
        double obj = 0.0;
        for (std::size_t f = 0; f < F; ++f) {
            double miss = 1.0;
            for (std::size_t j = 0; j < K; ++j) {
                miss *= table[j][static_cast<std::size_t>(
                    lattice[pick[j]][f])];
            }
            for (std::size_t j = 0; j < K; ++j) {
                if (w[j] == 0.0) continue;
                const double c = lattice[pick[j]][f] * inv_m;
                obj += w[j] * s.groups[j].request[f] * (1.0 - (1.0 - c) * miss);
            }
        }
        if (obj > result.objective) {
            result.objective = obj;
            best_pick = pick;
        }
        std::size_t j = K;
        while (j > 0) {
            --j;
            if (++pick[j] < lattice.size()) break;
            pick[j] = 0;
            if (j == 0) {
                result.allocation.reserve(K);
                for (std::size_t g = 0; g < K; ++g) {
                    result.allocation.emplace_back(
                        to_pmf(lattice[best_pick[g]]));
                }
                return result;
            }
        }
    }
}

}  // namespace coopcache
