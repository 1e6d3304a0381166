#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopcache/pmf.hpp"

namespace coopcache {

inline constexpr double kRequestFloor = 1e-12;

/// One interest group: spatial density (terminals / m^2), request
/// distribution, and an optional fixed population for simulations.
struct GroupProfile {
    double density = 0.0;
    Pmf request;
    std::optional<std::size_t> fixed_count;
};

/// A complete problem instance. Weights, tolerances and the seed ride along
/// so solvers and simulators share one source of truth.
struct Scenario {
    std::vector<GroupProfile> groups;
    double range_d = 0.0;
    std::vector<double> weights;
    double tol_dual = 1e-9;
    double tol_utility = 1e-7;
    int max_sweeps = 500;
    std::uint64_t seed = 0;

    std::size_t group_count() const { return groups.size(); }
    std::size_t file_count() const {
        return groups.empty() ? 0 : groups.front().request.size();
    }

    double lambda0() const {
        double sum = 0.0;
        for (const auto& g : groups) sum += g.density;
        return sum;
    }

    /// Mean number of group-k neighbours within range_d.
    double mu(std::size_t k) const {
        return std::numbers::pi * range_d * range_d * groups[k].density;
    }

    /// Mean number of neighbours within range_d across all groups.
    double mu0() const {
        double sum = 0.0;
        for (std::size_t k = 0; k < groups.size(); ++k) sum += mu(k);
        return sum;
    }

    void validate() const {
        if (groups.empty()) {
            throw std::invalid_argument("scenario: needs at least one group");
        }
        if (!(range_d > 0.0)) {
            throw std::invalid_argument("scenario: range_d must be > 0");
        }
        const std::size_t F = groups.front().request.size();
        bool any_positive_density = false;
        for (std::size_t k = 0; k < groups.size(); ++k) {
            const auto& g = groups[k];
            if (!(g.density >= 0.0)) {
                throw std::invalid_argument(
                    "groups[" + std::to_string(k) + "].density must be >= 0");
            }
            any_positive_density = any_positive_density || g.density > 0.0;
            if (g.request.size() != F) {
                throw std::invalid_argument(
                    "groups[" + std::to_string(k) +
                    "].request: file count differs from group 0");
            }
            for (std::size_t f = 0; f < F; ++f) {
                if (g.request[f] < kRequestFloor) {
                    throw std::invalid_argument(
                        "groups[" + std::to_string(k) + "].request[" +
                        std::to_string(f) +
                        "]: request probabilities must be strictly positive");
                }
            }
        }
        if (!any_positive_density) {
            throw std::invalid_argument(
                "scenario: at least one group needs density > 0");
        }
        check_weights(weights);
        if (!(tol_dual > 0.0) || !(tol_utility > 0.0)) {
            throw std::invalid_argument("scenario: tolerances must be > 0");
        }
        if (max_sweeps < 1) {
            throw std::invalid_argument("scenario: max_sweeps must be >= 1");
        }
    }

    void check_weights(const std::vector<double>& w) const {
        if (w.size() != groups.size()) {
            throw std::invalid_argument(
                "weights: length " + std::to_string(w.size()) +
                " does not match group count " + std::to_string(groups.size()));
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (!(w[k] >= 0.0)) {
                throw std::invalid_argument(
                    "weights[" + std::to_string(k) + "] must be >= 0");
            }
            sum += w[k];
        }
        if (std::abs(sum - 1.0) > kPmfSumTol) {
            throw std::invalid_argument(
                "weights: sum to " + std::to_string(sum) +
                ", expected 1 within 1e-9");
        }
    }

    /// w_k = lambda_k / lambda_0, the weighting that turns the weighted-sum
    /// objective into the social utility.
    std::vector<double> social_weights() const {
        const double l0 = lambda0();
        std::vector<double> w(groups.size());
        for (std::size_t k = 0; k < groups.size(); ++k) {
            w[k] = groups[k].density / l0;
        }
        return w;
    }
};

/// The decision variables: one caching distribution per group.
struct CachingProfile {
    std::vector<Pmf> per_group;

    std::size_t group_count() const { return per_group.size(); }

    void validate_for(const Scenario& s) const {
        if (per_group.size() != s.group_count()) {
            throw std::invalid_argument(
                "caching profile: group count mismatch");
        }
        for (const auto& c : per_group) {
            if (c.size() != s.file_count()) {
                throw std::invalid_argument(
                    "caching profile: file count mismatch");
            }
        }
    }
};

/// Per-group and social utilities plus solver diagnostics.
struct UtilityReport {
    std::vector<double> group_utilities;
    double social_utility = 0.0;
    double weighted_utility = 0.0;
    std::vector<double> duals;
    double kkt_residual = 0.0;
    int iterations = 0;
};

}  // namespace coopcache
