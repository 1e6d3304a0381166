#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coopcache/scenario.hpp"

namespace coopcache {

namespace detail {

inline void check_group_index(const Scenario& s, std::size_t k) {
    if (k >= s.group_count()) {
        throw std::out_of_range("group index " + std::to_string(k) +
                                " out of range (K = " +
                                std::to_string(s.group_count()) + ")");
    }
}

// Cores are templated over anything indexable as rows[k][f] so the same
// formulas serve the validated Pmf path and raw coordinate vectors (finite
// differences need to step off the simplex).

template <typename Rows>
std::vector<double> cached_neighbors_core(const Scenario& s, const Rows& rows) {
    std::vector<double> mass(s.file_count(), 0.0);
    for (std::size_t j = 0; j < s.group_count(); ++j) {
        const double mu_j = s.mu(j);
        if (mu_j == 0.0) continue;
        for (std::size_t f = 0; f < mass.size(); ++f) {
            mass[f] += mu_j * rows[j][f];
        }
    }
    return mass;
}

template <typename Rows>
double group_utility_core(const Scenario& s, const Rows& rows, std::size_t k) {
    const std::vector<double> mass = cached_neighbors_core(s, rows);
    const Pmf& r = s.groups[k].request;
    double u = 0.0;
    for (std::size_t f = 0; f < mass.size(); ++f) {
        u += r[f] * (1.0 - (1.0 - rows[k][f]) * std::exp(-mass[f]));
    }
    return u;
}

template <typename Rows>
double weighted_utility_core(const Scenario& s, const Rows& rows,
                             const std::vector<double>& w) {
    std::vector<double> miss = cached_neighbors_core(s, rows);
    for (double& m : miss) m = std::exp(-m);
    double u = 0.0;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        if (w[k] == 0.0) continue;
        const Pmf& r = s.groups[k].request;
        double uk = 0.0;
        for (std::size_t f = 0; f < miss.size(); ++f) {
            uk += r[f] * (1.0 - (1.0 - rows[k][f]) * miss[f]);
        }
        u += w[k] * uk;
    }
    return u;
}

}  // namespace detail

/// mu_0 * C_f per file: the mean number of in-range terminals caching f.
/// Computed as sum_j mu_j c_{j,f} to avoid an intermediate division.
inline std::vector<double> mean_cached_neighbors(const Scenario& s,
                                                 const CachingProfile& caching) {
    return detail::cached_neighbors_core(s, caching.per_group);
}

/// Social caching distribution C_f, the density-weighted mean of the group
/// caching distributions.
inline std::vector<double> social_caching(const Scenario& s,
                                          const CachingProfile& caching) {
    caching.validate_for(s);
    const double l0 = s.lambda0();
    if (!(l0 > 0.0)) {
        throw std::invalid_argument("social_caching: total density is zero");
    }
    std::vector<double> C(s.file_count(), 0.0);
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        const double wk = s.groups[k].density / l0;
        for (std::size_t f = 0; f < C.size(); ++f) {
            C[f] += wk * caching.per_group[k][f];
        }
    }
    return C;
}

/// Social request distribution R_f (same averaging with r_k in place of c_k).
inline std::vector<double> social_request(const Scenario& s) {
    const double l0 = s.lambda0();
    if (!(l0 > 0.0)) {
        throw std::invalid_argument("social_request: total density is zero");
    }
    std::vector<double> R(s.file_count(), 0.0);
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        const double wk = s.groups[k].density / l0;
        for (std::size_t f = 0; f < R.size(); ++f) {
            R[f] += wk * s.groups[k].request[f];
        }
    }
    return R;
}

/// Probability that a group-k terminal finds its requested file in its own
/// cache or on any terminal within range:
///   U_k = sum_f r_{k,f} (1 - (1 - c_{k,f}) e^{-mu_0 C_f}).
inline double group_utility(const Scenario& s, const CachingProfile& caching,
                            std::size_t k) {
    detail::check_group_index(s, k);
    caching.validate_for(s);
    return detail::group_utility_core(s, caching.per_group, k);
}

/// Same closed form on unvalidated coordinates (entries may leave the
/// simplex); used by derivative checks.
inline double group_utility_raw(const Scenario& s,
                                const std::vector<std::vector<double>>& rows,
                                std::size_t k) {
    detail::check_group_index(s, k);
    return detail::group_utility_core(s, rows, k);
}

/// Group-k utility when every other group caches faithfully (c_{-k} = r_{-k}),
/// written in terms of the public social request distribution only.
inline double partial_coop_utility(const Scenario& s, std::size_t k,
                                   const Pmf& c_k) {
    detail::check_group_index(s, k);
    if (c_k.size() != s.file_count()) {
        throw std::invalid_argument("partial_coop_utility: file count mismatch");
    }
    const std::vector<double> R = social_request(s);
    const double mu0 = s.mu0();
    const double mu_k = s.mu(k);
    const Pmf& r = s.groups[k].request;
    double u = 0.0;
    for (std::size_t f = 0; f < R.size(); ++f) {
        const double expo = -mu0 * R[f] + mu_k * r[f] - mu_k * c_k[f];
        u += r[f] * (1.0 - (1.0 - c_k[f]) * std::exp(expo));
    }
    return u;
}

/// Weighted-sum utility U({c_k}, w) = sum_k w_k U_k.
inline double weighted_utility(const Scenario& s, const CachingProfile& caching,
                               const std::vector<double>& w) {
    s.check_weights(w);
    caching.validate_for(s);
    return detail::weighted_utility_core(s, caching.per_group, w);
}

inline double weighted_utility_raw(const Scenario& s,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<double>& w) {
    return detail::weighted_utility_core(s, rows, w);
}

/// Density-weighted mean of the group utilities (the social utility).
inline double social_utility(const Scenario& s, const CachingProfile& caching) {
    return weighted_utility(s, caching, s.social_weights());
}

inline std::vector<double> all_group_utilities(const Scenario& s,
                                               const CachingProfile& caching) {
    std::vector<double> u(s.group_count());
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] = group_utility(s, caching, k);
    }
    return u;
}

/// Diagonal Hessian entry of the weighted-sum utility in bar c_{k,f}.
/// Always <= 0: the objective is marginally concave per group.
inline double utility_hessian_diag(const Scenario& s,
                                   const CachingProfile& caching,
                                   const std::vector<double>& w, std::size_t k,
                                   std::size_t f) {
    detail::check_group_index(s, k);
    if (f >= s.file_count()) {
        throw std::out_of_range("file index out of range");
    }
    s.check_weights(w);
    const std::vector<double> mass = mean_cached_neighbors(s, caching);
    const double g = std::exp(-mass[f]);
    const double mu_k = s.mu(k);
    const double barc_kf = 1.0 - caching.per_group[k][f];
    double value =
        w[k] * s.groups[k].request[f] * g * mu_k * (2.0 + barc_kf * mu_k);
    for (std::size_t j = 0; j < s.group_count(); ++j) {
        if (j == k) continue;
        const double barc_jf = 1.0 - caching.per_group[j][f];
        value += w[j] * s.groups[j].request[f] * barc_jf * g * mu_k * mu_k;
    }
    return -value;
}

}  // namespace coopcache
