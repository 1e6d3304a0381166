#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopcache/rng.hpp"

namespace coopcache {

inline constexpr double kPmfSumTol = 1e-9;

/// Probability mass function over a dense file index range [0, F).
///
/// Construction validates the simplex constraints and refuses to
/// renormalize: a sum off by more than the tolerance is a caller bug,
/// not something to paper over.
class Pmf {
public:
    Pmf() = default;

    explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) {
            throw std::invalid_argument("Pmf: needs at least one file");
        }
        double sum = 0.0;
        for (std::size_t f = 0; f < probs_.size(); ++f) {
            const double p = probs_[f];
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument(
                    "Pmf: entry " + std::to_string(f) + " = " +
                    std::to_string(p) + " outside [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kPmfSumTol) {
            throw std::invalid_argument(
                "Pmf: entries sum to " + std::to_string(sum) +
                ", expected 1 within 1e-9");
        }
    }

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t f) const { return probs_[f]; }
    const std::vector<double>& probs() const { return probs_; }

    auto begin() const { return probs_.begin(); }
    auto end() const { return probs_.end(); }

    bool operator==(const Pmf& other) const { return probs_ == other.probs_; }

private:
    std::vector<double> probs_;
};

/// Zipf popularity over F files: probs[f] = (f+1)^-gamma / sum_i i^-gamma,
/// ranks 1-based inside the formula, indices 0-based outside.
inline Pmf make_zipf(std::size_t file_count, double gamma_r) {
    if (file_count == 0) {
        throw std::invalid_argument("make_zipf: file_count must be >= 1");
    }
    if (!(gamma_r >= 0.0)) {
        throw std::invalid_argument("make_zipf: gamma_r must be >= 0");
    }
    std::vector<double> probs(file_count);
    double norm = 0.0;
    for (std::size_t f = 0; f < file_count; ++f) {
        probs[f] = std::pow(static_cast<double>(f + 1), -gamma_r);
        norm += probs[f];
    }
    for (double& p : probs) p /= norm;
    return Pmf(std::move(probs));
}

/// Uniformly random permutation of the entries, deterministic in the seed.
inline Pmf permute_pmf(const Pmf& p, std::uint64_t seed) {
    std::vector<double> probs = p.probs();
    auto rng = make_engine(seed, RngStream::permute);
    for (std::size_t i = probs.size() - 1; i > 0; --i) {
        const std::size_t j =
            static_cast<std::size_t>(uniform_below(rng, i + 1));
        std::swap(probs[i], probs[j]);
    }
    return Pmf(std::move(probs));
}

/// Uniform point on the simplex via normalized exponential spacings.
inline Pmf random_simplex_pmf(std::size_t file_count, std::mt19937_64& rng) {
    std::vector<double> probs(file_count);
    double sum = 0.0;
    for (double& p : probs) {
        // Avoid log(0); uniform01 returns [0,1).
        p = -std::log(1.0 - uniform01(rng));
        sum += p;
    }
    for (double& p : probs) p /= sum;
    return Pmf(std::move(probs));
}

/// Inverse-CDF sampler over a Pmf, deterministic given the engine stream.
class PmfSampler {
public:
    explicit PmfSampler(const Pmf& p) : cdf_(p.probs()) {
        double acc = 0.0;
        for (double& c : cdf_) {
            acc += c;
            c = acc;
        }
        cdf_.back() = 1.0;  // guard against accumulated rounding
    }

    std::size_t operator()(std::mt19937_64& rng) const {
        const double u = uniform01(rng);
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::size_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

}  // namespace coopcache
