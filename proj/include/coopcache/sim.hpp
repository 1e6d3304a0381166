#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/parallel.hpp"
#include "coopcache/pmf.hpp"
#include "coopcache/rng.hpp"
#include "coopcache/scenario.hpp"

namespace coopcache::sim {

struct Terminal {
    double x = 0.0;
    double y = 0.0;
    std::uint32_t group = 0;
    std::uint32_t cached_file = kNoFile;

    static constexpr std::uint32_t kNoFile = 0xffffffffu;
};

enum class Placement { poisson, fixed_counts };

struct SimConfig {
    Scenario scenario;
    double area_side = 100.0;
    int slots = 300;
    double step_len = 1.0;
    Placement placement = Placement::poisson;
    std::uint64_t seed = 0;

    void validate() const {
        scenario.validate();
        if (!(area_side > 0.0)) {
            throw std::invalid_argument("simulation.area_side must be > 0");
        }
        if (slots < 1) {
            throw std::invalid_argument("simulation.slots must be >= 1");
        }
        if (!(step_len >= 0.0)) {
            throw std::invalid_argument("simulation.step_len must be >= 0");
        }
        if (placement == Placement::fixed_counts) {
            for (std::size_t k = 0; k < scenario.group_count(); ++k) {
                if (!scenario.groups[k].fixed_count) {
                    throw std::invalid_argument(
                        "groups[" + std::to_string(k) +
                        "]: fixed_counts placement needs fixed_count");
                }
            }
        }
    }
};

/// Simulator state on the torus [0, area_side)^2. Counters are cumulative
/// over slots; the request and mobility RNG streams ride along so the
/// evolution is a pure function of (config, caching, seed).
struct World {
    double area_side = 0.0;
    double step_len = 0.0;
    int slot = 0;
    bool caches_assigned = false;
    std::vector<Terminal> terminals;
    std::vector<std::uint64_t> requests;  // per group
    std::vector<std::uint64_t> hits;      // per group
    std::mt19937_64 rng_requests;
    std::mt19937_64 rng_mobility;

    std::size_t group_count() const { return requests.size(); }
};

struct UtilityTrace {
    // per_slot[n][k]: running hit ratio of group k after slot n+1.
    std::vector<std::vector<double>> per_slot;
};

/// Running per-group estimate (Monte Carlo over the Poisson neighbourhood
/// model rather than positions).
struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

namespace detail {

inline double wrap(double v, double side) {
    v = std::fmod(v, side);
    if (v < 0.0) v += side;
    if (v >= side) v -= side;  // fmod can land exactly on side
    return v;
}

inline double torus_dist_sq(double ax, double ay, double bx, double by,
                            double side) {
    double dx = std::abs(ax - bx);
    double dy = std::abs(ay - by);
    if (dx > side - dx) dx = side - dx;
    if (dy > side - dy) dy = side - dy;
    return dx * dx + dy * dy;
}

}  // namespace detail

/// Scatters terminals uniformly at random. Poisson placement draws each
/// group's count as Poisson(lambda_k * area); fixed_counts uses the group's
/// configured population.
inline World init_world(const SimConfig& config) {
    config.validate();
    const Scenario& s = config.scenario;
    World world;
    world.area_side = config.area_side;
    world.step_len = config.step_len;
    world.requests.assign(s.group_count(), 0);
    world.hits.assign(s.group_count(), 0);
    world.rng_requests = make_engine(config.seed, RngStream::requests);
    world.rng_mobility = make_engine(config.seed, RngStream::mobility);

    auto rng = make_engine(config.seed, RngStream::placement);
    const double area = config.area_side * config.area_side;
    for (std::size_t k = 0; k < s.group_count(); ++k) {
        std::size_t count = 0;
        if (config.placement == Placement::fixed_counts) {
            count = *s.groups[k].fixed_count;
        } else if (s.groups[k].density > 0.0) {
            std::poisson_distribution<long> poisson(s.groups[k].density *
                                                    area);
            count = static_cast<std::size_t>(poisson(rng));
        }
        for (std::size_t i = 0; i < count; ++i) {
            Terminal t;
            t.x = uniform01(rng) * config.area_side;
            t.y = uniform01(rng) * config.area_side;
            t.group = static_cast<std::uint32_t>(k);
            world.terminals.push_back(t);
        }
    }
    return world;
}

/// Each terminal samples its single cached file from its group's caching
/// distribution; the cache never changes afterwards.
inline void assign_caches(World& world, const CachingProfile& caching,
                          std::uint64_t seed) {
    if (caching.group_count() != world.group_count()) {
        throw std::invalid_argument("assign_caches: group count mismatch");
    }
    std::vector<PmfSampler> samplers;
    samplers.reserve(caching.group_count());
    for (const Pmf& c : caching.per_group) samplers.emplace_back(c);
    auto rng = make_engine(seed, RngStream::caching);
    for (Terminal& t : world.terminals) {
        t.cached_file =
            static_cast<std::uint32_t>(samplers[t.group](rng));
    }
    world.caches_assigned = true;
}

/// Every terminal moves step_len in an independent uniform direction,
/// wrapping toroidally.
inline void step_mobility(World& world) {
    for (Terminal& t : world.terminals) {
        const double angle = 2.0 * std::numbers::pi *
                             uniform01(world.rng_mobility);
        t.x = detail::wrap(t.x + world.step_len * std::cos(angle),
                           world.area_side);
        t.y = detail::wrap(t.y + world.step_len * std::sin(angle),
                           world.area_side);
    }
    ++world.slot;
}

/// One request per terminal: a hit is the file in its own cache or in any
/// terminal's cache (any group) within toroidal distance range_d.
inline void request_round(World& world, const Scenario& s) {
    if (!world.caches_assigned) {
        throw std::logic_error("request_round: caches not assigned");
    }
    const double d = s.range_d;
    const double d_sq = d * d;
    const double side = world.area_side;
    const std::size_t n = world.terminals.size();

    // Uniform grid with cells at least range_d wide: scanning the 3x3
    // neighbourhood covers every candidate exactly. Tiny worlds fall back
    // to all-pairs to avoid double-visiting wrapped cells.
    const long ncells = std::max<long>(1, static_cast<long>(side / d));
    const bool use_grid = ncells >= 4;
    std::vector<std::vector<std::uint32_t>> cells;
    const double cell_w = side / static_cast<double>(ncells);
    if (use_grid) {
        cells.resize(static_cast<std::size_t>(ncells * ncells));
        for (std::size_t i = 0; i < n; ++i) {
            long cx = static_cast<long>(world.terminals[i].x / cell_w);
            long cy = static_cast<long>(world.terminals[i].y / cell_w);
            cx = std::min(cx, ncells - 1);
            cy = std::min(cy, ncells - 1);
            cells[static_cast<std::size_t>(cy * ncells + cx)].push_back(
                static_cast<std::uint32_t>(i));
        }
    }

    std::vector<PmfSampler> request_samplers;
    request_samplers.reserve(s.group_count());
    for (const auto& g : s.groups) request_samplers.emplace_back(g.request);

    for (std::size_t i = 0; i < n; ++i) {
        const Terminal& t = world.terminals[i];
        const std::uint32_t wanted = static_cast<std::uint32_t>(
            request_samplers[t.group](world.rng_requests));
        ++world.requests[t.group];
        bool hit = t.cached_file == wanted;
        if (!hit && use_grid) {
            const long cx = std::min(static_cast<long>(t.x / cell_w),
                                     ncells - 1);
            const long cy = std::min(static_cast<long>(t.y / cell_w),
                                     ncells - 1);
            for (long oy = -1; oy <= 1 && !hit; ++oy) {
                for (long ox = -1; ox <= 1 && !hit; ++ox) {
                    const long gx = (cx + ox + ncells) % ncells;
                    const long gy = (cy + oy + ncells) % ncells;
                    for (std::uint32_t j :
                         cells[static_cast<std::size_t>(gy * ncells + gx)]) {
                        const Terminal& o = world.terminals[j];
                        if (o.cached_file == wanted &&
                            detail::torus_dist_sq(t.x, t.y, o.x, o.y, side) <=
                                d_sq) {
                            hit = true;
                            break;
                        }
                    }
                }
            }
        } else if (!hit) {
            for (std::size_t j = 0; j < n && !hit; ++j) {
                const Terminal& o = world.terminals[j];
                hit = o.cached_file == wanted &&
                      detail::torus_dist_sq(t.x, t.y, o.x, o.y, side) <= d_sq;
            }
        }
        if (hit) ++world.hits[t.group];
    }
}

/// Full evolution: place, assign caches, then alternate request rounds and
/// mobility steps, recording the running hit ratio per group per slot.
inline UtilityTrace run(const SimConfig& config,
                        const CachingProfile& caching) {
    config.validate();
    caching.validate_for(config.scenario);
    World world = init_world(config);
    assign_caches(world, caching, config.seed);
    UtilityTrace trace;
    trace.per_slot.reserve(static_cast<std::size_t>(config.slots));
    for (int n = 0; n < config.slots; ++n) {
        request_round(world, config.scenario);
        std::vector<double> row(world.group_count());
        for (std::size_t k = 0; k < row.size(); ++k) {
            row[k] = world.requests[k] == 0
                         ? 0.0
                         : static_cast<double>(world.hits[k]) /
                               static_cast<double>(world.requests[k]);
        }
        trace.per_slot.push_back(std::move(row));
        step_mobility(world);
    }
    return trace;
}

/// Direct simulation of the Poisson neighbourhood model behind the
/// closed-form utility: draw neighbour counts per group, their cached files,
/// the terminal's own cache and its request, and score the discovery event.
/// Stays independent of the closed form it validates.
inline McEstimate monte_carlo_utility(const Scenario& s,
                                      const CachingProfile& caching,
                                      std::size_t k, std::uint64_t samples,
                                      std::uint64_t seed) {
    coopcache::detail::check_group_index(s, k);
    caching.validate_for(s);
    if (samples < 1) {
        throw std::invalid_argument("monte_carlo_utility: samples >= 1");
    }
    const std::size_t K = s.group_count();
    std::vector<double> mu(K);
    for (std::size_t j = 0; j < K; ++j) mu[j] = s.mu(j);
    std::vector<PmfSampler> cache_samplers;
    cache_samplers.reserve(K);
    for (const Pmf& c : caching.per_group) cache_samplers.emplace_back(c);
    const PmfSampler request_sampler(s.groups[k].request);

    // Fixed shard layout keeps the result identical for any worker count.
    const std::uint64_t shards = std::min<std::uint64_t>(64, samples);
    std::vector<std::uint64_t> shard_hits(shards, 0);
    parallel_for_index(static_cast<std::size_t>(shards), [&](std::size_t i) {
        const std::uint64_t base = samples / shards;
        const std::uint64_t extra = i < (samples % shards) ? 1 : 0;
        const std::uint64_t count = base + extra;
        auto rng = make_engine(seed, RngStream::monte_carlo, i);
        std::vector<std::poisson_distribution<long>> poissons;
        poissons.reserve(K);
        for (std::size_t j = 0; j < K; ++j) {
            poissons.emplace_back(mu[j] > 0.0 ? mu[j] : 1.0);
        }
        std::uint64_t hits = 0;
        for (std::uint64_t it = 0; it < count; ++it) {
            const std::size_t wanted = request_sampler(rng);
            bool hit = cache_samplers[k](rng) == wanted;
            for (std::size_t j = 0; j < K && !hit; ++j) {
                if (mu[j] == 0.0) continue;
                const long neighbors = poissons[j](rng);
                for (long nn = 0; nn < neighbors && !hit; ++nn) {
                    hit = cache_samplers[j](rng) == wanted;
                }
            }
            if (hit) ++hits;
        }
        shard_hits[i] = hits;
    });
    std::uint64_t total = 0;
    for (std::uint64_t h : shard_hits) total += h;
    McEstimate est;
    est.samples = samples;
    est.estimate = static_cast<double>(total) / static_cast<double>(samples);
    est.stderr_ = std::sqrt(est.estimate * (1.0 - est.estimate) /
                            static_cast<double>(samples));
    return est;
}

}  // namespace coopcache::sim
