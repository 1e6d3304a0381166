#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace coopcache {

/// Principal-branch Lambert-W on x >= 0: returns w >= 0 with w e^w = x.
///
/// Halley iteration from w0 = ln(1+x); the guess is exact at 0 and within
/// O(ln w) for large x, so the cubic iteration settles in a handful of steps.
inline double lambert_w0(double x) {
    if (!(x >= 0.0)) {
        throw std::domain_error("lambert_w0: argument must be >= 0, got " +
                                std::to_string(x));
    }
    if (x == 0.0) return 0.0;
    double w = std::log1p(x);
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        const double step = f / denom;
        w -= step;
        if (std::abs(step) <= 1e-14) break;
    }
    return w;
}

/// W(e^y) without forming e^y; safe for exponents far beyond the double
/// range. Solves w + ln w = y by Newton when y is too large to exponentiate.
inline double lambert_w0_exp(double y) {
    if (y <= 500.0) return lambert_w0(std::exp(y));
    double w = y - std::log(y);
    for (int it = 0; it < 50; ++it) {
        const double step = (w + std::log(w) - y) / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 1e-14 * w) break;
    }
    return w;
}

/// Outcome of the dual-variable search: the water level, how many residual
/// evaluations it took, and the final bracket width (with its endpoints as
/// diagnostics).
struct BisectionResult {
    double dual = 0.0;
    int evaluations = 0;
    double bracket_width = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

/// Bisection on the caching-mass residual gamma -> sum_f c*_f(gamma) - 1.
///
/// The residual must be monotone nonincreasing with residual(0) >= 0. The
/// open upper bound is realized by doubling gamma_hi from 1 until the
/// residual goes nonpositive; bisection then applies the update rule
/// "mass short -> lower the ceiling, else raise the floor" until the
/// bracket is within delta_gamma.
inline BisectionResult bisect_dual(
    const std::function<double(double)>& residual, double delta_gamma) {
    if (!(delta_gamma > 0.0)) {
        throw std::invalid_argument("bisect_dual: delta_gamma must be > 0");
    }
    BisectionResult result;
    const double at_zero = residual(0.0);
    ++result.evaluations;
    if (at_zero < 0.0) {
        throw std::logic_error(
            "bisect_dual: residual(0) < 0; allocation infeasible");
    }
    if (at_zero == 0.0) {
        // Already feasible with a free constraint (e.g. a single file):
        // gamma = 0 keeps the complementary-slackness certificate exact.
        return result;
    }

    double lo = 0.0;
    double hi = 1.0;
    // 2^200 stands in for the infinite initial ceiling.
    const double cap = 0x1.0p200;
    while (residual(hi) > 0.0) {
        ++result.evaluations;
        hi *= 2.0;
        if (hi > cap) {
            throw std::runtime_error(
                "bisect_dual: residual stayed positive up to 2^200");
        }
    }
    ++result.evaluations;

    while (hi - lo > delta_gamma) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket at FP resolution
        ++result.evaluations;
        if (residual(mid) < 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    result.dual = 0.5 * (lo + hi);
    result.bracket_width = hi - lo;
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    return result;
}

}  // namespace coopcache
