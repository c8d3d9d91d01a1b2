// Scalar kernels shared by every allocation solver: the perspective rate term,
// the stationarity function f(z) and its inverse, and clamp.
#ifndef LIGHTHARVEST_KERNELS_HPP
#define LIGHTHARVEST_KERNELS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lightharvest {

inline constexpr double kLn2 = std::numbers::ln2;

/// min(max(x, lo), hi). Throws if the interval is empty.
inline double clamp(double x, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
    return std::fmin(std::fmax(x, lo), hi);
}

/// tau * log2(1 + y / tau), extended continuously by 0 at tau = 0.
inline double rate_term(double tau, double y) {
    if (tau < 0.0 || y < 0.0) throw std::domain_error("rate_term: negative argument");
    if (tau == 0.0 || y == 0.0) return 0.0;
    return tau * std::log1p(y / tau) / kLn2;
}

/// d/dtau of rate_term: log2(1 + y/tau) - y / ((tau + y) ln 2).
inline double rate_term_dtau(double tau, double y) {
    if (tau <= 0.0) throw std::domain_error("rate_term_dtau: tau must be positive");
    return (std::log1p(y / tau) - y / (tau + y)) / kLn2;
}

/// f expressed through the excess w = z - 1 > 0. Uses log1p so that tiny
/// excesses keep their relative precision.
inline double f_aux_excess(double w) {
    if (!(w > 0.0)) throw std::domain_error("f_aux_excess: w must be positive");
    return (std::log1p(w) - w / (1.0 + w)) / kLn2;
}

/// f(z) = log2(z) + (1/ln 2)(1/z - 1), strictly increasing on (1, inf), f(1+) = 0.
inline double f_aux(double z) {
    if (!(z > 1.0)) throw std::domain_error("f_aux: z must exceed 1");
    return f_aux_excess(z - 1.0);
}

/// Excess w = f^{-1}(lambda) - 1 by bisection with a geometrically grown
/// bracket, run to full double precision (well inside 1e-12 absolute).
inline double f_inverse_excess(double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("f_inverse: lambda must be nonnegative");
    if (lambda == 0.0) return 0.0;
    if (std::isinf(lambda)) return std::numeric_limits<double>::infinity();
    // f(1+w) ~ w^2 / (2 ln2) near 0 and ~ log2(w) for large w.
    double lo = 0.0;
    double hi = std::fmax(std::sqrt(2.0 * kLn2 * lambda), 1e-300);
    while (f_aux_excess(hi) < lambda) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f_aux_excess(mid) < lambda) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Unique z > 1 with f(z) = lambda; f_inverse(0) = 1.
inline double f_inverse(double lambda) { return 1.0 + f_inverse_excess(lambda); }

}  // namespace lightharvest

#endif  // LIGHTHARVEST_KERNELS_HPP
