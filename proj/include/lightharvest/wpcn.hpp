// Uplink TDMA time allocation for users powered only by harvested DC light.
//
// With a^2 = p_max the problem is
//     max  sum_k tau_k log2(1 + y_k / tau_k)   s.t.  sum_k tau_k = 1, tau_k >= 0,
// y_k = eta g_k^2 |h_k|^2 p_max / sigma^2. Stationarity gives
// tau_k(lambda) = [y_k / (f^{-1}(lambda) - 1)] clamped to [0, 1].
#ifndef LIGHTHARVEST_WPCN_HPP
#define LIGHTHARVEST_WPCN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lightharvest/kernels.hpp"

namespace lightharvest::wpcn {

struct WpcnInstance {
    std::vector<double> vlc_gain;
    std::vector<double> rf_power_gain;
    double harvest_efficiency = 0.2;
    double max_led_power = 1.0;  // bound on a^2 [W]
    double rf_noise_power = 1e-9;

    std::size_t size() const { return vlc_gain.size(); }

    void validate() const {
        if (vlc_gain.size() != rf_power_gain.size())
            throw std::invalid_argument("WpcnInstance: gain vectors differ in length");
        if (vlc_gain.empty()) throw std::invalid_argument("WpcnInstance: no users");
        for (std::size_t k = 0; k < size(); ++k)
            if (!(vlc_gain[k] >= 0.0) || !(rf_power_gain[k] >= 0.0))
                throw std::invalid_argument("WpcnInstance: gains must be nonnegative");
        if (!(harvest_efficiency > 0.0 && harvest_efficiency <= 1.0))
            throw std::invalid_argument("WpcnInstance: eta must lie in (0, 1]");
        if (!(max_led_power >= 0.0)) throw std::invalid_argument("WpcnInstance: p_max must be >= 0");
        if (!(rf_noise_power > 0.0)) throw std::invalid_argument("WpcnInstance: sigma^2 must be > 0");
    }

    /// y_k = eta g_k^2 |h_k|^2 p_max / sigma^2.
    std::vector<double> snr_coefficients() const {
        std::vector<double> y(size());
        for (std::size_t k = 0; k < size(); ++k)
            y[k] = harvest_efficiency * vlc_gain[k] * vlc_gain[k] * rf_power_gain[k] *
                   max_led_power / rf_noise_power;
        return y;
    }
};

struct WpcnSolution {
    std::vector<double> time_shares;
    double dual_lambda = 0.0;
    double sum_rate = 0.0;
    int iterations = 0;
    bool degenerate = false;  // every y_k was zero
    bool converged = true;
};

enum class DualBackend { Bisection, Subgradient };

struct SubgradientOptions {
    double step0 = 1.0;  // alpha(t) = step0 / sqrt(t)
    int max_iterations = 5000;
    double tolerance = 1e-6;  // on |1 - sum tau|
};

inline double ul_sum_rate(const WpcnInstance& inst, const std::vector<double>& time_shares) {
    if (time_shares.size() != inst.size())
        throw std::invalid_argument("ul_sum_rate: dimension mismatch");
    const auto y = inst.snr_coefficients();
    double total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) total += rate_term(time_shares[k], y[k]);
    return total;
}

/// Residual of dL/dtau_k = 0 at an interior share.
inline double stationarity_residual(double tau, double y, double lambda) {
    return rate_term_dtau(tau, y) - lambda;
}

namespace detail {

inline std::vector<double> shares_for_lambda(const std::vector<double>& y, double lambda) {
    const double w = f_inverse_excess(lambda);
    std::vector<double> tau(y.size(), 0.0);
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (y[k] <= 0.0) continue;
        tau[k] = (w == 0.0) ? 1.0 : clamp(y[k] / w, 0.0, 1.0);
    }
    return tau;
}

inline double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

inline WpcnSolution degenerate_solution(std::size_t n) {
    WpcnSolution sol;
    sol.time_shares.assign(n, 1.0 / static_cast<double>(n));
    sol.degenerate = true;
    return sol;
}

inline WpcnSolution solve_bisection(const std::vector<double>& y, double tolerance) {
    // sum_k tau_k(lambda) is nonincreasing in lambda; at lambda = 0 every
    // active user is at 1, so the sum is >= 1.
    double lo = 0.0;
    double hi = 1.0;
    int it = 0;
    while (total(shares_for_lambda(y, hi)) >= 1.0) {
        lo = hi;
        hi *= 2.0;
        ++it;
    }
    double found = lo;
    for (; it < 4000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double s = total(shares_for_lambda(y, mid));
        if (s >= 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        found = lo;
        if (std::abs(s - 1.0) <= tolerance && hi - lo <= tolerance * std::fmax(1.0, hi)) {
            found = mid;
            break;
        }
    }
    WpcnSolution sol;
    sol.dual_lambda = found;
    sol.time_shares = shares_for_lambda(y, found);
    sol.iterations = it;
    return sol;
}

inline WpcnSolution solve_subgradient(const std::vector<double>& y, const SubgradientOptions& opt) {
    double lambda = 0.0;
    std::vector<double> tau = shares_for_lambda(y, lambda);
    WpcnSolution sol;
    sol.converged = false;
    int t = 1;
    for (; t <= opt.max_iterations; ++t) {
        const double gap = 1.0 - total(tau);
        if (std::abs(gap) < opt.tolerance) {
            sol.converged = true;
            break;
        }
        const double step = opt.step0 / std::sqrt(static_cast<double>(t));
        lambda = std::fmax(lambda - step * gap, 0.0);
        tau = shares_for_lambda(y, lambda);
    }
    // Primal recovery: rescale onto the simplex.
    const double s = total(tau);
    if (s > 0.0)
        for (auto& v : tau) v /= s;
    sol.time_shares = std::move(tau);
    sol.dual_lambda = lambda;
    sol.iterations = t;
    return sol;
}

}  // namespace detail

/// Optimal uplink time shares. Users with y_k = 0 get tau_k = 0 up front;
/// if every y_k is zero the result is the equal split flagged as degenerate.
inline WpcnSolution solve_time_allocation(const WpcnInstance& inst,
                                          DualBackend backend = DualBackend::Bisection,
                                          double tolerance = 1e-12,
                                          const SubgradientOptions& sg = {}) {
    inst.validate();
    const auto y = inst.snr_coefficients();
    if (std::none_of(y.begin(), y.end(), [](double v) { return v > 0.0; }))
        return detail::degenerate_solution(y.size());
    WpcnSolution sol = backend == DualBackend::Bisection ? detail::solve_bisection(y, tolerance)
                                                         : detail::solve_subgradient(y, sg);
    sol.sum_rate = ul_sum_rate(inst, sol.time_shares);
    return sol;
}

inline WpcnSolution equal_time_baseline(const WpcnInstance& inst) {
    inst.validate();
    WpcnSolution sol;
    sol.time_shares.assign(inst.size(), 1.0 / static_cast<double>(inst.size()));
    sol.sum_rate = ul_sum_rate(inst, sol.time_shares);
    return sol;
}

/// Exhaustive search over the simplex grid {sum tau = 1, step grid_step}
/// for K <= 3. Validation oracle only.
inline WpcnSolution brute_force_oracle(const WpcnInstance& inst, double grid_step) {
    inst.validate();
    const std::size_t n = inst.size();
    if (n > 3) throw std::invalid_argument("brute_force_oracle: K must be <= 3");
    if (!(grid_step > 0.0 && grid_step <= 1.0))
        throw std::invalid_argument("brute_force_oracle: grid step must lie in (0, 1]");
    const auto y = inst.snr_coefficients();
    const auto steps = static_cast<long>(std::llround(1.0 / grid_step));
    WpcnSolution best;
    best.sum_rate = -1.0;
    auto consider = [&](std::vector<double> tau) {
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) r += rate_term(tau[k], y[k]);
        if (r > best.sum_rate) {
            best.sum_rate = r;
            best.time_shares = std::move(tau);
        }
    };
    const double h = 1.0 / static_cast<double>(steps);
    if (n == 1) {
        consider({1.0});
    } else if (n == 2) {
        for (long i = 0; i <= steps; ++i) {
            const double t0 = static_cast<double>(i) * h;
            consider({t0, std::fmax(1.0 - t0, 0.0)});
        }
    } else {
        for (long i = 0; i <= steps; ++i)
            for (long j = 0; i + j <= steps; ++j) {
                const double t0 = static_cast<double>(i) * h;
                const double t1 = static_cast<double>(j) * h;
                consider({t0, t1, std::fmax(1.0 - t0 - t1, 0.0)});
            }
    }
    best.iterations = 0;
    return best;
}

}  // namespace lightharvest::wpcn

#endif  // LIGHTHARVEST_WPCN_HPP
