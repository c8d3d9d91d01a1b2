// Exhaustive-search references for two-user SLIPT instances. Independent of
// the barrier solver: grid points are built directly from the constraint
// list, so the search only visits feasible allocations.
//
// Outer grid over (tau1^dl, b1, b2). For fixed values of those, the downlink
// rate depends only on Pt1 and the uplink rate only on tau1^ul, both concave
// one-dimensional problems solved by golden-section search.
#ifndef LIGHTHARVEST_ORACLES_HPP
#define LIGHTHARVEST_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "lightharvest/kernels.hpp"
#include "lightharvest/slipt.hpp"

namespace lightharvest::oracles {

struct GridOptions {
    int points_per_axis = 21;
    int refinement_rounds = 12;
};

struct OracleResult {
    double value = -std::numeric_limits<double>::infinity();
    slipt::SubstitutedVars vars;
};

/// Outer allocation with the range left for Pt1.
struct OuterPoint {
    double tau1 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double pt1_lo = 0.0;
    double pt1_hi = 0.0;
};

/// Maps unit coordinates (s0, s1, s2) onto tau1^dl, b1, b2 in turn, each over
/// the range the earlier ones leave. Nullopt when a range is empty.
inline std::optional<OuterPoint> map_outer(const slipt::SliptInstance& in, const std::array<double, 3>& s) {
    if (in.size() != 2) throw std::invalid_argument("oracle: two users only");
    const double p = in.max_led_power;
    const double i2 = in.max_dc_offset * in.max_dc_offset;
    const double a2 = in.dc_energy_cap();
    const double r2 = in.peak_amplitude_ratio * in.peak_amplitude_ratio;
    // User 1 harvests in slot 2 and vice versa.
    const double need_b1 = in.harvest_floor(1);
    const double need_b2 = in.harvest_floor(0);
    if (!std::isfinite(need_b1) || !std::isfinite(need_b2)) return std::nullopt;
    auto lerp = [](double lo, double hi, double t) { return lo + t * (hi - lo); };

    OuterPoint o;
    o.tau1 = s[0];
    const double b1_hi = std::min({i2 * o.tau1, a2, p});
    if (need_b1 > b1_hi) return std::nullopt;
    o.b1 = lerp(need_b1, b1_hi, s[1]);
    const double b2_hi = std::min({i2 * (1.0 - o.tau1), a2, p - o.b1});
    if (need_b2 > b2_hi) return std::nullopt;
    o.b2 = lerp(need_b2, b2_hi, s[2]);
    const double rest = p - o.b1 - o.b2;
    o.pt1_lo = std::fmax(0.0, rest - o.b2 / r2);
    o.pt1_hi = std::fmin(o.b1 / r2, rest);
    if (o.pt1_lo > o.pt1_hi) return std::nullopt;
    return o;
}

/// Maximizer of a concave function on [lo, hi] (golden-section search,
/// endpoints included).
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::fmax(1.0, std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    std::pair<double, double> best{c, fc};
    for (double x : {a, b, d, lo, hi}) {
        const double fx = f(x);
        if (fx > best.second) best = {x, fx};
    }
    return best;
}

inline slipt::SubstitutedVars assemble(const slipt::SliptInstance& in, const OuterPoint& o, double pt1,
                                       double ul1) {
    slipt::SubstitutedVars v;
    v.dl_shares = {o.tau1, 1.0 - o.tau1};
    v.dc_energy = {o.b1, o.b2};
    v.power_time_products = {pt1, std::fmax(in.max_led_power - o.b1 - o.b2 - pt1, 0.0)};
    v.ul_shares = {ul1, 1.0 - ul1};
    return v;
}

/// Best downlink rate for a fixed outer point: (Pt1, rate).
inline std::pair<double, double> best_dl(const slipt::SliptInstance& in, const OuterPoint& o) {
    return golden_max(
        [&](double pt1) { return slipt::dl_sum_rate(in, assemble(in, o, pt1, 0.5)); }, o.pt1_lo, o.pt1_hi);
}

/// Best uplink rate for a fixed outer point: (tau1^ul, rate).
inline std::pair<double, double> best_ul(const slipt::SliptInstance& in, const OuterPoint& o) {
    return golden_max([&](double ul1) { return slipt::ul_sum_rate(in, assemble(in, o, o.pt1_lo, ul1)); }, 0.0,
                      1.0);
}

/// Zooming grid search over the outer unit cube. `score` returns the value
/// and the full allocation for an outer point.
inline OracleResult outer_search(
    const slipt::SliptInstance& in,
    const std::function<std::pair<double, slipt::SubstitutedVars>(const OuterPoint&)>& score,
    const GridOptions& opt) {
    const int n = std::max(opt.points_per_axis, 3);
    std::array<double, 3> lo{0.0, 0.0, 0.0}, hi{1.0, 1.0, 1.0}, best_s{0.5, 0.5, 0.5};
    OracleResult best;
    for (int round = 0; round <= opt.refinement_rounds; ++round) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const std::array<double, 3> s{lo[0] + (hi[0] - lo[0]) * i / (n - 1.0),
                                                  lo[1] + (hi[1] - lo[1]) * j / (n - 1.0),
                                                  lo[2] + (hi[2] - lo[2]) * k / (n - 1.0)};
                    const auto o = map_outer(in, s);
                    if (!o) continue;
                    auto [value, vars] = score(*o);
                    if (value > best.value) {
                        best.value = value;
                        best.vars = std::move(vars);
                        best_s = s;
                    }
                }
        if (!std::isfinite(best.value)) break;
        for (std::size_t d = 0; d < 3; ++d) {
            const double half = 2.0 * (hi[d] - lo[d]) / (n - 1.0);
            lo[d] = std::fmax(0.0, best_s[d] - half);
            hi[d] = std::fmin(1.0, best_s[d] + half);
        }
    }
    return best;
}

inline OracleResult dl_max(const slipt::SliptInstance& in, const GridOptions& opt = {}) {
    return outer_search(
        in,
        [&in](const OuterPoint& o) {
            const auto [pt1, rate] = best_dl(in, o);
            return std::pair{rate, assemble(in, o, pt1, best_ul(in, o).first)};
        },
        opt);
}

inline OracleResult ul_max(const slipt::SliptInstance& in, const GridOptions& opt = {}) {
    return outer_search(
        in,
        [&in](const OuterPoint& o) {
            const auto [ul1, rate] = best_ul(in, o);
            return std::pair{rate, assemble(in, o, best_dl(in, o).first, ul1)};
        },
        opt);
}

/// Smallest weighted Tchebycheff distance t = max_i w_i (R_i* - R_i) for the
/// given utopia rates. The two gaps separate once the outer point is fixed.
inline OracleResult tchebycheff(const slipt::SliptInstance& in, double w_dl, double w_ul, double best_dl_rate,
                                double best_ul_rate, const GridOptions& opt = {}) {
    auto r = outer_search(
        in,
        [&](const OuterPoint& o) {
            const auto [pt1, dl] = best_dl(in, o);
            const auto [ul1, ul] = best_ul(in, o);
            const double t = std::fmax(w_dl * (best_dl_rate - dl), w_ul * (best_ul_rate - ul));
            return std::pair{-t, assemble(in, o, pt1, ul1)};
        },
        opt);
    r.value = -r.value;
    return r;
}

}  // namespace lightharvest::oracles

#endif  // LIGHTHARVEST_ORACLES_HPP
