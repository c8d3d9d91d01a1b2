// Time-switching SLIPT allocation: downlink and uplink sum-rate maximization
// and the weighted Tchebycheff trade-off between them.
//
// Everything works in the substituted variables
//     b_k = a^2 tau_k^dl        (DC energy delivered in slot k)
//     Pt_k = P_k tau_k^dl       (LED power-time product of slot k)
// where both sum-rates are perspective functions, hence jointly concave, over
//     sum tau^dl = 1, sum tau^ul = 1, sum (Pt + b) = p_max,
//     Pt_k <= b_k / A^2, b_k <= I_max^2 tau_k^dl, b_k <= a^2,
//     sum_{i != k} eta g_k^2 b_i >= e_min     (user k harvests in the others' slots),
//     all variables >= 0.
// b_k <= a^2 is the domain of the uplink objective (nonnegative energy left
// for harvesting).
#ifndef LIGHTHARVEST_SLIPT_HPP
#define LIGHTHARVEST_SLIPT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lightharvest/convex.hpp"
#include "lightharvest/kernels.hpp"
#include "lightharvest/wpcn.hpp"

namespace lightharvest::slipt {

using convex::Matrix;
using convex::Vector;

/// Raised when a point violates the uplink domain or an instance admits no
/// strictly feasible allocation.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SliptInstance {
    std::vector<double> vlc_gain;       // g_k
    std::vector<double> rf_power_gain;  // |h_k|^2
    double harvest_efficiency = 0.2;    // eta
    double max_led_power = 4.0;         // p_max [W]
    double max_dc_offset = 3.0;         // I_max
    double peak_amplitude_ratio = 1.0;  // A
    double vlc_noise_power = 3e-14;     // delta^2 = N0 W
    double rf_noise_power = 1e-9;       // sigma^2
    double min_harvest = 0.0;           // e_min [J]
    double dc_offset = 2.0;             // a

    std::size_t size() const { return vlc_gain.size(); }

    void validate() const {
        if (vlc_gain.empty() || vlc_gain.size() != rf_power_gain.size())
            throw std::invalid_argument("SliptInstance: gain vectors empty or of different length");
        for (std::size_t k = 0; k < size(); ++k)
            if (!(vlc_gain[k] >= 0.0 && rf_power_gain[k] >= 0.0))
                throw std::invalid_argument("SliptInstance: gains must be nonnegative");
        if (!(harvest_efficiency > 0.0 && harvest_efficiency <= 1.0))
            throw std::invalid_argument("SliptInstance: eta must lie in (0, 1]");
        if (!(max_led_power > 0.0)) throw std::invalid_argument("SliptInstance: p_max must be > 0");
        if (!(peak_amplitude_ratio > 0.0)) throw std::invalid_argument("SliptInstance: A must be > 0");
        if (!(vlc_noise_power > 0.0 && rf_noise_power > 0.0))
            throw std::invalid_argument("SliptInstance: noise powers must be > 0");
        if (!(min_harvest >= 0.0)) throw std::invalid_argument("SliptInstance: e_min must be >= 0");
        if (!(dc_offset >= 0.0 && dc_offset <= max_dc_offset))
            throw std::invalid_argument("SliptInstance: need 0 <= a <= I_max");
    }

    /// gamma_k = e g_k^2 / (2 pi delta^2).
    double dl_coefficient(std::size_t k) const {
        return std::numbers::e * vlc_gain[k] * vlc_gain[k] / (2.0 * std::numbers::pi * vlc_noise_power);
    }
    /// gamma-bar_k = eta |h_k|^2 g_k^2 / sigma^2.
    double ul_coefficient(std::size_t k) const {
        return harvest_efficiency * rf_power_gain[k] * vlc_gain[k] * vlc_gain[k] / rf_noise_power;
    }
    /// Lower bound on sum_{i != k} b_i implied by the harvest constraint of
    /// user k (infinite when user k cannot harvest at all).
    double harvest_floor(std::size_t k) const {
        if (min_harvest == 0.0) return 0.0;
        const double c = harvest_efficiency * vlc_gain[k] * vlc_gain[k];
        return c > 0.0 ? min_harvest / c : std::numeric_limits<double>::infinity();
    }
    double dc_energy_cap() const { return dc_offset * dc_offset; }
};

struct SubstitutedVars {
    std::vector<double> dl_shares;           // tau^dl
    std::vector<double> ul_shares;           // tau^ul
    std::vector<double> dc_energy;           // b
    std::vector<double> power_time_products; // Pt

    std::size_t size() const { return dl_shares.size(); }
};

/// Named multipliers. Scalars belong to the coupling constraints, vectors are
/// per user.
struct SliptDuals {
    double lambda = 0.0;  // sum tau^ul = 1
    double zeta = 0.0;    // sum tau^dl = 1
    double psi = 0.0;     // sum (Pt + b) = p_max
    std::vector<double> nu;      // Pt_k <= b_k / A^2
    std::vector<double> omega;   // b_k <= I_max^2 tau_k^dl
    std::vector<double> mu;      // harvest of user k (per unit of sum_{i != k} b_i)
    std::vector<double> dc_cap;  // b_k <= a^2
};

enum class SolveStatus { Optimal, Infeasible, NotConverged };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NotConverged: return "not_converged";
    }
    return "unknown";
}

/// Outcome of the closed-form dual iteration, kept alongside the certified
/// solution it was checked against.
struct SchemeReport {
    bool ran = false;
    bool converged = false;   // relative objective change fell below tolerance
    int iterations = 0;
    double objective = 0.0;     // at the recovered primal point
    double max_violation = 0.0; // of the recovered primal point
    double relative_gap = 0.0;  // |scheme - reference| / reference
    bool agrees = false;        // gap <= 1e-3 and violation <= 1e-5
};

struct SliptSolution {
    SolveStatus status = SolveStatus::NotConverged;
    SubstitutedVars vars;
    std::vector<double> dc_offset;  // a_k = sqrt(b_k / tau_k^dl)
    std::vector<double> led_power;  // P_k = Pt_k / tau_k^dl
    double dl_sum_rate = 0.0;
    double ul_sum_rate = 0.0;
    SliptDuals duals;
    double kkt_residual = 0.0;
    double max_complementarity = 0.0;  // max multiplier x slack
    int iterations = 0;
    bool fallback_warning = false;  // closed-form scheme disagreed with the reference
    SchemeReport scheme;
    std::string message;
};

struct ParetoPoint {
    double weight_dl = 0.0;  // lambda_1
    double weight_ul = 0.0;  // lambda_2
    double dl_sum_rate = 0.0;
    double ul_sum_rate = 0.0;
    double epigraph_t = 0.0;
    bool converged = false;
    SubstitutedVars vars;
};

struct SchemeOptions {
    double penalty_alpha = 1e-3;
    double beta0 = 0.1;  // beta(t) = beta0 / sqrt(t)
    int max_iterations = 5000;
    double relative_tolerance = 1e-6;
};

struct SliptOptions {
    bool run_dual_scheme = true;
    SchemeOptions scheme;
    convex::Options barrier;
};

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

namespace detail {

inline void require_shape(const SliptInstance& inst, const SubstitutedVars& v) {
    const std::size_t k = inst.size();
    if (v.dl_shares.size() != k || v.ul_shares.size() != k || v.dc_energy.size() != k ||
        v.power_time_products.size() != k)
        throw std::invalid_argument("dimension mismatch between instance and variables");
}

}  // namespace detail

/// sum_k tau_k^dl log2(1 + gamma_k Pt_k / tau_k^dl).
inline double dl_sum_rate(const SliptInstance& inst, const SubstitutedVars& v) {
    detail::require_shape(inst, v);
    double r = 0.0;
    for (std::size_t k = 0; k < inst.size(); ++k)
        r += rate_term(v.dl_shares[k], inst.dl_coefficient(k) * v.power_time_products[k]);
    return r;
}

/// sum_k tau_k^ul log2(1 + gamma-bar_k (a^2 - b_k) / tau_k^ul).
inline double ul_sum_rate(const SliptInstance& inst, const SubstitutedVars& v) {
    detail::require_shape(inst, v);
    const double cap = inst.dc_energy_cap();
    double r = 0.0;
    for (std::size_t k = 0; k < inst.size(); ++k) {
        const double left = cap - v.dc_energy[k];
        if (left < -1e-12 * std::fmax(1.0, cap))
            throw InfeasibleError("ul_sum_rate: b_k exceeds a^2 (negative harvested energy)");
        r += rate_term(v.ul_shares[k], inst.ul_coefficient(k) * std::fmax(left, 0.0));
    }
    return r;
}

/// Uplink sum-rate from the physical per-user powers
/// p_k = eta a^2 g_k^2 (1 - tau_k^dl) / tau_k^ul with the global DC offset a.
inline double ul_sum_rate_physical(const SliptInstance& inst, const std::vector<double>& dl_shares,
                                   const std::vector<double>& ul_shares) {
    const double a2 = inst.dc_energy_cap();
    double r = 0.0;
    for (std::size_t k = 0; k < inst.size(); ++k) {
        if (ul_shares[k] <= 0.0) continue;
        const double g = inst.vlc_gain[k];
        const double pk = inst.harvest_efficiency * a2 * g * g * (1.0 - dl_shares[k]) / ul_shares[k];
        r += ul_shares[k] * std::log2(1.0 + pk * inst.rf_power_gain[k] / inst.rf_noise_power);
    }
    return r;
}

/// Largest violation of any constraint plus the three equality residuals.
struct ConstraintReport {
    double max_violation = 0.0;
    double dl_share_residual = 0.0;  // |sum tau^dl - 1|
    double ul_share_residual = 0.0;  // |sum tau^ul - 1|
    double power_residual = 0.0;     // |sum (Pt + b) - p_max|
    double min_harvest_margin = 0.0; // min_k sum_{i != k} eta g_k^2 b_i - e_min
};

inline ConstraintReport check_constraints(const SliptInstance& inst, const SubstitutedVars& v) {
    detail::require_shape(inst, v);
    const std::size_t n = inst.size();
    ConstraintReport rep;
    const double a_ratio2 = inst.peak_amplitude_ratio * inst.peak_amplitude_ratio;
    const double i2 = inst.max_dc_offset * inst.max_dc_offset;
    double sdl = 0.0;
    double sul = 0.0;
    double pw = 0.0;
    double sb = 0.0;
    auto viol = [&rep](double amount) { rep.max_violation = std::fmax(rep.max_violation, amount); };
    for (std::size_t k = 0; k < n; ++k) {
        sdl += v.dl_shares[k];
        sul += v.ul_shares[k];
        pw += v.power_time_products[k] + v.dc_energy[k];
        sb += v.dc_energy[k];
        viol(-v.dl_shares[k]);
        viol(-v.ul_shares[k]);
        viol(-v.dc_energy[k]);
        viol(-v.power_time_products[k]);
        viol(v.power_time_products[k] - v.dc_energy[k] / a_ratio2);
        viol(v.dc_energy[k] - i2 * v.dl_shares[k]);
        viol(v.dc_energy[k] - inst.dc_energy_cap());
    }
    rep.min_harvest_margin = std::numeric_limits<double>::infinity();
    if (n >= 2 || inst.min_harvest > 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            const double c = inst.harvest_efficiency * inst.vlc_gain[k] * inst.vlc_gain[k];
            const double margin = c * (sb - v.dc_energy[k]) - inst.min_harvest;
            rep.min_harvest_margin = std::fmin(rep.min_harvest_margin, margin);
            const double floor = inst.harvest_floor(k);
            if (std::isfinite(floor)) viol(floor - (sb - v.dc_energy[k]));
            else viol(std::numeric_limits<double>::infinity());
        }
    }
    rep.dl_share_residual = std::abs(sdl - 1.0);
    rep.ul_share_residual = std::abs(sul - 1.0);
    rep.power_residual = std::abs(pw - inst.max_led_power);
    viol(rep.dl_share_residual);
    viol(rep.ul_share_residual);
    viol(rep.power_residual);
    return rep;
}

/// Per-slot DC offsets and LED powers. Slots with tau^dl below `eps` report 0.
inline void recover_physical(const SubstitutedVars& v, std::vector<double>& dc_offset,
                             std::vector<double>& led_power, double eps = 1e-12) {
    dc_offset.assign(v.size(), 0.0);
    led_power.assign(v.size(), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v.dl_shares[k] <= eps) continue;
        dc_offset[k] = std::sqrt(std::fmax(v.dc_energy[k], 0.0) / v.dl_shares[k]);
        led_power[k] = v.power_time_products[k] / v.dl_shares[k];
    }
}

/// Global-offset projection: one DC offset for every slot requires
/// b_k tau_j = b_j tau_k, i.e. tau^dl proportional to b. Keeps b and Pt and
/// moves tau^dl, so the common offset is sqrt(sum b). Returns nullopt when
/// that offset exceeds I_max.
inline std::optional<SubstitutedVars> project_global_offset(const SliptInstance& inst,
                                                            const SubstitutedVars& v) {
    detail::require_shape(inst, v);
    const double sb = std::accumulate(v.dc_energy.begin(), v.dc_energy.end(), 0.0);
    if (!(sb > 0.0)) return std::nullopt;
    if (sb > inst.max_dc_offset * inst.max_dc_offset * (1.0 + 1e-12)) return std::nullopt;
    SubstitutedVars out = v;
    for (std::size_t k = 0; k < v.size(); ++k) out.dl_shares[k] = v.dc_energy[k] / sb;
    return out;
}

// ---------------------------------------------------------------------------
// Convex model shared by every solver
// ---------------------------------------------------------------------------

namespace detail {

/// Adds gain-scaled perspective tau log2(1 + gain * y / tau), with
/// y = y0 + ysign * x[iy], to value/gradient/Hessian.
inline void add_perspective(const Vector& x, Eigen::Index it, Eigen::Index iy, double y0,
                            double ysign, double gain, double& value, Vector* grad, Matrix* hess) {
    if (gain == 0.0) return;
    const double tau = x[it];
    const double u = gain * (y0 + ysign * x[iy]);
    const double den = tau + u;
    const double l = std::log1p(u / tau);
    value += tau * l / kLn2;
    if (grad) {
        (*grad)[it] += (l - u / den) / kLn2;
        (*grad)[iy] += ysign * gain * tau / den / kLn2;
    }
    if (hess) {
        const double d2 = den * den * kLn2;
        (*hess)(it, it) += -(u * u) / (tau * d2);
        (*hess)(iy, iy) += -gain * gain * tau / d2;
        const double cross = ysign * gain * u / d2;
        (*hess)(it, iy) += cross;
        (*hess)(iy, it) += cross;
    }
}

}  // namespace detail

/// Index layout of the stacked variable vector [tau^dl, tau^ul, b, Pt, (t)].
struct Layout {
    Eigen::Index users;
    Eigen::Index dl(std::size_t k) const { return static_cast<Eigen::Index>(k); }
    Eigen::Index ul(std::size_t k) const { return users + static_cast<Eigen::Index>(k); }
    Eigen::Index b(std::size_t k) const { return 2 * users + static_cast<Eigen::Index>(k); }
    Eigen::Index p(std::size_t k) const { return 3 * users + static_cast<Eigen::Index>(k); }
    Eigen::Index size() const { return 4 * users; }
};

/// Row groups of the inequality matrix, in order.
struct RowMap {
    Eigen::Index nonneg = 0;  // 4K rows: -x <= 0
    Eigen::Index ratio = 0;   // K rows: Pt - b / A^2 <= 0
    Eigen::Index cap_i = 0;   // K rows: b - I^2 tau^dl <= 0
    Eigen::Index cap_a = 0;   // K rows: b <= a^2
    Eigen::Index harvest = 0; // harvest rows (scaled to units of b)
    std::vector<std::size_t> harvest_user;  // user of each harvest row
};

/// Linear feasible set, a strictly interior point, and the objectives.
class SliptModel {
public:
    explicit SliptModel(SliptInstance inst, const convex::Options& barrier = {})
        : inst_(std::move(inst)), layout_{static_cast<Eigen::Index>(inst_.size())}, barrier_(barrier) {
        inst_.validate();
        build_polytope();
        if (feasible_) find_interior();
    }

    const SliptInstance& instance() const { return inst_; }
    const Layout& layout() const { return layout_; }
    const RowMap& rows() const { return rows_; }
    bool feasible() const { return feasible_; }
    const std::string& infeasibility_reason() const { return reason_; }
    const Vector& interior_point() const { return interior_; }
    const convex::Options& barrier_options() const { return barrier_; }

    /// Linear part of the problem over x (and an optional trailing epigraph
    /// variable with zero coefficients).
    convex::Problem base_problem(bool with_epigraph) const {
        convex::Problem p;
        const Eigen::Index n = layout_.size() + (with_epigraph ? 1 : 0);
        p.eq_matrix = Matrix::Zero(eq_.rows(), n);
        p.eq_matrix.leftCols(layout_.size()) = eq_;
        p.eq_rhs = eq_rhs_;
        p.ineq_matrix = Matrix::Zero(g_.rows(), n);
        p.ineq_matrix.leftCols(layout_.size()) = g_;
        p.ineq_rhs = h_;
        return p;
    }

    double dl_rate(const Vector& x) const {
        double v = 0.0;
        for (std::size_t k = 0; k < inst_.size(); ++k)
            detail::add_perspective(x, layout_.dl(k), layout_.p(k), 0.0, 1.0, inst_.dl_coefficient(k), v,
                                    nullptr, nullptr);
        return v;
    }
    double ul_rate(const Vector& x) const {
        double v = 0.0;
        const double cap = inst_.dc_energy_cap();
        for (std::size_t k = 0; k < inst_.size(); ++k)
            detail::add_perspective(x, layout_.ul(k), layout_.b(k), cap, -1.0, inst_.ul_coefficient(k), v,
                                    nullptr, nullptr);
        return v;
    }

    /// w_dl * DL + w_ul * UL + alpha * sum ln(1 + b_k), on vectors of size
    /// `dim` >= 4K (extra coordinates ignored).
    convex::SmoothConcave combined(double w_dl, double w_ul, double alpha = 0.0) const {
        convex::SmoothConcave f;
        const SliptModel* self = this;
        f.value = [self, w_dl, w_ul, alpha](const Vector& x) {
            double v = 0.0;
            if (w_dl != 0.0) v += w_dl * self->dl_rate(x);
            if (w_ul != 0.0) v += w_ul * self->ul_rate(x);
            if (alpha != 0.0)
                for (std::size_t k = 0; k < self->inst_.size(); ++k)
                    v += alpha * std::log1p(x[self->layout_.b(k)]);
            return v;
        };
        f.derivatives = [self, w_dl, w_ul, alpha](const Vector& x, Vector& g, Matrix& h) {
            g.setZero();
            h.setZero();
            const auto& L = self->layout_;
            const auto& in = self->inst_;
            double dummy = 0.0;
            Vector gd = Vector::Zero(x.size());
            Matrix hd = Matrix::Zero(x.size(), x.size());
            if (w_dl != 0.0) {
                for (std::size_t k = 0; k < in.size(); ++k)
                    detail::add_perspective(x, L.dl(k), L.p(k), 0.0, 1.0, in.dl_coefficient(k), dummy, &gd, &hd);
                g += w_dl * gd;
                h += w_dl * hd;
            }
            if (w_ul != 0.0) {
                gd.setZero();
                hd.setZero();
                const double cap = in.dc_energy_cap();
                for (std::size_t k = 0; k < in.size(); ++k)
                    detail::add_perspective(x, L.ul(k), L.b(k), cap, -1.0, in.ul_coefficient(k), dummy, &gd, &hd);
                g += w_ul * gd;
                h += w_ul * hd;
            }
            if (alpha != 0.0)
                for (std::size_t k = 0; k < in.size(); ++k) {
                    const double bk = x[L.b(k)];
                    g[L.b(k)] += alpha / (1.0 + bk);
                    h(L.b(k), L.b(k)) += -alpha / ((1.0 + bk) * (1.0 + bk));
                }
        };
        return f;
    }

    SubstitutedVars unpack(const Vector& x) const {
        SubstitutedVars v;
        const std::size_t n = inst_.size();
        v.dl_shares.resize(n);
        v.ul_shares.resize(n);
        v.dc_energy.resize(n);
        v.power_time_products.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            v.dl_shares[k] = x[layout_.dl(k)];
            v.ul_shares[k] = x[layout_.ul(k)];
            v.dc_energy[k] = x[layout_.b(k)];
            v.power_time_products[k] = x[layout_.p(k)];
        }
        return v;
    }

    /// Maps barrier multipliers onto the named constraints.
    SliptDuals named_duals(const convex::Result& r) const {
        SliptDuals d;
        const std::size_t n = inst_.size();
        d.zeta = r.eq_duals.size() > 0 ? r.eq_duals[0] : 0.0;
        d.lambda = r.eq_duals.size() > 1 ? r.eq_duals[1] : 0.0;
        d.psi = r.eq_duals.size() > 2 ? r.eq_duals[2] : 0.0;
        d.nu.resize(n);
        d.omega.resize(n);
        d.dc_cap.resize(n);
        d.mu.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            d.nu[k] = r.ineq_duals[rows_.ratio + static_cast<Eigen::Index>(k)];
            d.omega[k] = r.ineq_duals[rows_.cap_i + static_cast<Eigen::Index>(k)];
            d.dc_cap[k] = r.ineq_duals[rows_.cap_a + static_cast<Eigen::Index>(k)];
        }
        for (std::size_t j = 0; j < rows_.harvest_user.size(); ++j)
            d.mu[rows_.harvest_user[j]] = r.ineq_duals[rows_.harvest + static_cast<Eigen::Index>(j)];
        return d;
    }

    /// max_i multiplier_i * slack_i over the linear rows (and concave ones).
    static double max_complementarity(const convex::Problem& p, const convex::Result& r) {
        double worst = 0.0;
        const Vector slack = p.ineq_rhs - p.ineq_matrix * r.x;
        for (Eigen::Index i = 0; i < slack.size(); ++i)
            worst = std::fmax(worst, std::abs(r.ineq_duals[i] * slack[i]));
        for (std::size_t j = 0; j < p.concave_constraints.size(); ++j)
            worst = std::fmax(worst, std::abs(r.concave_duals[static_cast<Eigen::Index>(j)] *
                                              p.concave_constraints[j].value(r.x)));
        return worst;
    }

private:
    void build_polytope() {
        const std::size_t n = inst_.size();
        const Eigen::Index nn = static_cast<Eigen::Index>(n);
        const Eigen::Index dim = layout_.size();
        const double a_ratio2 = inst_.peak_amplitude_ratio * inst_.peak_amplitude_ratio;
        const double i2 = inst_.max_dc_offset * inst_.max_dc_offset;

        std::vector<std::size_t> harvest_users;
        for (std::size_t k = 0; k < n; ++k) {
            const double floor = inst_.harvest_floor(k);
            if (n == 1) {
                // No other slots to harvest from.
                if (floor > 0.0) {
                    feasible_ = false;
                    reason_ = "single user cannot meet a positive harvest requirement";
                }
                continue;
            }
            if (!std::isfinite(floor)) {
                feasible_ = false;
                reason_ = "user " + std::to_string(k) + " has zero VLC gain but a positive harvest requirement";
                continue;
            }
            harvest_users.push_back(k);
        }

        const Eigen::Index rows = 4 * nn + 3 * nn + static_cast<Eigen::Index>(harvest_users.size());
        g_ = Matrix::Zero(rows, dim);
        h_ = Vector::Zero(rows);
        Eigen::Index r = 0;
        rows_.nonneg = r;
        for (Eigen::Index i = 0; i < dim; ++i) g_(r++, i) = -1.0;
        rows_.ratio = r;
        for (std::size_t k = 0; k < n; ++k, ++r) {
            g_(r, layout_.p(k)) = 1.0;
            g_(r, layout_.b(k)) = -1.0 / a_ratio2;
        }
        rows_.cap_i = r;
        for (std::size_t k = 0; k < n; ++k, ++r) {
            g_(r, layout_.b(k)) = 1.0;
            g_(r, layout_.dl(k)) = -i2;
        }
        rows_.cap_a = r;
        for (std::size_t k = 0; k < n; ++k, ++r) {
            g_(r, layout_.b(k)) = 1.0;
            h_[r] = inst_.dc_energy_cap();
        }
        rows_.harvest = r;
        for (std::size_t k : harvest_users) {
            for (std::size_t i = 0; i < n; ++i)
                if (i != k) g_(r, layout_.b(i)) = -1.0;
            h_[r] = -inst_.harvest_floor(k);
            rows_.harvest_user.push_back(k);
            ++r;
        }

        eq_ = Matrix::Zero(3, dim);
        eq_rhs_ = Vector(3);
        for (std::size_t k = 0; k < n; ++k) {
            eq_(0, layout_.dl(k)) = 1.0;
            eq_(1, layout_.ul(k)) = 1.0;
            eq_(2, layout_.b(k)) = 1.0;
            eq_(2, layout_.p(k)) = 1.0;
        }
        eq_rhs_ << 1.0, 1.0, inst_.max_led_power;
    }

    void find_interior() {
        const std::size_t n = inst_.size();
        Vector guess(layout_.size());
        const double share = 1.0 / static_cast<double>(n);
        const double a_ratio2 = inst_.peak_amplitude_ratio * inst_.peak_amplitude_ratio;
        // Split the budget so that Pt sits at half its ratio cap.
        const double b_each = inst_.max_led_power / (1.0 + 0.5 / a_ratio2) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            guess[layout_.dl(k)] = share;
            guess[layout_.ul(k)] = share;
            guess[layout_.b(k)] = b_each;
            guess[layout_.p(k)] = 0.5 * b_each / a_ratio2;
        }
        const convex::Problem p = base_problem(false);
        auto x = convex::strictly_feasible_point(p, guess);
        if (!x) {
            feasible_ = false;
            reason_ = "constraints admit no strictly feasible allocation";
            return;
        }
        interior_ = *x;
    }

    SliptInstance inst_;
    Layout layout_;
    convex::Options barrier_;
    Matrix eq_;
    Vector eq_rhs_;
    Matrix g_;
    Vector h_;
    RowMap rows_;
    bool feasible_ = true;
    std::string reason_;
    Vector interior_;
};

// ---------------------------------------------------------------------------
// Reference (interior-point) solves
// ---------------------------------------------------------------------------

namespace detail {

inline SliptSolution infeasible_solution(const SliptModel& model) {
    SliptSolution s;
    s.status = SolveStatus::Infeasible;
    s.message = model.infeasibility_reason();
    return s;
}

inline SliptSolution package(const SliptModel& model, const convex::Problem& prob,
                             const convex::Result& res, int iterations) {
    SliptSolution s;
    s.vars = model.unpack(res.x);
    recover_physical(s.vars, s.dc_offset, s.led_power);
    s.dl_sum_rate = dl_sum_rate(model.instance(), s.vars);
    s.ul_sum_rate = ul_sum_rate(model.instance(), s.vars);
    s.duals = model.named_duals(res);
    s.kkt_residual = res.kkt_residual;
    s.max_complementarity = SliptModel::max_complementarity(prob, res);
    s.iterations = iterations;
    s.status = res.status == convex::Status::Optimal ? SolveStatus::Optimal : SolveStatus::NotConverged;
    return s;
}

/// Maximizes primary, then the secondary objective subject to keeping the
/// primary within `slack` of its optimum. Returns (stage-1 value, solution).
inline std::pair<double, SliptSolution> lexicographic(const SliptModel& model, double w_dl, double w_ul,
                                                      double alpha) {
    convex::Problem p1 = model.base_problem(false);
    p1.objective = model.combined(w_dl, w_ul, alpha);
    const auto r1 = convex::maximize(p1, model.interior_point(), model.barrier_options());
    const double best = r1.objective;

    convex::Problem p2 = model.base_problem(false);
    const bool dl_primary = w_dl != 0.0;
    p2.objective = model.combined(dl_primary ? 0.0 : 1.0, dl_primary ? 1.0 : 0.0);
    const double slack = 1e-9 * std::fmax(std::abs(best), 1e-12);
    convex::SmoothConcave keep = model.combined(w_dl, w_ul, alpha);
    convex::SmoothConcave shifted;
    shifted.value = [keep, best, slack](const Vector& x) { return keep.value(x) - best + slack; };
    shifted.derivatives = keep.derivatives;
    p2.concave_constraints.push_back(shifted);
    const auto r2 = convex::maximize(p2, r1.x, model.barrier_options());
    // Multipliers and residuals certify the primary problem; the point is the
    // stage-2 refinement, optimal for the primary within `slack`.
    SliptSolution sol = package(model, p1, r1, r1.newton_iterations + r2.newton_iterations);
    sol.vars = model.unpack(r2.x);
    recover_physical(sol.vars, sol.dc_offset, sol.led_power);
    sol.dl_sum_rate = dl_sum_rate(model.instance(), sol.vars);
    sol.ul_sum_rate = ul_sum_rate(model.instance(), sol.vars);
    if (r2.status != convex::Status::Optimal) sol.status = SolveStatus::NotConverged;
    return {best, sol};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-form dual iterations
// ---------------------------------------------------------------------------

namespace detail {

struct SchemeIterate {
    SubstitutedVars vars;
    bool converged = false;
    int iterations = 0;
};

inline double step_size(const SchemeOptions& o, int t) { return o.beta0 / std::sqrt(static_cast<double>(t)); }
inline double pos(double v) { return std::fmax(v, 0.0); }

/// Downlink: alternate (tau^dl, b) for fixed Pt and Pt for fixed
/// (tau^dl, b), updating multipliers by projected subgradient steps.
/// Primal points are step-weighted running averages.
inline SchemeIterate dl_dual_scheme(const SliptInstance& in, const SchemeOptions& o) {
    const std::size_t n = in.size();
    const double a_ratio2 = in.peak_amplitude_ratio * in.peak_amplitude_ratio;
    const double i2 = in.max_dc_offset * in.max_dc_offset;
    const double bcap = std::fmin(in.dc_energy_cap(), in.max_led_power);
    std::vector<double> floor(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        floor[k] = n > 1 ? std::fmin(in.harvest_floor(k), 1e300) : 0.0;

    std::vector<double> tau(n, 1.0 / static_cast<double>(n));
    std::vector<double> b(n, in.max_led_power / (2.0 * static_cast<double>(n)));
    std::vector<double> pt(b);
    double zeta = 0.0, psi = 0.0;
    std::vector<double> nu(n, 0.0), omega(n, 0.0), mu(n, 0.0);

    SubstitutedVars avg;
    avg.dl_shares.assign(n, 0.0);
    avg.dc_energy.assign(n, 0.0);
    avg.power_time_products.assign(n, 0.0);
    avg.ul_shares.assign(n, 1.0 / static_cast<double>(n));
    double weight = 0.0;
    double prev_obj = -1.0;

    SchemeIterate out;
    int t = 1;
    for (; t <= o.max_iterations; ++t) {
        const double beta = step_size(o, t);
        // Step 1: tau^dl and b with Pt fixed.
        for (std::size_t k = 0; k < n; ++k) {
            const double num = in.dl_coefficient(k) * pt[k];
            const double price = zeta - omega[k] * i2;
            if (num <= 0.0) {
                tau[k] = 0.0;
            } else if (price <= 0.0) {
                tau[k] = 1.0;
            } else {
                const double w = f_inverse_excess(price);
                tau[k] = w > 0.0 ? clamp(num / w, 0.0, 1.0) : 1.0;
            }
        }
        double others = 0.0;
        for (std::size_t k = 0; k < n; ++k) others += mu[k];
        for (std::size_t k = 0; k < n; ++k) {
            const double d = psi + omega[k] - nu[k] / a_ratio2 - (others - mu[k]);
            b[k] = d > 0.0 ? clamp(o.penalty_alpha / d - 1.0, 0.0, bcap) : bcap;
        }
        double stau = 0.0, spow = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            stau += tau[k];
            spow += pt[k] + b[k];
        }
        double sb = std::accumulate(b.begin(), b.end(), 0.0);
        zeta = pos(zeta - beta * (1.0 - stau));
        psi = pos(psi - beta * (in.max_led_power - spow));
        for (std::size_t k = 0; k < n; ++k) {
            nu[k] = pos(nu[k] - beta * (b[k] / a_ratio2 - pt[k]));
            omega[k] = pos(omega[k] - beta * (i2 * tau[k] - b[k]));
            if (n > 1) mu[k] = pos(mu[k] - beta * ((sb - b[k]) - floor[k]));
        }
        // Step 2: Pt with (tau^dl, b) fixed, then (psi, nu).
        for (std::size_t k = 0; k < n; ++k) {
            const double g = in.dl_coefficient(k);
            const double price = psi + nu[k];
            if (g <= 0.0) {
                pt[k] = 0.0;
            } else if (price <= 0.0) {
                pt[k] = tau[k] * in.max_led_power;
            } else {
                pt[k] = tau[k] * clamp(1.0 / (kLn2 * price) - 1.0 / g, 0.0, in.max_led_power);
            }
        }
        spow = 0.0;
        for (std::size_t k = 0; k < n; ++k) spow += pt[k] + b[k];
        psi = pos(psi - beta * (in.max_led_power - spow));
        for (std::size_t k = 0; k < n; ++k) nu[k] = pos(nu[k] - beta * (b[k] / a_ratio2 - pt[k]));

        weight += beta;
        const double mix = beta / weight;
        for (std::size_t k = 0; k < n; ++k) {
            avg.dl_shares[k] += mix * (tau[k] - avg.dl_shares[k]);
            avg.dc_energy[k] += mix * (b[k] - avg.dc_energy[k]);
            avg.power_time_products[k] += mix * (pt[k] - avg.power_time_products[k]);
        }
        double obj = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            obj += rate_term(std::fmax(avg.dl_shares[k], 0.0),
                             in.dl_coefficient(k) * std::fmax(avg.power_time_products[k], 0.0));
        if (t > 100 && std::abs(obj - prev_obj) <= o.relative_tolerance * std::fmax(std::abs(obj), 1e-300)) {
            out.converged = true;
            break;
        }
        prev_obj = obj;
    }
    // Uplink shares for the resulting b: the optimal TDMA split.
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k)
        y[k] = in.ul_coefficient(k) * std::fmax(in.dc_energy_cap() - avg.dc_energy[k], 0.0);
    double ys = std::accumulate(y.begin(), y.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) avg.ul_shares[k] = ys > 0.0 ? y[k] / ys : 1.0 / static_cast<double>(n);
    out.vars = std::move(avg);
    out.iterations = std::min(t, o.max_iterations);
    return out;
}

/// Uplink: tau^ul from the exact dual bisection for fixed b, then b from
/// the stationarity closed form for fixed tau^ul,
///     b_k = [a^2 + tau_k / gbar_k - tau_k / (ln2 C_k)] clamped to [0, a^2],
/// C_k = c + sum_{i != k} mu_i. The uplink objective does not involve
/// (tau^dl, Pt), so those enter only through aggregate limits on sum b:
/// p_max A^2 / (1 + A^2) <= sum b <= min(p_max, I_max^2). The aggregate price c
/// is set by bisection on those limits; harvest prices mu take projected
/// subgradient steps in units of the largest marginal uplink rate.
inline SchemeIterate ul_dual_scheme(const SliptInstance& in, const SchemeOptions& o) {
    const std::size_t n = in.size();
    const double a2 = in.dc_energy_cap();
    const double a_ratio2 = in.peak_amplitude_ratio * in.peak_amplitude_ratio;
    const double lower = in.max_led_power * a_ratio2 / (1.0 + a_ratio2);
    const double upper = std::fmin(in.max_led_power, in.max_dc_offset * in.max_dc_offset);
    std::vector<double> floor(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        floor[k] = n > 1 ? std::fmin(in.harvest_floor(k), 1e300) : 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) scale = std::fmax(scale, in.ul_coefficient(k) / kLn2);
    if (!(scale > 0.0)) scale = 1.0;

    std::vector<double> b(n, in.max_led_power / (2.0 * static_cast<double>(n)));
    std::vector<double> tau(n, 1.0 / static_cast<double>(n));
    std::vector<double> mu(n, 0.0);

    auto b_for_price = [&](double c, std::vector<double>& out) {
        const double mu_sum = std::accumulate(mu.begin(), mu.end(), 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double ck = c + scale * (mu_sum - mu[k]);
            const double gbar = in.ul_coefficient(k);
            if (ck <= 0.0) {
                out[k] = 0.0;
            } else if (gbar <= 0.0 || tau[k] <= 0.0) {
                out[k] = a2;  // b costs this user nothing
            } else {
                out[k] = clamp(a2 + tau[k] / gbar - tau[k] / (kLn2 * ck), 0.0, a2);
            }
            s += out[k];
        }
        return s;
    };
    auto solve_price = [&](double target, double lo, double hi) {
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::fmax(std::abs(hi), 1e-300); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (b_for_price(mid, b) < target) lo = mid;
            else hi = mid;
        }
        b_for_price(hi, b);
    };

    double prev_obj = -1.0;
    SchemeIterate out;
    int t = 1;
    for (; t <= o.max_iterations; ++t) {
        const double beta = step_size(o, t);
        wpcn::WpcnInstance w;
        w.vlc_gain.assign(n, 1.0);
        w.rf_power_gain.resize(n);
        w.harvest_efficiency = 1.0;
        w.max_led_power = 1.0;
        w.rf_noise_power = 1.0;
        for (std::size_t k = 0; k < n; ++k) w.rf_power_gain[k] = in.ul_coefficient(k) * pos(a2 - b[k]);
        tau = wpcn::solve_time_allocation(w).time_shares;

        const double s0 = b_for_price(0.0, b);
        if (s0 < lower) {
            double hi = scale;
            while (b_for_price(hi, b) < lower && hi < 1e300) hi *= 2.0;
            solve_price(lower, 0.0, hi);
        } else if (s0 > upper) {
            const double mu_sum = std::accumulate(mu.begin(), mu.end(), 0.0);
            solve_price(upper, -scale * mu_sum, 0.0);
        }

        const double sb = std::accumulate(b.begin(), b.end(), 0.0);
        double harvest_violation = 0.0;
        if (n > 1)
            for (std::size_t k = 0; k < n; ++k) {
                const double residual = (sb - b[k]) - floor[k];
                harvest_violation = std::fmax(harvest_violation, -residual);
                mu[k] = pos(mu[k] - beta * residual);
            }
        double obj = 0.0;
        for (std::size_t k = 0; k < n; ++k) obj += rate_term(tau[k], in.ul_coefficient(k) * pos(a2 - b[k]));
        if (t > 1 && harvest_violation <= 1e-9 * std::fmax(1.0, a2) &&
            std::abs(obj - prev_obj) <= o.relative_tolerance * std::fmax(std::abs(obj), 1e-300)) {
            out.converged = true;
            break;
        }
        prev_obj = obj;
    }
    SubstitutedVars v;
    v.dc_energy = b;
    v.ul_shares = tau;
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    v.dl_shares.resize(n);
    v.power_time_products.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // tau^dl proportional to b; the remaining budget goes to Pt in proportion.
        v.dl_shares[k] = sb > 0.0 ? b[k] / sb : 1.0 / static_cast<double>(n);
        v.power_time_products[k] = sb > 0.0 ? b[k] * (in.max_led_power - sb) / sb : 0.0;
    }
    out.vars = std::move(v);
    out.iterations = std::min(t, o.max_iterations);
    return out;
}

inline SchemeReport compare_scheme(const SliptInstance& in, const SchemeIterate& it, double scheme_obj,
                                   double reference_obj) {
    SchemeReport rep;
    rep.ran = true;
    rep.converged = it.converged;
    rep.iterations = it.iterations;
    rep.objective = scheme_obj;
    rep.max_violation = check_constraints(in, it.vars).max_violation;
    rep.relative_gap = std::abs(scheme_obj - reference_obj) / std::fmax(std::abs(reference_obj), 1e-300);
    rep.agrees = rep.relative_gap <= 1e-3 && rep.max_violation <= 1e-5;
    return rep;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public solvers
// ---------------------------------------------------------------------------

/// Downlink sum-rate maximum. The certified interior-point optimum is
/// returned; ties in the downlink optimum are broken by the best uplink rate.
/// The closed-form dual iteration runs alongside and its agreement is
/// reported in `scheme`.
inline SliptSolution solve_dl_max(const SliptModel& model, const SliptOptions& opt = {}) {
    if (!model.feasible()) return detail::infeasible_solution(model);
    auto [best, sol] = detail::lexicographic(model, 1.0, 0.0, 0.0);
    if (opt.run_dual_scheme) {
        const auto it = detail::dl_dual_scheme(model.instance(), opt.scheme);
        double obj = 0.0;
        for (std::size_t k = 0; k < model.instance().size(); ++k)
            obj += rate_term(std::fmax(it.vars.dl_shares[k], 0.0),
                             model.instance().dl_coefficient(k) * std::fmax(it.vars.power_time_products[k], 0.0));
        sol.scheme = detail::compare_scheme(model.instance(), it, obj, best);
        sol.fallback_warning = !sol.scheme.agrees;
    }
    return sol;
}

inline SliptSolution solve_dl_max(const SliptInstance& inst, const SliptOptions& opt = {}) {
    return solve_dl_max(SliptModel(inst, opt.barrier), opt);
}

/// Penalized downlink problem: DL + alpha sum ln(1 + b_k). Returns the
/// solution whose dl_sum_rate is the downlink part of the optimum.
inline SliptSolution solve_dl_penalized(const SliptModel& model, double alpha) {
    if (!model.feasible()) return detail::infeasible_solution(model);
    convex::Problem p = model.base_problem(false);
    p.objective = model.combined(1.0, 0.0, alpha);
    const auto r = convex::maximize(p, model.interior_point(), model.barrier_options());
    return detail::package(model, p, r, r.newton_iterations);
}

/// Uplink sum-rate maximum; ties broken by the best downlink rate. The
/// closed-form iteration is cross-checked as for the downlink.
inline SliptSolution solve_ul_max(const SliptModel& model, const SliptOptions& opt = {}) {
    if (!model.feasible()) return detail::infeasible_solution(model);
    auto [best, sol] = detail::lexicographic(model, 0.0, 1.0, 0.0);
    if (opt.run_dual_scheme) {
        const auto it = detail::ul_dual_scheme(model.instance(), opt.scheme);
        double obj = 0.0;
        try {
            obj = ul_sum_rate(model.instance(), it.vars);
        } catch (const InfeasibleError&) {
            obj = 0.0;
        }
        sol.scheme = detail::compare_scheme(model.instance(), it, obj, best);
        sol.fallback_warning = !sol.scheme.agrees;
    }
    return sol;
}

inline SliptSolution solve_ul_max(const SliptInstance& inst, const SliptOptions& opt = {}) {
    return solve_ul_max(SliptModel(inst, opt.barrier), opt);
}

/// Objective optima as minimizations: (G1*, G2*) = (-max DL, -max UL).
struct UtopiaPoints {
    double g1 = 0.0;
    double g2 = 0.0;
};

inline UtopiaPoints utopia_points(const SliptModel& model) {
    if (!model.feasible()) throw InfeasibleError(model.infeasibility_reason());
    SliptOptions quiet;
    quiet.run_dual_scheme = false;
    quiet.barrier = model.barrier_options();
    const auto dl = solve_dl_max(model, quiet);
    const auto ul = solve_ul_max(model, quiet);
    return {-dl.dl_sum_rate, -ul.ul_sum_rate};
}

/// Weighted Tchebycheff point: min t s.t. lambda_i (G_i - G_i*) <= t over the
/// feasible set, solved as a joint barrier problem in (x, t). A zero weight
/// drops that epigraph constraint. A second pass maximizes the normalized rate
/// sum without raising t, which removes weakly dominated solutions.
inline ParetoPoint solve_moop_point(const SliptModel& model, double weight_dl, double weight_ul,
                                    const UtopiaPoints& utopia) {
    if (!(weight_dl >= 0.0 && weight_ul >= 0.0) || std::abs(weight_dl + weight_ul - 1.0) > 1e-9)
        throw std::invalid_argument("solve_moop_point: weights must be nonnegative and sum to 1");
    if (!model.feasible()) throw InfeasibleError(model.infeasibility_reason());
    const double best_dl = -utopia.g1;
    const double best_ul = -utopia.g2;
    const Eigen::Index n = model.layout().size();

    auto rate_constraint = [&model, n](double weight, bool dl, double best, double t_coeff, double offset) {
        convex::SmoothConcave r = dl ? model.combined(1.0, 0.0) : model.combined(0.0, 1.0);
        convex::SmoothConcave c;
        c.value = [r, weight, best, t_coeff, offset, n](const Vector& x) {
            const double t = t_coeff != 0.0 ? x[n] : 0.0;
            return t_coeff * t + offset + weight * (r.value(x) - best);
        };
        c.derivatives = [r, weight, t_coeff, n](const Vector& x, Vector& g, Matrix& h) {
            r.derivatives(x, g, h);
            g *= weight;
            h *= weight;
            if (t_coeff != 0.0 && g.size() > n) g[n] = t_coeff;
        };
        return c;
    };

    // Stage 1 over (x, t).
    convex::Problem p1 = model.base_problem(true);
    Vector obj = Vector::Zero(n + 1);
    obj[n] = -1.0;
    p1.objective = convex::linear_function(obj);
    Vector start(n + 1);
    start.head(n) = model.interior_point();
    double t0 = 0.0;
    const double dl0 = model.dl_rate(model.interior_point());
    const double ul0 = model.ul_rate(model.interior_point());
    if (weight_dl > 0.0) {
        p1.concave_constraints.push_back(rate_constraint(weight_dl, true, best_dl, 1.0, 0.0));
        t0 = std::fmax(t0, weight_dl * (best_dl - dl0));
    }
    if (weight_ul > 0.0) {
        p1.concave_constraints.push_back(rate_constraint(weight_ul, false, best_ul, 1.0, 0.0));
        t0 = std::fmax(t0, weight_ul * (best_ul - ul0));
    }
    start[n] = t0 + 1.0 + std::abs(t0);
    const auto r1 = convex::maximize(p1, start, model.barrier_options());
    const double t_star = r1.x[n];

    // Stage 2 over x: keep every weighted gap below t* + eps.
    convex::Problem p2 = model.base_problem(false);
    const double s_dl = std::fmax(std::abs(best_dl), 1e-300);
    const double s_ul = std::fmax(std::abs(best_ul), 1e-300);
    p2.objective = model.combined(best_dl > 0.0 ? 1.0 / s_dl : 0.0, best_ul > 0.0 ? 1.0 / s_ul : 0.0);
    const double eps = 1e-9 * (weight_dl * std::abs(best_dl) + weight_ul * std::abs(best_ul)) + 1e-300;
    if (weight_dl > 0.0) p2.concave_constraints.push_back(rate_constraint(weight_dl, true, best_dl, 0.0, t_star + eps));
    if (weight_ul > 0.0) p2.concave_constraints.push_back(rate_constraint(weight_ul, false, best_ul, 0.0, t_star + eps));
    const Vector x1 = r1.x.head(n);
    const auto r2 = convex::maximize(p2, x1, model.barrier_options());

    ParetoPoint pt;
    pt.weight_dl = weight_dl;
    pt.weight_ul = weight_ul;
    pt.vars = model.unpack(r2.x);
    pt.dl_sum_rate = model.dl_rate(r2.x);
    pt.ul_sum_rate = model.ul_rate(r2.x);
    pt.epigraph_t = t_star;
    pt.converged = r1.status == convex::Status::Optimal && r2.status == convex::Status::Optimal;
    return pt;
}

inline bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
    return a.dl_sum_rate >= b.dl_sum_rate && a.ul_sum_rate >= b.ul_sum_rate &&
           (a.dl_sum_rate > b.dl_sum_rate || a.ul_sum_rate > b.ul_sum_rate);
}

/// Drops dominated points (and exact duplicates), sorted by DL rate.
inline std::vector<ParetoPoint> nondominated(std::vector<ParetoPoint> pts) {
    std::vector<ParetoPoint> keep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j) continue;
            if (dominates(pts[j], pts[i])) dominated = true;
            // Identical rate pairs: keep the first.
            if (j < i && pts[j].dl_sum_rate == pts[i].dl_sum_rate && pts[j].ul_sum_rate == pts[i].ul_sum_rate)
                dominated = true;
        }
        if (!dominated) keep.push_back(pts[i]);
    }
    std::stable_sort(keep.begin(), keep.end(),
                     [](const ParetoPoint& a, const ParetoPoint& b) { return a.dl_sum_rate < b.dl_sum_rate; });
    return keep;
}

/// Raw Tchebycheff points for weights lambda_1 = j / (n - 1), j = 0..n-1,
/// in weight order and unfiltered.
inline std::vector<ParetoPoint> tchebycheff_sweep(const SliptModel& model, std::size_t n_points) {
    if (n_points < 2) throw std::invalid_argument("pareto_front: need at least two points");
    const auto utopia = utopia_points(model);
    std::vector<ParetoPoint> pts;
    pts.reserve(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
        const double w = static_cast<double>(j) / static_cast<double>(n_points - 1);
        pts.push_back(solve_moop_point(model, w, 1.0 - w, utopia));
    }
    return pts;
}

inline std::vector<ParetoPoint> pareto_front(const SliptModel& model, std::size_t n_points) {
    return nondominated(tchebycheff_sweep(model, n_points));
}

inline std::vector<ParetoPoint> pareto_front(const SliptInstance& inst, std::size_t n_points) {
    return pareto_front(SliptModel(inst), n_points);
}

/// True when every point of `front` is weakly dominated by the region
/// under `other`: the down-closure of the piecewise-linear hull through its
/// points. For a convex feasible set with concave rates that region is
/// achievable, so this is a sound test of trade-off region inclusion.
inline bool region_contains(const std::vector<ParetoPoint>& other, const std::vector<ParetoPoint>& front,
                            double rel_tol = 1e-9) {
    auto sorted = nondominated(other);
    if (sorted.empty()) return front.empty();
    auto max_ul_at = [&sorted](double dl) {
        // Upper boundary of the down-closed hull at the given DL rate.
        if (dl > sorted.back().dl_sum_rate) return -std::numeric_limits<double>::infinity();
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : sorted)
            if (p.dl_sum_rate >= dl) best = std::fmax(best, p.ul_sum_rate);
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            const auto& l = sorted[i];
            const auto& r = sorted[i + 1];
            if (dl >= l.dl_sum_rate && dl <= r.dl_sum_rate && r.dl_sum_rate > l.dl_sum_rate) {
                const double f = (dl - l.dl_sum_rate) / (r.dl_sum_rate - l.dl_sum_rate);
                best = std::fmax(best, l.ul_sum_rate + f * (r.ul_sum_rate - l.ul_sum_rate));
            }
        }
        return best;
    };
    for (const auto& p : front) {
        const double tol_dl = rel_tol * std::fmax(std::abs(p.dl_sum_rate), 1e-300);
        const double tol_ul = rel_tol * std::fmax(std::abs(p.ul_sum_rate), 1e-300);
        if (max_ul_at(std::fmax(p.dl_sum_rate - tol_dl, 0.0)) < p.ul_sum_rate - tol_ul) return false;
    }
    return true;
}


/// Largest downlink rate with the uplink rate held at or above `ul_floor`,
/// or nullopt when no allocation reaches the floor.
inline std::optional<double> max_dl_with_ul_floor(const SliptModel& model, double ul_floor) {
    if (!model.feasible()) return std::nullopt;
    SliptOptions quiet;
    quiet.run_dual_scheme = false;
    quiet.barrier = model.barrier_options();
    const auto ul = solve_ul_max(model, quiet);
    if (ul.status != SolveStatus::Optimal || ul.ul_sum_rate < ul_floor) return std::nullopt;
    const Vector& inner = model.interior_point();
    const double ul_inner = model.ul_rate(inner);
    if (ul_floor <= ul_inner) {
        const auto dl = solve_dl_max(model, quiet);
        if (dl.ul_sum_rate >= ul_floor) return dl.dl_sum_rate;
    }
    if (ul.ul_sum_rate - ul_floor <= 1e-12 * std::fmax(std::abs(ul.ul_sum_rate), 1e-300)) return ul.dl_sum_rate;

    const auto& L = model.layout();
    Vector x_ul(L.size());
    for (std::size_t k = 0; k < model.instance().size(); ++k) {
        x_ul[L.dl(k)] = ul.vars.dl_shares[k];
        x_ul[L.ul(k)] = ul.vars.ul_shares[k];
        x_ul[L.b(k)] = ul.vars.dc_energy[k];
        x_ul[L.p(k)] = ul.vars.power_time_products[k];
    }
    // Concavity keeps UL above the floor along the segment to the uplink
    // optimum; stop halfway between the floor and the optimum.
    double theta = 1.0;
    if (ul.ul_sum_rate > ul_inner)
        theta = std::fmin(1.0 - 0.5 * (ul.ul_sum_rate - ul_floor) / (ul.ul_sum_rate - ul_inner), 1.0 - 1e-12);
    theta = std::fmax(theta, 0.0);
    const Vector start = theta * x_ul + (1.0 - theta) * inner;

    convex::Problem p = model.base_problem(false);
    p.objective = model.combined(1.0, 0.0);
    const convex::SmoothConcave ul_rate = model.combined(0.0, 1.0);
    convex::SmoothConcave floor;
    floor.value = [ul_rate, ul_floor](const Vector& x) { return ul_rate.value(x) - ul_floor; };
    floor.derivatives = ul_rate.derivatives;
    p.concave_constraints.push_back(floor);
    if (!std::isfinite(convex::detail::barrier_value(p, start, 1.0))) return ul.dl_sum_rate;
    const auto r = convex::maximize(p, start, model.barrier_options());
    return std::fmax(r.objective, ul.dl_sum_rate);
}

/// True when the trade-off region of `bigger` contains every point of
/// `front`, up to `rel_tol` in each rate. Exact test: one constrained solve
/// per point.
inline bool frontier_contains(const SliptModel& bigger, const std::vector<ParetoPoint>& front,
                              double rel_tol = 1e-6) {
    for (const auto& p : front) {
        const double floor = p.ul_sum_rate - rel_tol * std::abs(p.ul_sum_rate);
        const auto dl = max_dl_with_ul_floor(bigger, floor);
        if (!dl || *dl < p.dl_sum_rate - rel_tol * std::abs(p.dl_sum_rate)) return false;
    }
    return true;
}

}  // namespace lightharvest::slipt

#endif  // LIGHTHARVEST_SLIPT_HPP
