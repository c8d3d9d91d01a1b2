// Property and oracle checks shared by `validate` and the acceptance binary.
// Every check returns a CheckResult with the worst observed value, so a
// failure names the property and how far off it was.
#ifndef LIGHTHARVEST_VALIDATION_HPP
#define LIGHTHARVEST_VALIDATION_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lightharvest/config.hpp"
#include "lightharvest/experiments.hpp"
#include "lightharvest/kernels.hpp"
#include "lightharvest/oracles.hpp"
#include "lightharvest/slipt.hpp"
#include "lightharvest/wpcn.hpp"

namespace lightharvest::validation {

struct CheckResult {
    std::string id;    // "1", "7c", ...
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

enum class Scale { Small, Full };

inline Scale parse_scale(const std::string& s) {
    if (s == "small") return Scale::Small;
    if (s == "full") return Scale::Full;
    throw std::invalid_argument("unknown scale '" + s + "' (expected small or full)");
}

struct SuiteOptions {
    std::size_t a_oracle_instances = 20;
    double a_oracle_step = 1e-5;
    double a_oracle_time_limit = 10.0;  // seconds
    std::size_t stationarity_instances = 500;
    std::size_t dominance_drops = 500;
    std::size_t trend_drops = 500;
    double trend_time_limit = 300.0;
    std::size_t b_oracle_instances = 10;
    double b_oracle_time_limit = 300.0;
    oracles::GridOptions grid;
    std::size_t tightness_instances = 20;
    std::size_t pareto_drops = 5;
    std::size_t determinism_drops = 20;
    unsigned jobs = 1;

    static SuiteOptions for_scale(Scale s) {
        SuiteOptions o;
        if (s == Scale::Small) {
            o.trend_drops = 50;
            o.b_oracle_instances = 2;
            o.tightness_instances = 6;
            o.pareto_drops = 1;
            o.determinism_drops = 5;
        }
        return o;
    }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

inline std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

inline double rel_diff(double a, double b, double floor = 1e-300) {
    return std::abs(a - b) / std::fmax(std::abs(b), floor);
}

/// Runs `body`, timing it and turning exceptions into a failed result.
inline CheckResult run_check(std::string id, std::string name, const std::function<void(CheckResult&)>& body) {
    CheckResult r;
    r.id = std::move(id);
    r.name = std::move(name);
    const auto t0 = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = since(t0);
    return r;
}

inline slipt::SliptOptions quiet(const SystemConfig& cfg) { return cfg.slipt_options(false); }

}  // namespace detail

/// Uplink allocation vs exhaustive simplex search on two-user drops.
inline CheckResult scenario_a_oracle(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("1", "uplink allocation matches simplex grid search", [&](CheckResult& r) {
        const auto t0 = detail::Clock::now();
        double worst = 0.0;
        const double energy = cfg.dc_offset * cfg.dc_offset;
        for (std::size_t d = 0; d < o.a_oracle_instances; ++d) {
            const auto inst = cfg.wpcn_instance(draw_channels(cfg, cfg.seed, d, 2), energy);
            const auto sol = wpcn::solve_time_allocation(inst, wpcn::DualBackend::Bisection, cfg.tolerance);
            const auto ref = wpcn::brute_force_oracle(inst, o.a_oracle_step);
            worst = std::fmax(worst, detail::rel_diff(sol.sum_rate, ref.sum_rate));
        }
        const double secs = detail::since(t0);
        r.passed = worst <= 1e-3 && secs < o.a_oracle_time_limit;
        r.detail = std::to_string(o.a_oracle_instances) + " instances, worst relative gap " + detail::sci(worst) +
                   " (limit 1e-3), " + detail::sci(secs) + " s (limit " + detail::sci(o.a_oracle_time_limit) + " s)";
    });
}

/// Time shares fill the frame and every interior share is stationary.
inline CheckResult uplink_stationarity(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("2", "uplink shares sum to one and satisfy stationarity", [&](CheckResult& r) {
        double worst_sum = 0.0;
        double worst_kkt = 0.0;
        std::size_t interior = 0;
        for (std::size_t d = 0; d < o.stationarity_instances; ++d) {
            const std::size_t k_users = 1 + d % 8;
            const double a = cfg.dc_offset * (0.1 + 0.9 * static_cast<double>(d % 10) / 9.0);
            const auto inst = cfg.wpcn_instance(draw_channels(cfg, cfg.seed + 7, d, k_users), a * a);
            const auto sol = wpcn::solve_time_allocation(inst, wpcn::DualBackend::Bisection, cfg.tolerance);
            double s = 0.0;
            for (double t : sol.time_shares) s += t;
            worst_sum = std::fmax(worst_sum, std::abs(s - 1.0));
            const auto y = inst.snr_coefficients();
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double t = sol.time_shares[k];
                if (!(t > 0.0 && t < 1.0)) continue;
                ++interior;
                worst_kkt = std::fmax(worst_kkt, std::abs(wpcn::stationarity_residual(t, y[k], sol.dual_lambda)));
            }
        }
        r.passed = worst_sum <= 1e-6 && worst_kkt <= 1e-6;
        r.detail = std::to_string(o.stationarity_instances) + " instances, max |sum tau - 1| " +
                   detail::sci(worst_sum) + ", max stationarity residual " + detail::sci(worst_kkt) + " over " +
                   std::to_string(interior) + " interior shares (limits 1e-6)";
    });
}

/// Optimal allocation never loses to equal time, and wins when the users'
/// effective SNRs differ.
inline CheckResult baseline_dominance(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("3", "optimal allocation dominates equal time per drop", [&](CheckResult& r) {
        std::size_t cases = 0, weak_fail = 0, strict_cases = 0, strict_fail = 0;
        const double energy = cfg.dc_offset * cfg.dc_offset;
        for (std::size_t d = 0; d < o.dominance_drops; ++d)
            for (std::size_t k_users : {2u, 4u, 6u}) {
                const auto inst = cfg.wpcn_instance(draw_channels(cfg, cfg.seed, d, k_users), energy);
                const auto opt = wpcn::solve_time_allocation(inst, wpcn::DualBackend::Bisection, cfg.tolerance);
                const auto base = wpcn::equal_time_baseline(inst);
                ++cases;
                if (opt.sum_rate < base.sum_rate * (1.0 - 1e-12)) ++weak_fail;
                const auto y = inst.snr_coefficients();
                const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
                if (*hi > *lo * (1.0 + 1e-6)) {
                    ++strict_cases;
                    if (!(opt.sum_rate > base.sum_rate)) ++strict_fail;
                }
            }
        r.passed = weak_fail == 0 && strict_fail == 0;
        r.detail = std::to_string(o.dominance_drops) + " drops x K in {2,4,6}: " + std::to_string(weak_fail) + "/" +
                   std::to_string(cases) + " below baseline, " + std::to_string(strict_fail) + "/" +
                   std::to_string(strict_cases) + " not strictly above with distinct gains";
    });
}

/// Mean-curve trends of the three uplink sweeps.
inline CheckResult trend_suite(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("4", "uplink sum-rate trends over the default sweeps", [&](CheckResult& r) {
        const auto t0 = detail::Clock::now();
        std::string failures;
        auto check = [&](experiments::ExperimentId id, int direction) {
            auto spec = experiments::default_spec(id, cfg);
            spec.n_drops = o.trend_drops;
            spec.jobs = o.jobs;
            const auto res = experiments::run(spec);
            for (const auto& s : experiments::series_names(res))
                if (!experiments::monotone(experiments::curve(res, s, "optimal", "ul_sum_rate"), direction))
                    failures += std::string(" ") + experiments::to_string(id) + "[" + s + "]";
        };
        check(experiments::ExperimentId::Fig4, +1);
        check(experiments::ExperimentId::Fig5, +1);
        check(experiments::ExperimentId::Fig6, -1);
        const double secs = detail::since(t0);
        r.passed = failures.empty() && secs < o.trend_time_limit;
        r.detail = std::to_string(o.trend_drops) + " drops; nondecreasing in a and K, nonincreasing in semi-angle: " +
                   (failures.empty() ? std::string("all series hold") : "violated by" + failures) + ", " +
                   detail::sci(secs) + " s";
    });
}

/// Downlink, uplink and Tchebycheff solves vs the two-user grid oracle.
inline CheckResult scenario_b_oracle(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("5", "SLIPT solvers match exhaustive grid search", [&](CheckResult& r) {
        const auto t0 = detail::Clock::now();
        double worst_dl = 0.0, worst_ul = 0.0, worst_t = 0.0, worst_viol = 0.0;
        bool all_optimal = true;
        for (std::size_t d = 0; d < o.b_oracle_instances; ++d) {
            const auto inst = cfg.slipt_instance(draw_channels(cfg, cfg.seed, d, 2));
            const slipt::SliptModel model(inst, cfg.barrier_options());
            if (!model.feasible()) throw std::runtime_error("oracle instance infeasible: " + model.infeasibility_reason());
            const auto dl = slipt::solve_dl_max(model, detail::quiet(cfg));
            const auto ul = slipt::solve_ul_max(model, detail::quiet(cfg));
            all_optimal = all_optimal && dl.status == slipt::SolveStatus::Optimal &&
                          ul.status == slipt::SolveStatus::Optimal;
            const slipt::UtopiaPoints utopia{-dl.dl_sum_rate, -ul.ul_sum_rate};
            const auto mo = slipt::solve_moop_point(model, 0.5, 0.5, utopia);
            all_optimal = all_optimal && mo.converged;
            for (const auto* v : {&dl.vars, &ul.vars, &mo.vars})
                worst_viol = std::fmax(worst_viol, slipt::check_constraints(inst, *v).max_violation);
            const double t_solver = std::fmax(0.5 * (dl.dl_sum_rate - mo.dl_sum_rate), 0.5 * (ul.ul_sum_rate - mo.ul_sum_rate));

            const auto odl = oracles::dl_max(inst, o.grid);
            const auto oul = oracles::ul_max(inst, o.grid);
            const auto ot = oracles::tchebycheff(inst, 0.5, 0.5, dl.dl_sum_rate, ul.ul_sum_rate, o.grid);
            worst_dl = std::fmax(worst_dl, detail::rel_diff(dl.dl_sum_rate, odl.value));
            worst_ul = std::fmax(worst_ul, detail::rel_diff(ul.ul_sum_rate, oul.value));
            const double t_floor = 1e-9 * 0.5 * (dl.dl_sum_rate + ul.ul_sum_rate);
            worst_t = std::fmax(worst_t, detail::rel_diff(t_solver, ot.value, t_floor));
        }
        const double secs = detail::since(t0);
        r.passed = all_optimal && worst_dl <= 0.02 && worst_ul <= 0.02 && worst_t <= 0.02 && worst_viol <= 1e-6 &&
                   secs < o.b_oracle_time_limit;
        r.detail = std::to_string(o.b_oracle_instances) + " instances, worst relative gap DL " + detail::sci(worst_dl) +
                   ", UL " + detail::sci(worst_ul) + ", Tchebycheff " + detail::sci(worst_t) +
                   " (limit 2e-2); max violation " + detail::sci(worst_viol) + (all_optimal ? "" : "; solver not converged") +
                   ", " + detail::sci(secs) + " s";
    });
}

/// Coupling constraints tight and complementary slackness at the optima.
inline CheckResult constraint_tightness(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("6", "coupling constraints tight, complementary slackness holds", [&](CheckResult& r) {
        double worst_eq = 0.0, worst_cs = 0.0, worst_kkt = 0.0;
        std::size_t solved = 0;
        bool all_optimal = true;
        for (std::size_t d = 0; d < o.tightness_instances; ++d) {
            const std::size_t k_users = 2 + d % 3;
            const auto inst = cfg.slipt_instance(draw_channels(cfg, cfg.seed + 11, d, k_users));
            const slipt::SliptModel model(inst, cfg.barrier_options());
            if (!model.feasible()) continue;
            for (const auto& sol : {slipt::solve_dl_max(model, detail::quiet(cfg)),
                                    slipt::solve_ul_max(model, detail::quiet(cfg))}) {
                ++solved;
                all_optimal = all_optimal && sol.status == slipt::SolveStatus::Optimal;
                const auto rep = slipt::check_constraints(inst, sol.vars);
                worst_eq = std::max({worst_eq, rep.dl_share_residual, rep.ul_share_residual, rep.power_residual});
                worst_cs = std::fmax(worst_cs, sol.max_complementarity);
                worst_kkt = std::fmax(worst_kkt, sol.kkt_residual);
            }
        }
        // Stationarity is reported only: the perspective rate has no gradient
        // at a slot that shuts off (tau = Pt = 0).
        r.passed = solved > 0 && all_optimal && worst_eq <= 1e-6 && worst_cs <= 1e-4;
        r.detail = std::to_string(solved) + " solves, max equality residual " + detail::sci(worst_eq) +
                   " (limit 1e-6), max complementarity " + detail::sci(worst_cs) + " (limit 1e-4), max KKT residual " +
                   detail::sci(worst_kkt) + " (not gated)" + (all_optimal ? "" : "; solver not converged");
    });
}

/// Trade-off front properties, split into the four claims.
struct ParetoChecks {
    CheckResult nondominated;
    CheckResult corners;
    CheckResult doubled_power;
    CheckResult more_users;
};

inline ParetoChecks pareto_properties(const SystemConfig& cfg, const SuiteOptions& o) {
    const std::vector<std::size_t> users{2, 4};
    const std::vector<double> powers{cfg.p_max / 2.0, cfg.p_max};
    const std::size_t n_points = static_cast<std::size_t>(cfg.pareto_points);

    ParetoChecks out;
    std::size_t fronts = 0, dominated_pairs = 0, corner_fail = 0, power_fail = 0, user_fail = 0;
    double worst_corner = 0.0;
    std::string error;
    const auto t0 = detail::Clock::now();
    try {
        for (std::size_t d = 0; d < o.pareto_drops; ++d) {
            std::vector<std::vector<std::unique_ptr<slipt::SliptModel>>> models(users.size());
            std::vector<std::vector<std::vector<slipt::ParetoPoint>>> sweeps(users.size());
            for (std::size_t ki = 0; ki < users.size(); ++ki)
                for (double p : powers) {
                    SystemConfig c = cfg;
                    c.p_max = p;
                    auto m = std::make_unique<slipt::SliptModel>(c.slipt_instance(draw_channels(c, cfg.seed, d, users[ki])),
                                                                 c.barrier_options());
                    if (!m->feasible()) throw std::runtime_error("pareto drop infeasible: " + m->infeasibility_reason());
                    const auto utopia = slipt::utopia_points(*m);
                    auto sweep = slipt::tchebycheff_sweep(*m, n_points);
                    ++fronts;
                    // Within a front no point may be at least as good in both
                    // rates (up to solver noise, 1e-9) and better by 1e-6 in one.
                    for (const auto& a : sweep)
                        for (const auto& b : sweep) {
                            const double ndl = 1e-9 * std::abs(b.dl_sum_rate), nul = 1e-9 * std::abs(b.ul_sum_rate);
                            const double tdl = 1e-6 * std::abs(b.dl_sum_rate), tul = 1e-6 * std::abs(b.ul_sum_rate);
                            if (a.dl_sum_rate >= b.dl_sum_rate - ndl && a.ul_sum_rate >= b.ul_sum_rate - nul &&
                                (a.dl_sum_rate > b.dl_sum_rate + tdl || a.ul_sum_rate > b.ul_sum_rate + tul))
                                ++dominated_pairs;
                        }
                    const double gdl = detail::rel_diff(sweep.back().dl_sum_rate, -utopia.g1);
                    const double gul = detail::rel_diff(sweep.front().ul_sum_rate, -utopia.g2);
                    worst_corner = std::max({worst_corner, gdl, gul});
                    if (gdl > 1e-3 || gul > 1e-3) ++corner_fail;
                    models[ki].push_back(std::move(m));
                    sweeps[ki].push_back(std::move(sweep));
                }
            for (std::size_t ki = 0; ki < users.size(); ++ki)
                if (!slipt::frontier_contains(*models[ki][1], sweeps[ki][0])) ++power_fail;
            for (std::size_t pi = 0; pi < powers.size(); ++pi)
                if (!slipt::frontier_contains(*models[1][pi], sweeps[0][pi])) ++user_fail;
        }
    } catch (const std::exception& e) {
        error = std::string("exception: ") + e.what();
    }
    const double secs = detail::since(t0);
    const std::string drops = std::to_string(o.pareto_drops) + " drops";
    auto fill = [&](CheckResult& r, std::string id, std::string name, bool ok, std::string detail) {
        r.id = std::move(id);
        r.name = std::move(name);
        r.passed = error.empty() && ok;
        r.detail = error.empty() ? std::move(detail) : error;
        r.seconds = secs;
    };
    fill(out.nondominated, "7a", "front points mutually nondominated", dominated_pairs == 0,
         drops + ", " + std::to_string(fronts) + " fronts, " + std::to_string(dominated_pairs) + " dominated pairs");
    fill(out.corners, "7b", "corner weights reproduce single-objective optima", corner_fail == 0,
         drops + ", worst relative corner gap " + detail::sci(worst_corner) + " (limit 1e-3)");
    fill(out.doubled_power, "7c", "doubled LED power budget enlarges the region", power_fail == 0,
         drops + ", " + std::to_string(power_fail) + "/" + std::to_string(o.pareto_drops * users.size()) +
             " fronts not contained in the doubled-budget region");
    fill(out.more_users, "7d", "more users enlarge the region", user_fail == 0,
         drops + ", " + std::to_string(user_fail) + "/" + std::to_string(o.pareto_drops * powers.size()) +
             " two-user fronts not contained in the four-user region");
    return out;
}

/// f_inverse round trip, perspective gradients, penalty insensitivity.
struct KernelChecks {
    CheckResult round_trip;
    CheckResult gradient;
    CheckResult penalty;
};

inline KernelChecks numerical_kernels(const SystemConfig& cfg, const SuiteOptions&) {
    KernelChecks out;
    out.round_trip = detail::run_check("8a", "f_inverse round trip", [&](CheckResult& r) {
        double worst = 0.0;
        const int n = 2001;
        for (int i = 0; i < n; ++i) {
            const double lambda = std::pow(10.0, -6.0 + 9.0 * i / (n - 1.0));
            worst = std::fmax(worst, std::abs(f_aux_excess(f_inverse_excess(lambda)) - lambda) / lambda);
        }
        r.passed = worst <= 1e-10;
        r.detail = std::to_string(n) + " log-spaced lambda in [1e-6, 1e3], worst relative error " + detail::sci(worst) +
                   " (limit 1e-10)";
    });
    out.gradient = detail::run_check("8b", "rate gradients match central differences", [&](CheckResult& r) {
        double worst = 0.0;
        std::size_t points = 0;
        for (std::size_t d = 0; d < 20; ++d) {
            const auto inst = cfg.slipt_instance(draw_channels(cfg, cfg.seed + 13, d, 2 + d % 3));
            const slipt::SliptModel model(inst, cfg.barrier_options());
            if (!model.feasible()) continue;
            const auto f = model.combined(1.0, 1.0);
            const convex::Vector& x = model.interior_point();
            const Eigen::Index n = x.size();
            convex::Vector g(n);
            convex::Matrix h(n, n);
            f.derivatives(x, g, h);
            convex::Vector fd(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double step = 1e-6 * std::fmax(std::abs(x[i]), 1e-3);
                convex::Vector xp = x, xm = x;
                xp[i] += step;
                xm[i] -= step;
                fd[i] = (f.value(xp) - f.value(xm)) / (2.0 * step);
            }
            worst = std::fmax(worst, (fd - g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff());
            ++points;
        }
        r.passed = points > 0 && worst <= 1e-5;
        r.detail = std::to_string(points) + " interior points, worst relative gradient error " + detail::sci(worst) +
                   " (limit 1e-5)";
    });
    out.penalty = detail::run_check("8c", "penalty weight barely moves the downlink optimum", [&](CheckResult& r) {
        double worst = 0.0;
        std::size_t solved = 0;
        for (std::size_t d = 0; d < 10; ++d) {
            const auto inst = cfg.slipt_instance(draw_channels(cfg, cfg.seed + 17, d, 2 + d % 3));
            const slipt::SliptModel model(inst, cfg.barrier_options());
            if (!model.feasible()) continue;
            std::vector<double> rates;
            for (double alpha : {1e-2, 1e-3, 1e-4}) {
                const auto sol = slipt::solve_dl_penalized(model, alpha);
                if (sol.status != slipt::SolveStatus::Optimal) throw std::runtime_error("penalized solve did not converge");
                rates.push_back(sol.dl_sum_rate);
            }
            const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
            worst = std::fmax(worst, (*hi - *lo) / *hi);
            ++solved;
        }
        r.passed = solved > 0 && worst < 5e-3;
        r.detail = std::to_string(solved) + " instances, alpha in {1e-2, 1e-3, 1e-4}, worst relative spread " +
                   detail::sci(worst) + " (limit 5e-3)";
    });
    return out;
}

/// Same seed, two runs (serial and threaded), identical CSV text.
inline CheckResult experiment_determinism(const SystemConfig& cfg, const SuiteOptions& o) {
    return detail::run_check("9", "experiment CSV reproducible under a fixed seed", [&](CheckResult& r) {
        auto spec = experiments::default_spec(experiments::ExperimentId::Fig4, cfg);
        spec.n_drops = o.determinism_drops;
        spec.jobs = 1;
        const std::string first = experiments::to_csv(experiments::run(spec));
        spec.jobs = std::max(2u, o.jobs);
        const std::string second = experiments::to_csv(experiments::run(spec));
        r.passed = first == second;
        r.detail = std::to_string(first.size()) + " bytes, " + (r.passed ? "identical" : "differ");
    });
}

/// Everything `validate` runs, in order.
inline std::vector<CheckResult> run_suite(const SystemConfig& cfg, const SuiteOptions& o,
                                          const std::function<void(const CheckResult&)>& on_result = {}) {
    std::vector<CheckResult> out;
    auto push = [&](CheckResult r) {
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    };
    push(scenario_a_oracle(cfg, o));
    push(uplink_stationarity(cfg, o));
    push(baseline_dominance(cfg, o));
    auto k = numerical_kernels(cfg, o);
    push(std::move(k.round_trip));
    push(std::move(k.gradient));
    push(std::move(k.penalty));
    push(constraint_tightness(cfg, o));
    push(scenario_b_oracle(cfg, o));
    push(experiment_determinism(cfg, o));
    push(trend_suite(cfg, o));
    return out;
}

}  // namespace lightharvest::validation

#endif  // LIGHTHARVEST_VALIDATION_HPP
