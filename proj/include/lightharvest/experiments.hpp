// Seeded Monte Carlo sweeps over random user drops.
//
// fig4  uplink sum-rate vs DC offset a (optimal vs equal time), per K
// fig5  uplink sum-rate vs number of users, per a
// fig6  uplink sum-rate vs LED semi-angle, per (K, a)
// fig7  averaged Tchebycheff front (DL and UL rate per weight), per (K, p_max)
//
// Drop d of user k always comes from substream(seed, d, k), so every grid
// point and every K reuses the same placements and fading draws.
#ifndef LIGHTHARVEST_EXPERIMENTS_HPP
#define LIGHTHARVEST_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lightharvest/config.hpp"
#include "lightharvest/csv.hpp"
#include "lightharvest/slipt.hpp"
#include "lightharvest/wpcn.hpp"

namespace lightharvest::experiments {

enum class ExperimentId { Fig4, Fig5, Fig6, Fig7 };

inline const char* to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Fig4: return "fig4";
        case ExperimentId::Fig5: return "fig5";
        case ExperimentId::Fig6: return "fig6";
        case ExperimentId::Fig7: return "fig7";
    }
    return "unknown";
}

inline ExperimentId parse_experiment_id(const std::string& s) {
    if (s == "fig4") return ExperimentId::Fig4;
    if (s == "fig5") return ExperimentId::Fig5;
    if (s == "fig6") return ExperimentId::Fig6;
    if (s == "fig7") return ExperimentId::Fig7;
    throw std::invalid_argument("unknown experiment id '" + s + "' (expected fig4, fig5, fig6 or fig7)");
}

struct ExperimentSpec {
    ExperimentId id = ExperimentId::Fig4;
    std::vector<double> grid;                 // sweep values; empty selects the default grid
    std::vector<int> users;                   // K series (fig4, fig6, fig7)
    std::vector<double> dc_offsets;           // a series (fig5, fig6)
    std::vector<double> max_powers;           // p_max series (fig7)
    SystemConfig config;
    std::size_t n_drops = 500;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

struct ResultRow {
    std::string series;   // e.g. "K=2" or "K=2,p_max=4"
    double sweep_value = 0.0;
    std::string scheme;   // optimal | equal_time | tchebycheff
    std::string metric;   // ul_sum_rate | dl_sum_rate
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;    // drops averaged
    std::size_t failed = 0;
};

struct ExperimentResult {
    ExperimentId id = ExperimentId::Fig4;
    std::string sweep_variable;
    std::vector<ResultRow> rows;
    std::size_t n_drops = 0;
    std::uint64_t seed = 0;
    std::size_t failed_drops = 0;  // drops excluded from at least one series
    std::size_t worst_series_failures = 0;
};

/// Raised when more than 1% of the drops of some series failed.
class ExperimentFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Default grids.
inline std::vector<double> default_grid(ExperimentId id, const SystemConfig& cfg) {
    std::vector<double> g;
    switch (id) {
        case ExperimentId::Fig4:
            for (int j = 1; j <= 10; ++j) g.push_back(j * std::sqrt(cfg.p_max) / 10.0);
            break;
        case ExperimentId::Fig5:
            for (int k = 1; k <= 8; ++k) g.push_back(k);
            break;
        case ExperimentId::Fig6:
            for (int d = 30; d <= 80; d += 10) g.push_back(d);
            break;
        case ExperimentId::Fig7:
            for (int j = 0; j <= 10; ++j) g.push_back(j / 10.0);
            break;
    }
    return g;
}

inline ExperimentSpec default_spec(ExperimentId id, const SystemConfig& cfg) {
    ExperimentSpec s;
    s.id = id;
    s.config = cfg;
    s.grid = default_grid(id, cfg);
    s.n_drops = static_cast<std::size_t>(cfg.n_drops);
    s.seed = cfg.seed;
    switch (id) {
        case ExperimentId::Fig4: s.users = {2, 4, 6}; break;
        case ExperimentId::Fig5: s.dc_offsets = {1.0, 2.0}; break;
        case ExperimentId::Fig6:
            s.users = {2, 4};
            s.dc_offsets = {1.0, 2.0};
            break;
        case ExperimentId::Fig7:
            s.users = {2, 4};
            s.max_powers = {2.0, 4.0};
            break;
    }
    return s;
}

namespace detail {

inline std::string fmt(double v) { return lightharvest::detail::format_double(v); }

/// Runs body(d) for d in [0, n) on `jobs` threads. Results are stored by the
/// body at index d, so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t d = 0; d < n; ++d) body(d);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t d = next.fetch_add(1);
                if (d >= n || failed.load()) return;
                try {
                    body(d);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Mean and standard error (n - 1 denominator) over the finite entries,
/// accumulated in drop order.
struct Summary {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline Summary summarize(const std::vector<std::optional<double>>& values) {
    Summary s;
    double sum = 0.0;
    for (const auto& v : values)
        if (v) {
            sum += *v;
            ++s.n;
        }
    if (s.n == 0) return s;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (const auto& v : values)
            if (v) ss += (*v - s.mean) * (*v - s.mean);
        s.stderr_ = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
    }
    return s;
}

inline ResultRow make_row(std::string series, double x, std::string scheme, std::string metric,
                          const std::vector<std::optional<double>>& values) {
    const auto s = summarize(values);
    ResultRow r;
    r.series = std::move(series);
    r.sweep_value = x;
    r.scheme = std::move(scheme);
    r.metric = std::move(metric);
    r.mean = s.mean;
    r.stderr_ = s.stderr_;
    r.n = s.n;
    r.failed = values.size() - s.n;
    return r;
}

/// Optimal and equal-time uplink sum-rate for one drop, or nullopt if the
/// solver fails.
struct UplinkPair {
    double optimal = 0.0;
    double baseline = 0.0;
};

inline std::optional<UplinkPair> uplink_rates(const SystemConfig& cfg, const ChannelRealization& ch,
                                              double energy) {
    try {
        const auto inst = cfg.wpcn_instance(ch, energy);
        const auto sol = wpcn::solve_time_allocation(inst, wpcn::DualBackend::Bisection, cfg.tolerance);
        const auto base = wpcn::equal_time_baseline(inst);
        if (!std::isfinite(sol.sum_rate) || !std::isfinite(base.sum_rate)) return std::nullopt;
        return UplinkPair{sol.sum_rate, base.sum_rate};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

/// Scenario A sweep where each drop yields (optimal, baseline) at every grid
/// point of every series.
inline void uplink_sweep(ExperimentResult& res, const ExperimentSpec& spec, const std::vector<std::string>& series,
                         const std::function<std::optional<UplinkPair>(std::size_t series, std::size_t point,
                                                                       std::size_t drop)>& evaluate) {
    const std::size_t ns = series.size();
    const std::size_t np = spec.grid.size();
    std::vector<std::vector<std::optional<UplinkPair>>> cells(ns * np,
                                                              std::vector<std::optional<UplinkPair>>(spec.n_drops));
    parallel_for(spec.n_drops, spec.jobs, [&](std::size_t d) {
        for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t p = 0; p < np; ++p) cells[s * np + p][d] = evaluate(s, p, d);
    });
    std::vector<bool> drop_failed(spec.n_drops, false);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t p = 0; p < np; ++p) {
            std::vector<std::optional<double>> opt(spec.n_drops), base(spec.n_drops);
            for (std::size_t d = 0; d < spec.n_drops; ++d) {
                const auto& c = cells[s * np + p][d];
                if (c) {
                    opt[d] = c->optimal;
                    base[d] = c->baseline;
                } else {
                    drop_failed[d] = true;
                }
            }
            res.rows.push_back(make_row(series[s], spec.grid[p], "optimal", "ul_sum_rate", opt));
            res.rows.push_back(make_row(series[s], spec.grid[p], "equal_time", "ul_sum_rate", base));
        }
    res.failed_drops = static_cast<std::size_t>(std::count(drop_failed.begin(), drop_failed.end(), true));
}

inline void require_nonempty_increasing(const std::vector<double>& g) {
    if (g.empty()) throw std::invalid_argument("experiment grid is empty");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw std::invalid_argument("experiment grid must be strictly increasing");
}

inline void finish(ExperimentResult& res, const ExperimentSpec& spec) {
    res.n_drops = spec.n_drops;
    res.seed = spec.seed;
    for (const auto& r : res.rows) res.worst_series_failures = std::max(res.worst_series_failures, r.failed);
    if (static_cast<double>(res.worst_series_failures) > 0.01 * static_cast<double>(spec.n_drops))
        throw ExperimentFailure(std::string(to_string(spec.id)) + ": " + std::to_string(res.worst_series_failures) +
                                " of " + std::to_string(spec.n_drops) + " drops failed in one series (limit 1%)");
}

}  // namespace detail

inline ExperimentResult run_fig4(const ExperimentSpec& spec) {
    detail::require_nonempty_increasing(spec.grid);
    ExperimentResult res;
    res.id = ExperimentId::Fig4;
    res.sweep_variable = "dc_offset";
    std::vector<std::string> series;
    for (int k : spec.users) series.push_back("K=" + std::to_string(k));
    detail::uplink_sweep(res, spec, series, [&](std::size_t s, std::size_t p, std::size_t d) {
        const auto ch = draw_channels(spec.config, spec.seed, d, static_cast<std::size_t>(spec.users[s]));
        const double a = spec.grid[p];
        return detail::uplink_rates(spec.config, ch, a * a);
    });
    detail::finish(res, spec);
    return res;
}

inline ExperimentResult run_fig5(const ExperimentSpec& spec) {
    detail::require_nonempty_increasing(spec.grid);
    for (double k : spec.grid)
        if (!(k >= 1.0 && k == std::floor(k))) throw std::invalid_argument("fig5 grid must hold user counts >= 1");
    ExperimentResult res;
    res.id = ExperimentId::Fig5;
    res.sweep_variable = "users";
    std::vector<std::string> series;
    for (double a : spec.dc_offsets) series.push_back("a=" + detail::fmt(a));
    detail::uplink_sweep(res, spec, series, [&](std::size_t s, std::size_t p, std::size_t d) {
        const auto ch = draw_channels(spec.config, spec.seed, d, static_cast<std::size_t>(spec.grid[p]));
        const double a = spec.dc_offsets[s];
        return detail::uplink_rates(spec.config, ch, a * a);
    });
    detail::finish(res, spec);
    return res;
}

inline ExperimentResult run_fig6(const ExperimentSpec& spec) {
    detail::require_nonempty_increasing(spec.grid);
    ExperimentResult res;
    res.id = ExperimentId::Fig6;
    res.sweep_variable = "semi_angle_deg";
    std::vector<std::string> series;
    std::vector<std::pair<int, double>> combos;
    for (int k : spec.users)
        for (double a : spec.dc_offsets) {
            series.push_back("K=" + std::to_string(k) + ",a=" + detail::fmt(a));
            combos.emplace_back(k, a);
        }
    std::vector<SystemConfig> configs;
    for (double deg : spec.grid) {
        SystemConfig c = spec.config;
        c.semi_angle_deg = deg;
        c.frontend().validate();
        configs.push_back(c);
    }
    detail::uplink_sweep(res, spec, series, [&](std::size_t s, std::size_t p, std::size_t d) {
        const auto ch = draw_channels(configs[p], spec.seed, d, static_cast<std::size_t>(combos[s].first));
        const double a = combos[s].second;
        return detail::uplink_rates(configs[p], ch, a * a);
    });
    detail::finish(res, spec);
    return res;
}

/// Per-drop Tchebycheff sweep (in weight order, unfiltered), or nullopt when
/// the drop is infeasible or a solve fails.
inline std::optional<std::vector<slipt::ParetoPoint>> drop_front(const SystemConfig& cfg,
                                                                  const ChannelRealization& ch,
                                                                  const std::vector<double>& weights) {
    try {
        const slipt::SliptModel model(cfg.slipt_instance(ch), cfg.barrier_options());
        if (!model.feasible()) return std::nullopt;
        const auto utopia = slipt::utopia_points(model);
        std::vector<slipt::ParetoPoint> pts;
        for (double w : weights) {
            auto p = slipt::solve_moop_point(model, w, 1.0 - w, utopia);
            if (!p.converged || !std::isfinite(p.dl_sum_rate) || !std::isfinite(p.ul_sum_rate)) return std::nullopt;
            pts.push_back(std::move(p));
        }
        return pts;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline ExperimentResult run_fig7(const ExperimentSpec& spec) {
    detail::require_nonempty_increasing(spec.grid);
    for (double w : spec.grid)
        if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("fig7 weights must lie in [0, 1]");
    ExperimentResult res;
    res.id = ExperimentId::Fig7;
    res.sweep_variable = "weight_dl";
    std::vector<std::string> series;
    std::vector<std::pair<int, double>> combos;
    for (int k : spec.users)
        for (double p : spec.max_powers) {
            series.push_back("K=" + std::to_string(k) + ",p_max=" + detail::fmt(p));
            combos.emplace_back(k, p);
        }
    const std::size_t ns = combos.size();
    std::vector<std::vector<std::optional<std::vector<slipt::ParetoPoint>>>> fronts(
        ns, std::vector<std::optional<std::vector<slipt::ParetoPoint>>>(spec.n_drops));
    detail::parallel_for(spec.n_drops, spec.jobs, [&](std::size_t d) {
        for (std::size_t s = 0; s < ns; ++s) {
            SystemConfig c = spec.config;
            c.p_max = combos[s].second;
            const auto ch = draw_channels(c, spec.seed, d, static_cast<std::size_t>(combos[s].first));
            fronts[s][d] = drop_front(c, ch, spec.grid);
        }
    });
    std::vector<bool> drop_failed(spec.n_drops, false);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t w = 0; w < spec.grid.size(); ++w) {
            std::vector<std::optional<double>> dl(spec.n_drops), ul(spec.n_drops);
            for (std::size_t d = 0; d < spec.n_drops; ++d) {
                if (!fronts[s][d]) {
                    drop_failed[d] = true;
                    continue;
                }
                dl[d] = (*fronts[s][d])[w].dl_sum_rate;
                ul[d] = (*fronts[s][d])[w].ul_sum_rate;
            }
            res.rows.push_back(detail::make_row(series[s], spec.grid[w], "tchebycheff", "dl_sum_rate", dl));
            res.rows.push_back(detail::make_row(series[s], spec.grid[w], "tchebycheff", "ul_sum_rate", ul));
        }
    res.failed_drops = static_cast<std::size_t>(std::count(drop_failed.begin(), drop_failed.end(), true));
    detail::finish(res, spec);
    return res;
}

inline ExperimentResult run(const ExperimentSpec& spec) {
    if (spec.n_drops < 1) throw std::invalid_argument("n_drops must be >= 1");
    switch (spec.id) {
        case ExperimentId::Fig4: return run_fig4(spec);
        case ExperimentId::Fig5: return run_fig5(spec);
        case ExperimentId::Fig6: return run_fig6(spec);
        case ExperimentId::Fig7: return run_fig7(spec);
    }
    throw std::invalid_argument("unknown experiment");
}

/// Columns of every experiment CSV, in order.
inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{"experiment", "series", "sweep_variable", "sweep_value", "scheme",
                                               "metric", "mean", "stderr", "n", "failed"};
    return cols;
}

inline std::string to_csv(const ExperimentResult& r) {
    csv::Table t(csv_columns());
    for (const auto& row : r.rows)
        t.add({to_string(r.id), row.series, r.sweep_variable, csv::number(row.sweep_value), row.scheme, row.metric,
               csv::number(row.mean), csv::number(row.stderr_), csv::number(row.n), csv::number(row.failed)});
    return t.str();
}

// ---------------------------------------------------------------------------
// Trend checks on mean curves
// ---------------------------------------------------------------------------

/// Rows of one (series, scheme, metric) curve in sweep order.
inline std::vector<ResultRow> curve(const ExperimentResult& r, const std::string& series, const std::string& scheme,
                                    const std::string& metric) {
    std::vector<ResultRow> out;
    for (const auto& row : r.rows)
        if (row.series == series && row.scheme == scheme && row.metric == metric) out.push_back(row);
    std::sort(out.begin(), out.end(), [](const ResultRow& a, const ResultRow& b) { return a.sweep_value < b.sweep_value; });
    return out;
}

inline std::vector<std::string> series_names(const ExperimentResult& r) {
    std::vector<std::string> out;
    for (const auto& row : r.rows)
        if (std::find(out.begin(), out.end(), row.series) == out.end()) out.push_back(row.series);
    return out;
}

/// +1: every step nondecreasing, -1: nonincreasing. `rel_tol` absorbs
/// rounding in the means.
inline bool monotone(const std::vector<ResultRow>& c, int direction, double rel_tol = 1e-12) {
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double step = (c[i].mean - c[i - 1].mean) * direction;
        if (step < -rel_tol * std::fmax(std::abs(c[i].mean), std::abs(c[i - 1].mean))) return false;
    }
    return true;
}

/// Optimal mean >= equal-time mean at every grid point of every series.
inline bool optimal_dominates_baseline(const ExperimentResult& r) {
    for (const auto& s : series_names(r)) {
        const auto o = curve(r, s, "optimal", "ul_sum_rate");
        const auto b = curve(r, s, "equal_time", "ul_sum_rate");
        if (o.size() != b.size()) return false;
        for (std::size_t i = 0; i < o.size(); ++i)
            if (o[i].mean < b[i].mean * (1.0 - 1e-12)) return false;
    }
    return true;
}

}  // namespace lightharvest::experiments

#endif  // LIGHTHARVEST_EXPERIMENTS_HPP
