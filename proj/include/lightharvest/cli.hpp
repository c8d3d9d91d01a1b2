// Command implementations behind the lightharvest executable. Each command
// fills a RunReport and a result table; the executable only parses flags and
// routes output.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or config error,
// 3 infeasible instance, 4 solver did not converge, 5 experiment failure,
// 6 I/O error, 7 internal error.
#ifndef LIGHTHARVEST_CLI_HPP
#define LIGHTHARVEST_CLI_HPP

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lightharvest/config.hpp"
#include "lightharvest/csv.hpp"
#include "lightharvest/experiments.hpp"
#include "lightharvest/slipt.hpp"
#include "lightharvest/validation.hpp"
#include "lightharvest/wpcn.hpp"

namespace lightharvest::cli {

enum ExitCode : int {
    kOk = 0,
    kValidationFailed = 1,
    kUsage = 2,
    kInfeasible = 3,
    kNotConverged = 4,
    kExperimentFailed = 5,
    kIoError = 6,
    kInternal = 7,
};

/// Failure carrying its exit code and category name.
class CommandError : public std::runtime_error {
public:
    CommandError(int code, std::string category, const std::string& what)
        : std::runtime_error(what), code_(code), category_(std::move(category)) {}
    int code() const { return code_; }
    const std::string& category() const { return category_; }

private:
    int code_;
    std::string category_;
};

struct CommonOptions {
    std::string config_path;             // empty: LIGHTHARVEST_CONFIG, then defaults
    std::vector<std::string> overrides;  // KEY=VALUE
    std::optional<std::uint64_t> seed;
    std::string out_dir;                 // empty: result to stdout
    unsigned jobs = 1;
    std::string format = "csv";          // csv | json
};

struct RunReport {
    std::string command;
    std::vector<std::string> argv;
    std::vector<EchoEntry> config;
    std::vector<std::pair<std::string, double>> stage_seconds;
    nlohmann::json diagnostics = nlohmann::json::object();
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
    int exit_code = kOk;
    std::string error_category;
    std::string error;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command;
        j["argv"] = argv;
        nlohmann::json cfg = nlohmann::json::array();
        for (const auto& e : config) cfg.push_back({{"key", e.key}, {"value", e.value}, {"source", e.source}});
        j["config"] = cfg;
        nlohmann::json stages = nlohmann::json::object();
        for (const auto& [name, secs] : stage_seconds) stages[name] = secs;
        j["stage_seconds"] = stages;
        j["diagnostics"] = diagnostics;
        j["warnings"] = warnings;
        j["outputs"] = outputs;
        j["exit_code"] = exit_code;
        j["status"] = exit_code == kOk ? "ok" : "error";
        if (!error.empty()) {
            j["error_category"] = error_category;
            j["error"] = error;
        }
        return j;
    }
};

/// Command result: a table plus one-line human summary.
struct CommandOutput {
    std::string name;  // file stem for the table
    csv::Table table{std::vector<std::string>{"result"}};
    std::string summary;
};

namespace detail {

using Clock = std::chrono::steady_clock;

/// Times a stage into the report.
template <class F>
auto timed(RunReport& rep, const std::string& stage, F&& f) {
    const auto t0 = Clock::now();
    auto record = [&] {
        rep.stage_seconds.emplace_back(stage, std::chrono::duration<double>(Clock::now() - t0).count());
    };
    if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record();
    } else {
        auto r = f();
        record();
        return r;
    }
}

inline std::string num(double v) { return csv::number(v); }

inline std::string flag(bool b) { return b ? "true" : "false"; }

/// Numeric cells become JSON numbers, the rest strings.
inline nlohmann::json cell_json(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty()) return v;
    if (s == "true") return true;
    if (s == "false") return false;
    return s;
}

inline void require_status(const slipt::SliptSolution& s) {
    if (s.status == slipt::SolveStatus::Infeasible) throw CommandError(kInfeasible, "infeasible", s.message);
    if (s.status == slipt::SolveStatus::NotConverged)
        throw CommandError(kNotConverged, "not_converged", "interior-point solve did not converge");
}

}  // namespace detail

/// Table as a JSON array of row objects.
inline nlohmann::json table_json(const csv::Table& t) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : t.rows()) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < r.size(); ++i) o[t.header()[i]] = detail::cell_json(r[i]);
        out.push_back(std::move(o));
    }
    return out;
}

/// Config from --config, else LIGHTHARVEST_CONFIG, else defaults; overrides
/// and --seed applied on top.
inline ParsedConfig resolve_config(const CommonOptions& opt) {
    std::string path = opt.config_path;
    if (path.empty())
        if (const char* env = std::getenv("LIGHTHARVEST_CONFIG")) path = env;
    auto overrides = opt.overrides;
    if (opt.seed) overrides.push_back("experiment.seed=" + std::to_string(*opt.seed));
    try {
        return load_config(path, overrides);
    } catch (const ConfigError& e) {
        throw CommandError(kUsage, "config", e.what());
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Uplink time allocation for the configured instance; harvested energy a^2.
inline CommandOutput cmd_solve_a(const SystemConfig& cfg, RunReport& rep) {
    if (cfg.dc_offset * cfg.dc_offset > cfg.p_max * (1.0 + 1e-12))
        throw CommandError(kUsage, "config", "power.dc_offset^2 must not exceed power.p_max");
    const auto ch = instance_channels(cfg);
    const double energy = cfg.dc_offset * cfg.dc_offset;
    const auto inst = cfg.wpcn_instance(ch, energy);
    const auto sol = detail::timed(rep, "solve", [&] {
        return wpcn::solve_time_allocation(inst, wpcn::DualBackend::Bisection, cfg.tolerance);
    });
    const auto base = wpcn::equal_time_baseline(inst);
    const auto y = inst.snr_coefficients();

    CommandOutput out;
    out.name = "solve_a";
    out.table = csv::Table({"user", "vlc_gain", "rf_power_gain", "snr_coefficient", "time_share", "harvested_energy",
                            "transmit_power", "rate", "dual_lambda", "stationarity_residual"});
    double sum_tau = 0.0, worst_residual = 0.0;
    for (std::size_t k = 0; k < inst.size(); ++k) {
        const double tau = sol.time_shares[k];
        sum_tau += tau;
        const double harvested = inst.harvest_efficiency * energy * ch.vlc_gain[k] * ch.vlc_gain[k];
        const double power = tau > 0.0 ? harvested / tau : 0.0;
        const bool interior = tau > 0.0 && tau < 1.0;
        const double residual = interior ? wpcn::stationarity_residual(tau, y[k], sol.dual_lambda) : 0.0;
        worst_residual = std::fmax(worst_residual, std::abs(residual));
        out.table.add({std::to_string(k), detail::num(ch.vlc_gain[k]), detail::num(ch.rf_power_gain[k]),
                       detail::num(y[k]), detail::num(tau), detail::num(harvested), detail::num(power),
                       detail::num(rate_term(tau, y[k])), detail::num(sol.dual_lambda), detail::num(residual)});
    }
    rep.diagnostics["ul_sum_rate"] = sol.sum_rate;
    rep.diagnostics["equal_time_sum_rate"] = base.sum_rate;
    rep.diagnostics["dual_lambda"] = sol.dual_lambda;
    rep.diagnostics["iterations"] = sol.iterations;
    rep.diagnostics["sum_time_shares"] = sum_tau;
    rep.diagnostics["max_stationarity_residual"] = worst_residual;
    rep.diagnostics["degenerate"] = sol.degenerate;
    if (sol.degenerate) rep.warnings.push_back("every effective SNR is zero; equal split reported");
    out.summary = "ul_sum_rate=" + detail::num(sol.sum_rate) + " equal_time_sum_rate=" + detail::num(base.sum_rate);
    return out;
}

namespace detail {

inline void slipt_diagnostics(RunReport& rep, const slipt::SliptSolution& s) {
    rep.diagnostics["status"] = slipt::to_string(s.status);
    rep.diagnostics["dl_sum_rate"] = s.dl_sum_rate;
    rep.diagnostics["ul_sum_rate"] = s.ul_sum_rate;
    rep.diagnostics["newton_iterations"] = s.iterations;
    rep.diagnostics["kkt_residual"] = s.kkt_residual;
    rep.diagnostics["max_complementarity"] = s.max_complementarity;
    nlohmann::json sc;
    sc["ran"] = s.scheme.ran;
    sc["converged"] = s.scheme.converged;
    sc["iterations"] = s.scheme.iterations;
    sc["objective"] = s.scheme.objective;
    sc["max_violation"] = s.scheme.max_violation;
    sc["relative_gap"] = s.scheme.relative_gap;
    sc["agrees"] = s.scheme.agrees;
    rep.diagnostics["dual_scheme"] = sc;
    rep.diagnostics["fallback_warning"] = s.fallback_warning;
    if (s.fallback_warning)
        rep.warnings.push_back("closed-form dual iteration disagrees with the interior-point optimum (relative gap " +
                               num(s.scheme.relative_gap) + "); interior-point solution reported");
}

inline CommandOutput slipt_table(const slipt::SliptInstance& in, const slipt::SliptSolution& s, std::string name) {
    CommandOutput out;
    out.name = std::move(name);
    out.table = csv::Table({"user", "vlc_gain", "rf_power_gain", "dl_share", "ul_share", "dc_energy",
                            "power_time_product", "dc_offset", "led_power", "dl_rate", "ul_rate", "dual_nu",
                            "dual_omega", "dual_mu", "dual_dc_cap", "dual_lambda", "dual_zeta", "dual_psi",
                            "kkt_residual", "max_complementarity"});
    const double cap = in.dc_energy_cap();
    for (std::size_t k = 0; k < in.size(); ++k) {
        const auto& v = s.vars;
        const double dl = rate_term(std::fmax(v.dl_shares[k], 0.0),
                                    in.dl_coefficient(k) * std::fmax(v.power_time_products[k], 0.0));
        const double ul = rate_term(std::fmax(v.ul_shares[k], 0.0),
                                    in.ul_coefficient(k) * std::fmax(cap - v.dc_energy[k], 0.0));
        out.table.add({std::to_string(k), num(in.vlc_gain[k]), num(in.rf_power_gain[k]), num(v.dl_shares[k]),
                       num(v.ul_shares[k]), num(v.dc_energy[k]), num(v.power_time_products[k]), num(s.dc_offset[k]),
                       num(s.led_power[k]), num(dl), num(ul), num(s.duals.nu[k]), num(s.duals.omega[k]),
                       num(s.duals.mu[k]), num(s.duals.dc_cap[k]), num(s.duals.lambda), num(s.duals.zeta),
                       num(s.duals.psi), num(s.kkt_residual), num(s.max_complementarity)});
    }
    out.summary = "dl_sum_rate=" + num(s.dl_sum_rate) + " ul_sum_rate=" + num(s.ul_sum_rate);
    return out;
}

inline slipt::SliptModel build_model(const SystemConfig& cfg) {
    try {
        return slipt::SliptModel(cfg.slipt_instance(instance_channels(cfg)), cfg.barrier_options());
    } catch (const std::invalid_argument& e) {
        throw CommandError(kUsage, "config", e.what());
    }
}

}  // namespace detail

inline CommandOutput cmd_solve_b_dl(const SystemConfig& cfg, RunReport& rep) {
    const auto model = detail::build_model(cfg);
    const auto sol = detail::timed(rep, "solve", [&] { return slipt::solve_dl_max(model, cfg.slipt_options(true)); });
    detail::slipt_diagnostics(rep, sol);
    detail::require_status(sol);
    return detail::slipt_table(model.instance(), sol, "solve_b_dl");
}

inline CommandOutput cmd_solve_b_ul(const SystemConfig& cfg, RunReport& rep) {
    const auto model = detail::build_model(cfg);
    const auto sol = detail::timed(rep, "solve", [&] { return slipt::solve_ul_max(model, cfg.slipt_options(true)); });
    detail::slipt_diagnostics(rep, sol);
    detail::require_status(sol);
    return detail::slipt_table(model.instance(), sol, "solve_b_ul");
}

/// Tchebycheff sweep over pareto.points weights, in weight order.
inline CommandOutput cmd_pareto(const SystemConfig& cfg, RunReport& rep) {
    const auto model = detail::build_model(cfg);
    if (!model.feasible()) throw CommandError(kInfeasible, "infeasible", model.infeasibility_reason());
    const auto pts = detail::timed(rep, "solve", [&] {
        return slipt::tchebycheff_sweep(model, static_cast<std::size_t>(cfg.pareto_points));
    });
    const auto kept = slipt::nondominated(pts);
    CommandOutput out;
    out.name = "pareto";
    out.table = csv::Table({"weight_dl", "weight_ul", "dl_sum_rate", "ul_sum_rate", "epigraph_t", "converged",
                            "nondominated"});
    bool all_converged = true;
    for (const auto& p : pts) {
        bool kept_p = false;
        for (const auto& q : kept)
            kept_p = kept_p || (q.dl_sum_rate == p.dl_sum_rate && q.ul_sum_rate == p.ul_sum_rate);
        all_converged = all_converged && p.converged;
        out.table.add({detail::num(p.weight_dl), detail::num(p.weight_ul), detail::num(p.dl_sum_rate),
                       detail::num(p.ul_sum_rate), detail::num(p.epigraph_t), detail::flag(p.converged),
                       detail::flag(kept_p)});
    }
    rep.diagnostics["points"] = pts.size();
    rep.diagnostics["nondominated_points"] = kept.size();
    rep.diagnostics["all_converged"] = all_converged;
    out.summary = "dl_corner=" + detail::num(pts.back().dl_sum_rate) + " ul_corner=" + detail::num(pts.front().ul_sum_rate);
    if (!all_converged) throw CommandError(kNotConverged, "not_converged", "a Tchebycheff solve did not converge");
    return out;
}

/// Monte Carlo sweep. `n_drops` falls back to experiment.n_drops.
inline CommandOutput cmd_experiment(const std::string& id, const SystemConfig& cfg, std::optional<std::size_t> n_drops,
                                    unsigned jobs, RunReport& rep) {
    experiments::ExperimentId eid;
    try {
        eid = experiments::parse_experiment_id(id);
    } catch (const std::invalid_argument& e) {
        throw CommandError(kUsage, "usage", e.what());
    }
    auto spec = experiments::default_spec(eid, cfg);
    if (n_drops) spec.n_drops = *n_drops;
    if (spec.n_drops < 1) throw CommandError(kUsage, "usage", "number of drops must be >= 1");
    spec.jobs = std::max(1u, jobs);
    experiments::ExperimentResult res;
    try {
        res = detail::timed(rep, "experiment", [&] { return experiments::run(spec); });
    } catch (const experiments::ExperimentFailure& e) {
        throw CommandError(kExperimentFailed, "experiment_failure", e.what());
    }
    rep.diagnostics["experiment"] = id;
    rep.diagnostics["n_drops"] = res.n_drops;
    rep.diagnostics["seed"] = res.seed;
    rep.diagnostics["jobs"] = spec.jobs;
    rep.diagnostics["failed_drops"] = res.failed_drops;
    rep.diagnostics["worst_series_failures"] = res.worst_series_failures;
    if (res.failed_drops > 0)
        rep.warnings.push_back(std::to_string(res.failed_drops) + " drops failed and were excluded from some series");
    if (eid != experiments::ExperimentId::Fig7) {
        const int dir = eid == experiments::ExperimentId::Fig6 ? -1 : +1;
        nlohmann::json trends = nlohmann::json::object();
        for (const auto& s : experiments::series_names(res))
            trends[s] = experiments::monotone(experiments::curve(res, s, "optimal", "ul_sum_rate"), dir);
        rep.diagnostics["trend_holds"] = trends;
        rep.diagnostics["optimal_dominates_baseline"] = experiments::optimal_dominates_baseline(res);
    }

    CommandOutput out;
    out.name = id;
    out.table = csv::Table(experiments::csv_columns());
    for (const auto& row : res.rows)
        out.table.add({experiments::to_string(res.id), row.series, res.sweep_variable, detail::num(row.sweep_value),
                       row.scheme, row.metric, detail::num(row.mean), detail::num(row.stderr_),
                       detail::num(row.n), detail::num(row.failed)});
    out.summary = id + ": " + std::to_string(res.rows.size()) + " rows over " + std::to_string(res.n_drops) + " drops";
    return out;
}

/// Runs the validation suite; throws with exit code 1 naming the first
/// failing property.
inline CommandOutput cmd_validate(const SystemConfig& cfg, validation::Scale scale, unsigned jobs, RunReport& rep,
                                  const std::function<void(const validation::CheckResult&)>& progress = {}) {
    auto opt = validation::SuiteOptions::for_scale(scale);
    opt.jobs = std::max(1u, jobs);
    const auto results = detail::timed(rep, "validate", [&] { return validation::run_suite(cfg, opt, progress); });
    CommandOutput out;
    out.name = "validate";
    out.table = csv::Table({"id", "check", "passed", "seconds", "detail"});
    nlohmann::json checks = nlohmann::json::array();
    const validation::CheckResult* first_fail = nullptr;
    for (const auto& r : results) {
        out.table.add({r.id, r.name, detail::flag(r.passed), detail::num(r.seconds), r.detail});
        checks.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds},
                          {"detail", r.detail}});
        if (!r.passed && !first_fail) first_fail = &r;
    }
    rep.diagnostics["scale"] = scale == validation::Scale::Small ? "small" : "full";
    rep.diagnostics["checks"] = checks;
    rep.diagnostics["passed"] = first_fail == nullptr;
    std::size_t n_pass = 0;
    for (const auto& r : results) n_pass += r.passed ? 1 : 0;
    out.summary = "validation: " + std::to_string(n_pass) + "/" + std::to_string(results.size()) + " checks passed";
    if (first_fail) {
        rep.error_category = "validation";
        rep.error = "check " + first_fail->id + " (" + first_fail->name + ") failed: " + first_fail->detail;
        rep.exit_code = kValidationFailed;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output routing
// ---------------------------------------------------------------------------

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw CommandError(kIoError, "io", "cannot write '" + p.string() + "'");
    f << text;
    if (!f) throw CommandError(kIoError, "io", "write failed for '" + p.string() + "'");
}

/// Serialized result in the requested format.
inline std::string render(const CommandOutput& out, const std::string& format) {
    if (format == "json") return table_json(out.table).dump(2) + "\n";
    return out.table.str();
}

struct Invocation {
    std::string command;  // solve-a | solve-b-dl | solve-b-ul | pareto | experiment | validate
    CommonOptions common;
    std::string experiment_id;
    std::optional<std::size_t> drops;
    std::string scale = "small";
    std::vector<std::string> argv;
};

/// Runs one command end to end. With an output directory the table goes to
/// <dir>/<name>.<format>, the report to <dir>/report.json and the summary to
/// `out`; otherwise the table goes to `out` and summary and report to `err`.
inline int run(const Invocation& inv, std::ostream& out, std::ostream& err,
               const std::function<void(const validation::CheckResult&)>& progress = {}) {
    RunReport rep;
    rep.command = inv.command;
    rep.argv = inv.argv;
    const auto t0 = detail::Clock::now();
    std::optional<CommandOutput> result;
    try {
        if (inv.common.format != "csv" && inv.common.format != "json")
            throw CommandError(kUsage, "usage", "unknown format '" + inv.common.format + "' (expected csv or json)");
        const auto parsed = detail::timed(rep, "parse_config", [&] { return resolve_config(inv.common); });
        rep.config = parsed.echo;
        const SystemConfig& cfg = parsed.config;
        if (inv.command == "solve-a") {
            result = cmd_solve_a(cfg, rep);
        } else if (inv.command == "solve-b-dl") {
            result = cmd_solve_b_dl(cfg, rep);
        } else if (inv.command == "solve-b-ul") {
            result = cmd_solve_b_ul(cfg, rep);
        } else if (inv.command == "pareto") {
            result = cmd_pareto(cfg, rep);
        } else if (inv.command == "experiment") {
            result = cmd_experiment(inv.experiment_id, cfg, inv.drops, inv.common.jobs, rep);
        } else if (inv.command == "validate") {
            validation::Scale scale;
            try {
                scale = validation::parse_scale(inv.scale);
            } catch (const std::invalid_argument& e) {
                throw CommandError(kUsage, "usage", e.what());
            }
            result = cmd_validate(cfg, scale, inv.common.jobs, rep, progress);
        } else {
            throw CommandError(kUsage, "usage", "unknown command '" + inv.command + "'");
        }
    } catch (const CommandError& e) {
        rep.exit_code = e.code();
        rep.error_category = e.category();
        rep.error = e.what();
    } catch (const slipt::InfeasibleError& e) {
        rep.exit_code = kInfeasible;
        rep.error_category = "infeasible";
        rep.error = e.what();
    } catch (const std::exception& e) {
        rep.exit_code = kInternal;
        rep.error_category = "internal";
        rep.error = e.what();
    }

    // Results and the report are written even when the command failed.
    try {
        const std::string ext = inv.common.format == "json" ? ".json" : ".csv";
        if (!inv.common.out_dir.empty()) {
            const std::filesystem::path dir(inv.common.out_dir);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw CommandError(kIoError, "io", "cannot create '" + dir.string() + "': " + ec.message());
            if (result) {
                const auto path = dir / (result->name + ext);
                write_file(path, render(*result, inv.common.format));
                rep.outputs.push_back(path.string());
            }
            rep.outputs.push_back((dir / "report.json").string());
            rep.stage_seconds.emplace_back("total",
                                           std::chrono::duration<double>(detail::Clock::now() - t0).count());
            write_file(dir / "report.json", rep.to_json().dump(2) + "\n");
            if (result) out << result->summary << "\n";
        } else {
            if (result) {
                out << render(*result, inv.common.format);
                rep.outputs.push_back("<stdout>");
                err << result->summary << "\n";
            }
            rep.stage_seconds.emplace_back("total",
                                           std::chrono::duration<double>(detail::Clock::now() - t0).count());
            err << rep.to_json().dump(2) << "\n";
        }
    } catch (const CommandError& e) {
        if (rep.exit_code == kOk) rep.exit_code = e.code();
        err << "error: " << e.what() << "\n";
    }
    if (!rep.error.empty()) err << "error [" << rep.error_category << "]: " << rep.error << "\n";
    return rep.exit_code;
}

}  // namespace lightharvest::cli

#endif  // LIGHTHARVEST_CLI_HPP
