// lightharvest: solve single instances, run Monte Carlo sweeps, validate.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lightharvest/cli.hpp"

namespace lc = lightharvest::cli;

namespace {

void add_common(CLI::App* app, lc::CommonOptions& o, std::optional<std::uint64_t>& seed) {
    app->add_option("--config", o.config_path, "Config file (key = value text or JSON)");
    app->add_option("--set", o.overrides, "Override KEY=VALUE (repeatable)")->allow_extra_args(false);
    app->add_option("--seed", seed, "Random seed (overrides experiment.seed)");
    app->add_option("--out", o.out_dir, "Output directory; result and report.json go there");
    app->add_option("--jobs", o.jobs, "Worker threads for experiments")->check(CLI::Range(1u, 1024u));
    app->add_option("--format", o.format, "Result format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resource allocation for dual-hop VLC/RF links with energy harvesting"};
    app.require_subcommand(1);

    lc::Invocation inv;
    for (int i = 0; i < argc; ++i) inv.argv.emplace_back(argv[i]);
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> drops;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"solve-a", "Uplink time allocation (wireless-powered uplink)"},
        {"solve-b-dl", "SLIPT downlink sum-rate maximum"},
        {"solve-b-ul", "SLIPT uplink sum-rate maximum"},
        {"pareto", "Tchebycheff trade-off front between downlink and uplink"},
        {"experiment", "Monte Carlo sweep: fig4, fig5, fig6 or fig7"},
        {"validate", "Oracle and invariant suite"},
    };
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(sub, inv.common, seed);
        if (std::string(s.name) == "experiment") {
            sub->add_option("id", inv.experiment_id, "Experiment id")->required();
            sub->add_option("--drops", drops, "Number of drops (overrides experiment.n_drops)");
        }
        if (std::string(s.name) == "validate")
            sub->add_option("--scale", inv.scale, "small or full")->check(CLI::IsMember({"small", "full"}));
        sub->callback([&inv, name = std::string(s.name)] { inv.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lc::kUsage;
    }
    inv.common.seed = seed;
    inv.drops = drops;
    auto progress = [](const lightharvest::validation::CheckResult& r) {
        std::cerr << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << ": " << r.detail << "\n";
    };
    return lc::run(inv, std::cout, std::cerr, progress);
}
