#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lightharvest/cli.hpp"

using namespace lightharvest;
namespace cli = lightharvest::cli;

namespace {

struct Captured {
    int code = 0;
    std::string out;
    std::string err;
};

Captured run(const std::string& command, std::vector<std::string> overrides, const std::string& format = "csv") {
    cli::Invocation inv;
    inv.command = command;
    inv.common.overrides = std::move(overrides);
    inv.common.format = format;
    std::ostringstream out, err;
    Captured c;
    c.code = cli::run(inv, out, err);
    c.out = out.str();
    c.err = err.str();
    return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::runtime_error("missing column " + name);
}

const std::vector<std::string> kSingleUser{"instance.vlc_gain=1e-5", "instance.rf_power_gain=0.5"};
const std::vector<std::string> kTwoUsers{"instance.vlc_gain=1.2e-5,6e-6", "instance.rf_power_gain=0.3,0.05"};

}  // namespace

TEST(Cli, SolveASingleUserTakesWholeFrame) {
    auto overrides = kSingleUser;
    overrides.push_back("power.dc_offset=1.5");
    const auto c = run("solve-a", overrides);
    ASSERT_EQ(c.code, 0) << c.err;
    const auto rows = parse_csv(c.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(std::stod(rows[1][column(rows[0], "time_share")]), 1.0);
    EXPECT_NE(c.err.find("ul_sum_rate="), std::string::npos);
}

TEST(Cli, SolveARejectsOffsetAboveBudget) {
    const auto c = run("solve-a", {"power.p_max=1", "power.dc_offset=2"});
    EXPECT_EQ(c.code, cli::kUsage);
    EXPECT_NE(c.err.find("dc_offset"), std::string::npos);
}

TEST(Cli, SolveBDownlinkMatchesLibrary) {
    const auto c = run("solve-b-dl", kTwoUsers);
    ASSERT_EQ(c.code, 0) << c.err;
    const auto parsed = parse_config("", kTwoUsers);
    const auto& cfg = parsed.config;
    const auto sol = slipt::solve_dl_max(cfg.slipt_instance(instance_channels(cfg)), cfg.slipt_options());
    EXPECT_NE(c.err.find("dl_sum_rate=" + csv::number(sol.dl_sum_rate)), std::string::npos) << c.err;
    const auto rows = parse_csv(c.out);
    ASSERT_EQ(rows.size(), 3u);
    double total = 0.0;
    for (std::size_t r = 1; r < rows.size(); ++r) total += std::stod(rows[r][column(rows[0], "dl_share")]);
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Cli, SolveBUplinkReportsDuals) {
    const auto c = run("solve-b-ul", kTwoUsers, "json");
    ASSERT_EQ(c.code, 0) << c.err;
    const auto j = nlohmann::json::parse(c.out);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_TRUE(j[0].contains("dual_lambda"));
    EXPECT_GE(j[0]["dual_nu"].get<double>(), 0.0);
}

TEST(Cli, ParetoCorners) {
    auto overrides = kTwoUsers;
    overrides.push_back("pareto.points=2");
    const auto c = run("pareto", overrides);
    ASSERT_EQ(c.code, 0) << c.err;
    const auto rows = parse_csv(c.out);
    ASSERT_EQ(rows.size(), 3u);
    const auto w = column(rows[0], "weight_dl");
    EXPECT_EQ(rows[1][w], "0");
    EXPECT_EQ(rows[2][w], "1");
    const auto dl = column(rows[0], "dl_sum_rate");
    const auto ul = column(rows[0], "ul_sum_rate");
    EXPECT_GT(std::stod(rows[2][dl]), std::stod(rows[1][dl]));
    EXPECT_GT(std::stod(rows[1][ul]), std::stod(rows[2][ul]));
}

TEST(Cli, InfeasibleExitCode) {
    auto overrides = kSingleUser;
    overrides.push_back("power.p_max=10");
    EXPECT_EQ(run("solve-b-dl", overrides).code, cli::kInfeasible);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("solve-a", {"led.semi_angle_deg=95"}).code, cli::kUsage);
    EXPECT_EQ(run("solve-a", {"led.colour=3"}).code, cli::kUsage);
    EXPECT_EQ(run("solve-a", {}, "xml").code, cli::kUsage);
    EXPECT_EQ(run("frobnicate", {}).code, cli::kUsage);
}

TEST(Cli, OutputDirectoryAndReport) {
    const auto dir = std::filesystem::temp_directory_path() / "lightharvest_cli_test";
    std::filesystem::remove_all(dir);
    cli::Invocation inv;
    inv.command = "experiment";
    inv.experiment_id = "fig5";
    inv.drops = 2;
    inv.common.out_dir = dir.string();
    inv.common.overrides = {"harvest.eta=0.3"};
    std::ostringstream out, err;
    ASSERT_EQ(cli::run(inv, out, err), 0) << err.str();
    ASSERT_TRUE(std::filesystem::exists(dir / "fig5.csv"));
    std::ifstream f(dir / "report.json");
    const auto report = nlohmann::json::parse(f);
    EXPECT_EQ(report["command"], "experiment");
    EXPECT_EQ(report["exit_code"], 0);
    bool found = false;
    for (const auto& e : report["config"])
        if (e["key"] == "harvest.eta") {
            found = true;
            EXPECT_EQ(e["value"], "0.3");
            EXPECT_EQ(e["source"], "override");
        }
    EXPECT_TRUE(found);
    std::filesystem::remove_all(dir);
}

TEST(Cli, UnknownExperiment) {
    cli::Invocation inv;
    inv.command = "experiment";
    inv.experiment_id = "fig9";
    std::ostringstream out, err;
    EXPECT_EQ(cli::run(inv, out, err), cli::kUsage);
    EXPECT_NE(err.str().find("unknown experiment"), std::string::npos);
}
