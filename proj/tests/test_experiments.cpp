#include <gtest/gtest.h>

#include <sstream>

#include "lightharvest/experiments.hpp"

using namespace lightharvest;
using namespace lightharvest::experiments;

namespace {

ExperimentSpec small(ExperimentId id, std::size_t drops) {
    auto s = default_spec(id, SystemConfig{});
    s.n_drops = drops;
    return s;
}

}  // namespace

TEST(Experiments, ParseIds) {
    EXPECT_EQ(parse_experiment_id("fig4"), ExperimentId::Fig4);
    EXPECT_EQ(parse_experiment_id("fig7"), ExperimentId::Fig7);
    EXPECT_STREQ(to_string(ExperimentId::Fig6), "fig6");
    EXPECT_THROW(parse_experiment_id("fig9"), std::invalid_argument);
}

TEST(Experiments, DefaultGrids) {
    SystemConfig cfg;
    const auto g4 = default_grid(ExperimentId::Fig4, cfg);
    ASSERT_EQ(g4.size(), 10u);
    EXPECT_NEAR(g4.back(), 2.0, 1e-15);
    EXPECT_EQ(default_grid(ExperimentId::Fig5, cfg).size(), 8u);
    EXPECT_EQ(default_grid(ExperimentId::Fig6, cfg).front(), 30.0);
    EXPECT_EQ(default_grid(ExperimentId::Fig7, cfg).size(), 11u);
}

TEST(Experiments, SingleDropHasZeroStderr) {
    const auto r = run(small(ExperimentId::Fig4, 1));
    ASSERT_FALSE(r.rows.empty());
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.stderr_, 0.0);
        EXPECT_EQ(row.n, 1u);
    }
}

TEST(Experiments, SeedDeterminesOutput) {
    auto a = small(ExperimentId::Fig5, 20);
    auto b = a;
    b.jobs = 2;
    EXPECT_EQ(to_csv(run(a)), to_csv(run(b)));
    auto c = a;
    c.seed = a.seed + 1;
    EXPECT_NE(to_csv(run(a)), to_csv(run(c)));
}

TEST(Experiments, CsvColumns) {
    const auto csv = to_csv(run(small(ExperimentId::Fig4, 3)));
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "experiment,series,sweep_variable,sweep_value,scheme,metric,mean,stderr,n,failed");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.rfind("fig4,", 0), 0u);
    }
    // 3 series x 10 grid points x 2 schemes
    EXPECT_EQ(rows, 60u);
}

TEST(Experiments, UplinkTrendsOnSmallRun) {
    const auto r = run(small(ExperimentId::Fig4, 30));
    EXPECT_TRUE(optimal_dominates_baseline(r));
    for (const auto& s : series_names(r)) EXPECT_TRUE(monotone(curve(r, s, "optimal", "ul_sum_rate"), +1)) << s;
}

TEST(Experiments, TradeoffRows) {
    auto s = small(ExperimentId::Fig7, 1);
    s.grid = {0.0, 0.5, 1.0};
    s.users = {2};
    s.max_powers = {4.0};
    const auto r = run(s);
    const auto dl = curve(r, "K=2,p_max=4", "tchebycheff", "dl_sum_rate");
    const auto ul = curve(r, "K=2,p_max=4", "tchebycheff", "ul_sum_rate");
    ASSERT_EQ(dl.size(), 3u);
    ASSERT_EQ(ul.size(), 3u);
    EXPECT_LE(dl.front().mean, dl.back().mean);
    EXPECT_GE(ul.front().mean, ul.back().mean);
}

TEST(Experiments, MonotoneHelper) {
    std::vector<ResultRow> c(3);
    c[0].mean = 1, c[1].mean = 2, c[2].mean = 2;
    EXPECT_TRUE(monotone(c, +1));
    EXPECT_FALSE(monotone(c, -1));
}

TEST(Experiments, RejectsBadSpec) {
    auto s = small(ExperimentId::Fig4, 0);
    EXPECT_THROW(run(s), std::invalid_argument);
    s.n_drops = 1;
    s.grid = {1.0, 0.5};
    EXPECT_THROW(run(s), std::invalid_argument);
}

TEST(Experiments, FailureLimitIsEnforced) {
    // A 1 J harvest floor is out of reach in every drop.
    auto s = small(ExperimentId::Fig7, 2);
    s.grid = {0.0, 1.0};
    s.users = {2};
    s.max_powers = {4.0};
    s.config.e_min_dbm = 30.0;
    EXPECT_THROW(run(s), ExperimentFailure);
}
