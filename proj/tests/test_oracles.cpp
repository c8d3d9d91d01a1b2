#include <gtest/gtest.h>

#include <cmath>

#include "lightharvest/config.hpp"
#include "lightharvest/oracles.hpp"
#include "lightharvest/slipt.hpp"

using namespace lightharvest;

namespace {

slipt::SliptInstance instance(std::uint64_t drop) {
    SystemConfig cfg;
    return cfg.slipt_instance(draw_channels(cfg, 42, drop, 2));
}

slipt::SliptOptions quiet() {
    slipt::SliptOptions o;
    o.run_dual_scheme = false;
    return o;
}

}  // namespace

TEST(Oracles, GoldenSectionFindsParabolaPeak) {
    const auto [x, v] = oracles::golden_max([](double t) { return -(t - 0.3) * (t - 0.3) + 2.0; }, 0.0, 1.0);
    EXPECT_NEAR(x, 0.3, 1e-6);
    EXPECT_NEAR(v, 2.0, 1e-10);
}

TEST(Oracles, GoldenSectionKeepsEndpointMaximum) {
    const auto [x, v] = oracles::golden_max([](double t) { return t; }, 0.0, 1.0);
    EXPECT_NEAR(x, 1.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-6);
}

TEST(Oracles, OuterMapStaysFeasible) {
    const auto in = instance(0);
    for (double s0 : {0.1, 0.5, 0.9})
        for (double s1 : {0.0, 0.5, 1.0})
            for (double s2 : {0.0, 0.5, 1.0}) {
                const auto o = oracles::map_outer(in, {s0, s1, s2});
                if (!o) continue;
                EXPECT_GE(o->tau1, 0.0);
                EXPECT_LE(o->tau1, 1.0);
                EXPECT_LE(o->b1, in.dc_energy_cap() + 1e-12);
                EXPECT_LE(o->b2, in.dc_energy_cap() + 1e-12);
                EXPECT_LE(o->pt1_lo, o->pt1_hi + 1e-12);
            }
    EXPECT_THROW(oracles::map_outer(slipt::SliptInstance{{1e-5}, {1.0}}, {0.5, 0.5, 0.5}), std::invalid_argument);
}

TEST(Oracles, GridSearchBoundsSolvers) {
    const auto in = instance(2);
    oracles::GridOptions g;
    g.points_per_axis = 11;
    g.refinement_rounds = 8;
    const auto dl_o = oracles::dl_max(in, g);
    const auto ul_o = oracles::ul_max(in, g);
    const auto dl = slipt::solve_dl_max(in, quiet());
    const auto ul = slipt::solve_ul_max(in, quiet());
    // The oracle returns feasible points, so it cannot beat the optimum.
    EXPECT_LE(dl_o.value, dl.dl_sum_rate * (1 + 1e-6));
    EXPECT_LE(ul_o.value, ul.ul_sum_rate * (1 + 1e-6));
    EXPECT_NEAR(dl_o.value, dl.dl_sum_rate, 2e-2 * dl.dl_sum_rate);
    EXPECT_NEAR(ul_o.value, ul.ul_sum_rate, 2e-2 * ul.ul_sum_rate);
    EXPECT_LT(slipt::check_constraints(in, dl_o.vars).max_violation, 1e-9);
}
