#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lightharvest/config.hpp"
#include "lightharvest/slipt.hpp"

using namespace lightharvest;
using namespace lightharvest::slipt;

namespace {

// One user with g = 1e-5, |h|^2 = 0.5 and default powers.
SliptInstance single_user() {
    SliptInstance in;
    in.vlc_gain = {1e-5};
    in.rf_power_gain = {0.5};
    return in;
}

SliptInstance two_users(std::uint64_t drop = 0) {
    SystemConfig cfg;
    return cfg.slipt_instance(draw_channels(cfg, 42, drop, 2));
}

SliptOptions quiet() {
    SliptOptions o;
    o.run_dual_scheme = false;
    return o;
}

// log2(1 + 2 gamma), log2(1 + 2 gamma-bar) for single_user(), from mpmath.
constexpr double kSingleDl = 11.4944489121841055021;
constexpr double kSingleUl = 0.0285691521967708939672;

}  // namespace

TEST(Slipt, Coefficients) {
    const auto in = single_user();
    EXPECT_NEAR(in.dl_coefficient(0), 1442.09329905377514536, 1e-9);
    EXPECT_NEAR(in.ul_coefficient(0), 0.01, 1e-16);
    EXPECT_EQ(in.dc_energy_cap(), 4.0);
}

TEST(Slipt, RatesOnHandmadeAllocation) {
    const auto in = single_user();
    SubstitutedVars v{{1.0}, {1.0}, {2.0}, {2.0}};
    EXPECT_NEAR(dl_sum_rate(in, v), kSingleDl, 1e-12);
    EXPECT_NEAR(ul_sum_rate(in, v), kSingleUl, 1e-15);
    const auto rep = check_constraints(in, v);
    EXPECT_LT(rep.max_violation, 1e-15);
    EXPECT_LT(rep.power_residual, 1e-15);
}

// With one user both shares are 1 and the power budget pins b = Pt = 2.
TEST(Slipt, SingleUserClosedForm) {
    const auto dl = solve_dl_max(single_user(), quiet());
    ASSERT_EQ(dl.status, SolveStatus::Optimal);
    EXPECT_NEAR(dl.dl_sum_rate, kSingleDl, 1e-7);
    EXPECT_NEAR(dl.vars.dc_energy[0], 2.0, 1e-6);
    const auto ul = solve_ul_max(single_user(), quiet());
    ASSERT_EQ(ul.status, SolveStatus::Optimal);
    EXPECT_NEAR(ul.ul_sum_rate, kSingleUl, 1e-8);
    EXPECT_NEAR(ul.dl_sum_rate, kSingleDl, 1e-6);
}

TEST(Slipt, PerspectiveRatesAreConcave) {
    const SliptModel model(two_users());
    const Vector x0 = model.interior_point();
    convex::Problem p = model.base_problem(false);
    p.objective = model.combined(1.0, 0.0);
    const Vector x1 = convex::maximize(p, x0).x;
    for (double lam : {0.25, 0.5, 0.75}) {
        const Vector xm = lam * x0 + (1.0 - lam) * x1;
        EXPECT_GE(model.dl_rate(xm), lam * model.dl_rate(x0) + (1 - lam) * model.dl_rate(x1) - 1e-10);
        EXPECT_GE(model.ul_rate(xm), lam * model.ul_rate(x0) + (1 - lam) * model.ul_rate(x1) - 1e-10);
    }
}

TEST(Slipt, CombinedGradientMatchesDifferences) {
    const SliptModel model(two_users());
    const Vector x = model.interior_point();
    const auto f = model.combined(1.0, 1.0);
    Vector g(x.size());
    Matrix h(x.size(), x.size());
    f.derivatives(x, g, h);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector e = Vector::Zero(x.size());
        e[i] = 1e-7 * std::fmax(std::abs(x[i]), 1e-3);
        const double fd = (f.value(x + e) - f.value(x - e)) / (2.0 * e[i]);
        EXPECT_NEAR(g[i], fd, 1e-5 * std::fmax(1.0, std::abs(fd))) << "coordinate " << i;
    }
}

TEST(Slipt, TwoUserSolutionsAreFeasibleAndTight) {
    const auto in = two_users();
    for (const auto& s : {solve_dl_max(in, quiet()), solve_ul_max(in, quiet())}) {
        ASSERT_EQ(s.status, SolveStatus::Optimal);
        const auto rep = check_constraints(in, s.vars);
        EXPECT_LT(rep.max_violation, 1e-6);
        EXPECT_LT(rep.dl_share_residual, 1e-6);
        EXPECT_LT(rep.ul_share_residual, 1e-6);
        EXPECT_LT(rep.power_residual, 1e-6);
        EXPECT_LT(s.kkt_residual, 1e-4);
        EXPECT_LT(s.max_complementarity, 1e-4);
    }
}

TEST(Slipt, InfeasibleBudgetIsReported) {
    auto in = single_user();
    in.max_led_power = 10.0;  // above (1 + 1/A^2) a^2 = 8
    const auto s = solve_dl_max(in, quiet());
    EXPECT_EQ(s.status, SolveStatus::Infeasible);
    EXPECT_FALSE(SliptModel(in).feasible());
}

TEST(Slipt, InfeasibleHarvestFloor) {
    auto in = two_users();
    in.min_harvest = 1.0;
    EXPECT_FALSE(SliptModel(in).feasible());
    EXPECT_EQ(solve_ul_max(in, quiet()).status, SolveStatus::Infeasible);
}

TEST(Slipt, SchemeReportIsConsistent) {
    const auto in = two_users();
    SliptOptions opt;
    opt.scheme.max_iterations = 2000;
    for (const auto& s : {solve_dl_max(in, opt), solve_ul_max(in, opt)}) {
        EXPECT_TRUE(s.scheme.ran);
        EXPECT_EQ(s.fallback_warning, !s.scheme.agrees);
        EXPECT_GT(s.scheme.iterations, 0);
    }
    const auto plain = solve_dl_max(in, quiet());
    EXPECT_FALSE(plain.scheme.ran);
    EXPECT_FALSE(plain.fallback_warning);
}

TEST(Slipt, ParetoCornersAndContainment) {
    const SliptModel model(two_users(1));
    const auto dl = solve_dl_max(model, quiet());
    const auto ul = solve_ul_max(model, quiet());
    const auto pts = tchebycheff_sweep(model, 5);
    ASSERT_EQ(pts.size(), 5u);
    EXPECT_EQ(pts.front().weight_dl, 0.0);
    EXPECT_EQ(pts.back().weight_dl, 1.0);
    EXPECT_NEAR(pts.front().ul_sum_rate, ul.ul_sum_rate, 1e-6 * ul.ul_sum_rate);
    EXPECT_NEAR(pts.back().dl_sum_rate, dl.dl_sum_rate, 1e-6 * dl.dl_sum_rate);
    const auto front = nondominated(pts);
    for (std::size_t i = 1; i < front.size(); ++i) {
        EXPECT_GT(front[i].dl_sum_rate, front[i - 1].dl_sum_rate);
        EXPECT_LT(front[i].ul_sum_rate, front[i - 1].ul_sum_rate);
    }
    EXPECT_TRUE(frontier_contains(model, front));
}

TEST(Slipt, DominanceHelpers) {
    ParetoPoint a, b, c;
    a.dl_sum_rate = 2, a.ul_sum_rate = 1;
    b.dl_sum_rate = 1, b.ul_sum_rate = 1;
    c.dl_sum_rate = 1, c.ul_sum_rate = 3;
    EXPECT_TRUE(dominates(a, b));
    EXPECT_FALSE(dominates(a, c));
    EXPECT_FALSE(dominates(a, a));
    const auto kept = nondominated({a, b, c, a});
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].ul_sum_rate, 3.0);
}

TEST(Slipt, PhysicalRecovery) {
    SubstitutedVars v{{0.25, 0.75}, {0.5, 0.5}, {1.0, 0.75}, {0.5, 0.0}};
    std::vector<double> a, p;
    recover_physical(v, a, p);
    EXPECT_NEAR(a[0], 2.0, 1e-15);
    EXPECT_NEAR(a[1], 1.0, 1e-15);
    EXPECT_NEAR(p[0], 2.0, 1e-15);
    EXPECT_EQ(p[1], 0.0);
}

TEST(Slipt, GlobalOffsetProjection) {
    const auto in = two_users();
    SubstitutedVars v{{0.5, 0.5}, {0.5, 0.5}, {1.0, 3.0}, {0.0, 0.0}};
    const auto g = project_global_offset(in, v);
    ASSERT_TRUE(g.has_value());
    EXPECT_NEAR(g->dl_shares[0], 0.25, 1e-15);
    std::vector<double> a, p;
    recover_physical(*g, a, p);
    EXPECT_NEAR(a[0], 2.0, 1e-14);
    EXPECT_NEAR(a[1], 2.0, 1e-14);
    v.dc_energy = {5.0, 5.0};  // sqrt(10) > I_max
    EXPECT_FALSE(project_global_offset(in, v).has_value());
}
