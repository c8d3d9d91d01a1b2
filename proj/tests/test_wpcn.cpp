#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lightharvest/wpcn.hpp"

using namespace lightharvest;
using namespace lightharvest::wpcn;

namespace {

// Instance whose SNR coefficients are exactly y.
WpcnInstance with_coefficients(const std::vector<double>& y) {
    WpcnInstance w;
    w.vlc_gain.assign(y.size(), 1.0);
    w.rf_power_gain = y;
    w.harvest_efficiency = 1.0;
    w.max_led_power = 1.0;
    w.rf_noise_power = 1.0;
    return w;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(Wpcn, SnrCoefficient) {
    WpcnInstance w;
    w.vlc_gain = {1e-5};
    w.rf_power_gain = {0.5};
    w.max_led_power = 4.0;
    EXPECT_NEAR(w.snr_coefficients()[0], 0.2 * 1e-10 * 0.5 * 4.0 / 1e-9, 1e-15);
}

TEST(Wpcn, SingleUserTakesWholeFrame) {
    const auto s = solve_time_allocation(with_coefficients({3.0}));
    ASSERT_EQ(s.time_shares.size(), 1u);
    EXPECT_NEAR(s.time_shares[0], 1.0, 1e-12);
    EXPECT_NEAR(s.sum_rate, 2.0, 1e-12);
}

TEST(Wpcn, EqualCoefficientsSplitEvenly) {
    const auto s = solve_time_allocation(with_coefficients({0.3, 0.3}));
    EXPECT_NEAR(s.time_shares[0], 0.5, 1e-10);
    EXPECT_NEAR(s.time_shares[1], 0.5, 1e-10);
    EXPECT_NEAR(s.sum_rate, 0.67807190511263765213, 1e-12);
    EXPECT_NEAR(s.dual_lambda, 0.13706126477927637437, 1e-8);
}

// Reference optima from mpmath.
TEST(Wpcn, TwoUserReference) {
    const auto inst = with_coefficients({1.0, 10.0});
    const auto s = solve_time_allocation(inst);
    EXPECT_NEAR(s.time_shares[0], 1.0 / 11.0, 1e-9);
    EXPECT_NEAR(sum(s.time_shares), 1.0, 1e-10);
    EXPECT_NEAR(s.sum_rate, 3.5849625007211561815, 1e-10);
    EXPECT_NEAR(s.dual_lambda, 2.2624920465729397247, 1e-8);
    EXPECT_NEAR(equal_time_baseline(inst).sum_rate, 2.9886399617499582352, 1e-12);
}

TEST(Wpcn, SkewedTwoUserReference) {
    const auto inst = with_coefficients({0.01, 5.0});
    const auto s = solve_time_allocation(inst);
    EXPECT_NEAR(s.time_shares[0], 0.0019960079840319361277, 1e-9);
    EXPECT_NEAR(s.sum_rate, 2.5873649909364607396, 1e-10);
    EXPECT_NEAR(s.dual_lambda, 1.3847190417095544715, 1e-8);
    EXPECT_NEAR(equal_time_baseline(inst).sum_rate, 1.7440003854170340751, 1e-12);
}

TEST(Wpcn, ThreeUserReference) {
    const auto s = solve_time_allocation(with_coefficients({1.0, 2.0, 3.0}));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(s.time_shares[k], (k + 1.0) / 6.0, 1e-9);
    EXPECT_NEAR(s.sum_rate, 2.8073549220576041074, 1e-10);
    EXPECT_NEAR(s.dual_lambda, 1.5707591727242069011, 1e-8);
}

TEST(Wpcn, ZeroCoefficientUserGetsNoTime) {
    const auto s = solve_time_allocation(with_coefficients({0.0, 2.0}));
    EXPECT_EQ(s.time_shares[0], 0.0);
    EXPECT_NEAR(s.time_shares[1], 1.0, 1e-10);
    EXPECT_FALSE(s.degenerate);
}

TEST(Wpcn, AllZeroIsDegenerate) {
    const auto s = solve_time_allocation(with_coefficients({0.0, 0.0}));
    EXPECT_TRUE(s.degenerate);
    EXPECT_EQ(s.sum_rate, 0.0);
}

TEST(Wpcn, SubgradientAgreesWithBisection) {
    const auto inst = with_coefficients({0.4, 2.0, 7.0});
    const auto b = solve_time_allocation(inst);
    const auto g = solve_time_allocation(inst, DualBackend::Subgradient);
    EXPECT_NEAR(g.sum_rate, b.sum_rate, 1e-4 * b.sum_rate);
}

TEST(Wpcn, BruteForceBracketsOptimum) {
    const auto inst = with_coefficients({0.7, 4.0});
    const auto s = solve_time_allocation(inst);
    const auto o = brute_force_oracle(inst, 1e-4);
    EXPECT_LE(o.sum_rate, s.sum_rate + 1e-12);
    EXPECT_NEAR(o.sum_rate, s.sum_rate, 1e-6);
    EXPECT_THROW(brute_force_oracle(with_coefficients({1, 1, 1, 1}), 0.1), std::invalid_argument);
}

TEST(Wpcn, InteriorSharesAreStationary) {
    const std::vector<double> y{0.2, 1.5, 9.0};
    const auto s = solve_time_allocation(with_coefficients(y));
    for (std::size_t k = 0; k < y.size(); ++k)
        EXPECT_LT(std::abs(stationarity_residual(s.time_shares[k], y[k], s.dual_lambda)), 1e-8);
}

TEST(Wpcn, ValidationRejectsBadInput) {
    WpcnInstance w;
    EXPECT_THROW(solve_time_allocation(w), std::invalid_argument);
    w = with_coefficients({1.0});
    w.harvest_efficiency = 1.5;
    EXPECT_THROW(solve_time_allocation(w), std::invalid_argument);
}
