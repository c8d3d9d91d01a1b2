#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lightharvest/channel.hpp"
#include "lightharvest/config.hpp"

using namespace lightharvest;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

TEST(Channel, LambertianOrder) {
    EXPECT_NEAR(lambertian_order(60.0 * kDeg), 1.0, 1e-14);
    EXPECT_NEAR(lambertian_order(30.0 * kDeg), 4.818841679306418009, 1e-12);
    EXPECT_THROW(lambertian_order(0.0), std::domain_error);
    EXPECT_THROW(lambertian_order(95.0 * kDeg), std::domain_error);
}

TEST(Channel, ConcentratorGain) {
    EXPECT_NEAR(concentrator_gain(0.1, 1.5, 60.0 * kDeg), 3.0, 1e-14);
    EXPECT_EQ(concentrator_gain(61.0 * kDeg, 1.5, 60.0 * kDeg), 0.0);
}

TEST(Channel, GainUnderLed) {
    const RoomGeometry room;
    const OpticalFrontend fe;
    EXPECT_NEAR(vlc_gain({2.5, 2.5}, room, fe), 1.26528179758056792e-05, 1e-18);
    EXPECT_NEAR(vlc_gain({4.0, 2.5}, room, fe), 5.18259424289000620e-06, 1e-18);
}

TEST(Channel, ZeroOutsideFieldOfView) {
    const RoomGeometry room;
    const OpticalFrontend fe;
    EXPECT_EQ(vlc_gain({0.0, 0.0}, room, fe), 0.0);
}

TEST(Channel, RfDistance) {
    const RoomGeometry room;
    EXPECT_NEAR(rf_distance({4.0, 1.0}, room), 0.0, 1e-15);
    EXPECT_NEAR(rf_distance({1.0, 5.0}, room), 5.0, 1e-14);
}

TEST(Channel, SubstreamsNestAcrossUserCounts) {
    SystemConfig cfg;
    const auto two = draw_channels(cfg, 11, 3, 2);
    const auto four = draw_channels(cfg, 11, 3, 4);
    ASSERT_EQ(four.size(), 4u);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(two.vlc_gain[k], four.vlc_gain[k]);
        EXPECT_EQ(two.rf_power_gain[k], four.rf_power_gain[k]);
    }
    const auto other = draw_channels(cfg, 11, 4, 2);
    EXPECT_NE(two.rf_power_gain[0], other.rf_power_gain[0]);
}

TEST(Channel, UniformPlacementStaysInRoom) {
    const RoomGeometry room;
    auto rng = substream(1, 0, 0);
    const auto drop = place_users_uniform(200, room, rng);
    ASSERT_EQ(drop.positions.size(), 200u);
    for (const auto& p : drop.positions) EXPECT_TRUE(room.contains_floor_point(p));
}
