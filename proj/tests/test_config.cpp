#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "lightharvest/config.hpp"

using namespace lightharvest;

namespace {

const EchoEntry& echo(const ParsedConfig& p, const std::string& key) {
    const auto it = std::find_if(p.echo.begin(), p.echo.end(), [&](const EchoEntry& e) { return e.key == key; });
    if (it == p.echo.end()) throw std::runtime_error("no echo for " + key);
    return *it;
}

std::string error_of(const std::string& contents, const std::vector<std::string>& overrides = {}) {
    try {
        parse_config(contents, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, EmptyGivesDefaults) {
    const auto p = parse_config("");
    EXPECT_EQ(p.config.p_max, 4.0);
    EXPECT_EQ(p.config.eta, 0.2);
    EXPECT_EQ(p.config.semi_angle_deg, 60.0);
    EXPECT_EQ(p.config.tolerance, 1e-8);
    EXPECT_EQ(echo(p, "power.p_max").source, "default");
    EXPECT_EQ(echo(p, "power.p_max").value, "4");
}

TEST(Config, ShippedDefaultFileMatchesBuiltIns) {
    const auto p = load_config(LIGHTHARVEST_SOURCE_DIR "/configs/default.conf");
    const auto d = parse_config("");
    ASSERT_EQ(p.echo.size(), d.echo.size());
    for (std::size_t i = 0; i < p.echo.size(); ++i) EXPECT_EQ(p.echo[i].value, d.echo[i].value) << p.echo[i].key;
}

TEST(Config, TextFileAndOverride) {
    const auto p = parse_config("# comment\npower.p_max = 6\nharvest.eta = 0.3  # inline\n", {"harvest.eta=0.5"});
    EXPECT_EQ(p.config.p_max, 6.0);
    EXPECT_EQ(p.config.eta, 0.5);
    EXPECT_EQ(echo(p, "power.p_max").source, "file");
    EXPECT_EQ(echo(p, "harvest.eta").source, "override");
    EXPECT_EQ(echo(p, "harvest.eta").value, "0.5");
}

TEST(Config, JsonMirrorsText) {
    const auto j = parse_config(R"({"power": {"p_max": 6, "dc_offset": 1.5}, "instance": {"vlc_gain": [1e-5, 2e-5],
                                    "rf_power_gain": [0.5, 0.25]}})");
    const auto t = parse_config("power.p_max = 6\npower.dc_offset = 1.5\ninstance.vlc_gain = 1e-5, 2e-5\n"
                                "instance.rf_power_gain = 0.5,0.25\n");
    EXPECT_EQ(j.config.p_max, t.config.p_max);
    EXPECT_EQ(j.config.dc_offset, t.config.dc_offset);
    EXPECT_EQ(j.config.vlc_gain, t.config.vlc_gain);
    EXPECT_EQ(j.config.rf_power_gain, (std::vector<double>{0.5, 0.25}));
}

TEST(Config, OutOfRangeNamesKey) {
    EXPECT_NE(error_of("led.semi_angle_deg = 95").find("led.semi_angle_deg"), std::string::npos);
    EXPECT_NE(error_of("", {"harvest.eta=1.5"}).find("harvest.eta"), std::string::npos);
    EXPECT_NE(error_of("power.p_max = -1").find("power.p_max"), std::string::npos);
}

TEST(Config, UnknownKeyAndSyntax) {
    EXPECT_NE(error_of("led.colour = 3").find("unknown key"), std::string::npos);
    EXPECT_NE(error_of("power.p_max = 4\nnonsense\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("power.p_max = four").find("power.p_max"), std::string::npos);
    EXPECT_NE(error_of("", {"power.p_max"}).find("KEY=VALUE"), std::string::npos);
    EXPECT_FALSE(error_of("{ not json").empty());
}

TEST(Config, CrossFieldChecks) {
    EXPECT_NE(error_of("power.dc_offset = 4").find("i_max"), std::string::npos);
    EXPECT_FALSE(error_of("instance.vlc_gain = 1e-5\n").empty());
}

TEST(Config, DerivedQuantities) {
    SystemConfig c;
    c.e_min_dbm = 0.0;
    EXPECT_NEAR(c.e_min_joules(), 1e-3, 1e-18);
    c.e_min_dbm = -20.0;
    EXPECT_NEAR(c.e_min_joules(), 1e-5, 1e-18);
    EXPECT_NEAR(c.vlc_noise_power(), 3e-14, 1e-27);
    const auto s = c.slipt_instance({{1e-5}, {0.5}});
    EXPECT_EQ(s.max_led_power, c.p_max);
    EXPECT_EQ(s.dc_offset, c.dc_offset);
    const auto w = c.wpcn_instance({{1e-5}, {0.5}}, 4.0);
    EXPECT_EQ(w.max_led_power, 4.0);
}

TEST(Config, ExplicitGainsOverrideDraw) {
    const auto p = parse_config("instance.vlc_gain = 1e-5\ninstance.rf_power_gain = 0.5\n");
    const auto ch = instance_channels(p.config);
    ASSERT_EQ(ch.size(), 1u);
    EXPECT_EQ(ch.vlc_gain[0], 1e-5);
    const auto drawn = instance_channels(parse_config("instance.users = 3").config);
    EXPECT_EQ(drawn.size(), 3u);
}

TEST(Config, MissingFile) {
    EXPECT_THROW(load_config("/nonexistent/lightharvest.conf"), ConfigError);
}
