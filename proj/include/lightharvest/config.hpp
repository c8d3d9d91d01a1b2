// System configuration: flat dotted key = value text, or a JSON mirror
// (nested objects or dotted keys). Angles are given in degrees, dBm values
// carry a _dbm suffix. Unknown keys are rejected; every defaulted value is
// echoed.
#ifndef LIGHTHARVEST_CONFIG_HPP
#define LIGHTHARVEST_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lightharvest/channel.hpp"
#include "lightharvest/convex.hpp"
#include "lightharvest/slipt.hpp"
#include "lightharvest/wpcn.hpp"

namespace lightharvest {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    RoomGeometry room;
    double bandwidth_hz = 30e6;        // W
    double semi_angle_deg = 60.0;      // Phi_1/2
    double fov_deg = 60.0;             // psi
    double detector_area = 1e-4;       // A_p
    double responsivity = 0.53;        // R_p
    double filter_gain = 1.0;          // T_s
    double refractive_index = 1.5;     // n
    double xi = 1.0;                   // optical-to-electrical conversion efficiency
    double eta = 0.2;                  // harvest efficiency
    double path_loss_exponent = 1.8;
    double rf_noise_power = 1e-9;      // sigma^2 [W]
    double vlc_noise_psd = 1e-21;      // N0 [A^2/Hz]
    double p_max = 4.0;
    double i_max = 3.0;
    double dc_offset = 2.0;            // a
    double peak_ratio = 1.0;           // A
    double e_min_dbm = -100.0;
    double penalty_alpha = 1e-3;
    double beta0 = 0.1;
    int max_iter = 5000;
    double tolerance = 1e-8;           // barrier gap and dual bisection tolerance
    double scheme_tolerance = 1e-6;    // relative objective change of the dual schemes
    std::uint64_t seed = 1;
    int n_drops = 500;
    int users = 2;                     // K for the solve commands
    int drop = 0;                      // drop index for the solve commands
    std::vector<double> vlc_gain;      // explicit gains override the random drop
    std::vector<double> rf_power_gain;
    int pareto_points = 11;

    double e_min_joules() const { return 1e-3 * std::pow(10.0, e_min_dbm / 10.0); }
    double vlc_noise_power() const { return vlc_noise_psd * bandwidth_hz; }

    OpticalFrontend frontend() const {
        OpticalFrontend fe;
        fe.detector_area = detector_area;
        fe.responsivity = responsivity;
        fe.semi_angle_half = semi_angle_deg * std::numbers::pi / 180.0;
        fe.fov_half = fov_deg * std::numbers::pi / 180.0;
        fe.optical_filter_gain = filter_gain;
        fe.refractive_index = refractive_index;
        fe.conversion_efficiency_xi = xi;
        return fe;
    }

    convex::Options barrier_options() const {
        convex::Options o;
        o.gap_tolerance = tolerance;
        return o;
    }

    slipt::SliptOptions slipt_options(bool run_scheme = true) const {
        slipt::SliptOptions o;
        o.run_dual_scheme = run_scheme;
        o.scheme.penalty_alpha = penalty_alpha;
        o.scheme.beta0 = beta0;
        o.scheme.max_iterations = max_iter;
        o.scheme.relative_tolerance = scheme_tolerance;
        o.barrier = barrier_options();
        return o;
    }

    /// Uplink-only instance; `energy` is the harvested DC energy bound a^2.
    wpcn::WpcnInstance wpcn_instance(const ChannelRealization& ch, double energy) const {
        wpcn::WpcnInstance w;
        w.vlc_gain = ch.vlc_gain;
        w.rf_power_gain = ch.rf_power_gain;
        w.harvest_efficiency = eta;
        w.max_led_power = energy;
        w.rf_noise_power = rf_noise_power;
        return w;
    }

    slipt::SliptInstance slipt_instance(const ChannelRealization& ch) const {
        slipt::SliptInstance s;
        s.vlc_gain = ch.vlc_gain;
        s.rf_power_gain = ch.rf_power_gain;
        s.harvest_efficiency = eta;
        s.max_led_power = p_max;
        s.max_dc_offset = i_max;
        s.peak_amplitude_ratio = peak_ratio;
        s.vlc_noise_power = vlc_noise_power();
        s.rf_noise_power = rf_noise_power;
        s.min_harvest = e_min_joules();
        s.dc_offset = dc_offset;
        return s;
    }

    /// Cross-field checks that single-key ranges cannot express.
    void validate() const {
        try {
            room.validate();
            frontend().validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (dc_offset > i_max) throw ConfigError("power.dc_offset must not exceed power.i_max");
        if (vlc_gain.size() != rf_power_gain.size())
            throw ConfigError("instance.vlc_gain and instance.rf_power_gain must have equal length");
    }
};

/// Channel realization for drop `drop`: user k draws position then fading
/// from its own substream, so drops with more users extend smaller ones.
inline ChannelRealization draw_channels(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t drop,
                                        std::size_t users) {
    const auto fe = cfg.frontend();
    ChannelRealization ch;
    for (std::size_t k = 0; k < users; ++k) {
        auto rng = substream(seed, drop, k);
        const auto pos = place_users_uniform(1, cfg.room, rng).positions.front();
        ch.vlc_gain.push_back(vlc_gain(pos, cfg.room, fe));
        ch.rf_power_gain.push_back(rf_power_gain(pos, cfg.room, cfg.path_loss_exponent, rng));
    }
    return ch;
}

/// Channels for the single-instance commands.
inline ChannelRealization instance_channels(const SystemConfig& cfg) {
    if (!cfg.vlc_gain.empty()) return {cfg.vlc_gain, cfg.rf_power_gain};
    return draw_channels(cfg, cfg.seed, static_cast<std::uint64_t>(cfg.drop), static_cast<std::size_t>(cfg.users));
}

struct EchoEntry {
    std::string key;
    std::string value;
    std::string source;  // default | file | override
};

struct ParsedConfig {
    SystemConfig config;
    std::vector<EchoEntry> echo;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || !std::isfinite(v))
        throw ConfigError("key '" + key + "': expected a finite number, got '" + text + "'");
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// One configurable key: how to read it, write it back, and its range.
struct KeySpec {
    std::string name;
    std::function<void(SystemConfig&, const std::string&)> set;
    std::function<std::string(const SystemConfig&)> get;
};

inline void check_range(const std::string& key, double v, double lo, double hi, bool lo_open, bool hi_open) {
    const bool ok_lo = lo_open ? v > lo : v >= lo;
    const bool ok_hi = hi_open ? v < hi : v <= hi;
    if (!ok_lo || !ok_hi) {
        std::ostringstream os;
        os << "key '" << key << "' = " << format_double(v) << " out of range " << (lo_open ? "(" : "[")
           << format_double(lo) << ", " << format_double(hi) << (hi_open ? ")" : "]");
        throw ConfigError(os.str());
    }
}

inline KeySpec real_key(std::string name, double SystemConfig::*field, double lo, double hi, bool lo_open,
                        bool hi_open) {
    KeySpec k;
    k.name = name;
    k.set = [name, field, lo, hi, lo_open, hi_open](SystemConfig& c, const std::string& text) {
        const double v = parse_double(name, text);
        check_range(name, v, lo, hi, lo_open, hi_open);
        c.*field = v;
    };
    k.get = [field](const SystemConfig& c) { return format_double(c.*field); };
    return k;
}

inline KeySpec vec_key(std::string name, int axis, bool led, double lo, double hi) {
    KeySpec k;
    k.name = name;
    k.set = [name, axis, led, lo, hi](SystemConfig& c, const std::string& text) {
        const double v = parse_double(name, text);
        check_range(name, v, lo, hi, false, false);
        (led ? c.room.led_position : c.room.rf_receiver_position)[static_cast<std::size_t>(axis)] = v;
    };
    k.get = [axis, led](const SystemConfig& c) {
        return format_double((led ? c.room.led_position : c.room.rf_receiver_position)[static_cast<std::size_t>(axis)]);
    };
    return k;
}

inline KeySpec room_key(std::string name, double RoomGeometry::*field, bool lo_open) {
    KeySpec k;
    k.name = name;
    k.set = [name, field, lo_open](SystemConfig& c, const std::string& text) {
        const double v = parse_double(name, text);
        check_range(name, v, 0.0, 1e4, lo_open, false);
        c.room.*field = v;
    };
    k.get = [field](const SystemConfig& c) { return format_double(c.room.*field); };
    return k;
}

inline KeySpec int_key(std::string name, int SystemConfig::*field, long long lo, long long hi) {
    KeySpec k;
    k.name = name;
    k.set = [name, field, lo, hi](SystemConfig& c, const std::string& text) {
        const long long v = parse_integer(name, text);
        if (v < lo || v > hi)
            throw ConfigError("key '" + name + "' = " + text + " out of range [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
        c.*field = static_cast<int>(v);
    };
    k.get = [field](const SystemConfig& c) { return std::to_string(c.*field); };
    return k;
}

inline KeySpec list_key(std::string name, std::vector<double> SystemConfig::*field, bool positive) {
    KeySpec k;
    k.name = name;
    k.set = [name, field, positive](SystemConfig& c, const std::string& text) {
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const double v = parse_double(name, trim(item));
            check_range(name, v, 0.0, 1e300, positive, false);
            out.push_back(v);
        }
        if (out.empty()) throw ConfigError("key '" + name + "': empty list");
        c.*field = std::move(out);
    };
    k.get = [field](const SystemConfig& c) {
        std::string s;
        for (std::size_t i = 0; i < (c.*field).size(); ++i) s += (i ? "," : "") + format_double((c.*field)[i]);
        return s;
    };
    return k;
}

inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = [] {
        constexpr double big = 1e300;
        std::vector<KeySpec> t;
        t.push_back(room_key("room.length", &RoomGeometry::length, true));
        t.push_back(room_key("room.width", &RoomGeometry::width, true));
        t.push_back(room_key("room.height", &RoomGeometry::height, true));
        t.push_back(room_key("user.height", &RoomGeometry::user_height, false));
        t.push_back(vec_key("led.x", 0, true, 0.0, 1e4));
        t.push_back(vec_key("led.y", 1, true, 0.0, 1e4));
        t.push_back(vec_key("led.z", 2, true, 0.0, 1e4));
        t.push_back(vec_key("rf.x", 0, false, 0.0, 1e4));
        t.push_back(vec_key("rf.y", 1, false, 0.0, 1e4));
        t.push_back(vec_key("rf.z", 2, false, 0.0, 1e4));
        t.push_back(real_key("vlc.bandwidth", &SystemConfig::bandwidth_hz, 0.0, big, true, false));
        t.push_back(real_key("vlc.noise_psd", &SystemConfig::vlc_noise_psd, 0.0, big, true, false));
        t.push_back(real_key("led.semi_angle_deg", &SystemConfig::semi_angle_deg, 0.0, 90.0, true, true));
        t.push_back(real_key("pd.fov_deg", &SystemConfig::fov_deg, 0.0, 90.0, true, false));
        t.push_back(real_key("pd.area", &SystemConfig::detector_area, 0.0, big, true, false));
        t.push_back(real_key("pd.responsivity", &SystemConfig::responsivity, 0.0, big, true, false));
        t.push_back(real_key("pd.filter_gain", &SystemConfig::filter_gain, 0.0, big, true, false));
        t.push_back(real_key("pd.refractive_index", &SystemConfig::refractive_index, 1.0, big, false, false));
        t.push_back(real_key("pd.xi", &SystemConfig::xi, 0.0, big, true, false));
        t.push_back(real_key("harvest.eta", &SystemConfig::eta, 0.0, 1.0, true, false));
        t.push_back(real_key("harvest.e_min_dbm", &SystemConfig::e_min_dbm, -400.0, 100.0, false, false));
        t.push_back(real_key("rf.path_loss_exponent", &SystemConfig::path_loss_exponent, 0.0, 10.0, true, false));
        t.push_back(real_key("rf.noise_power", &SystemConfig::rf_noise_power, 0.0, big, true, false));
        t.push_back(real_key("power.p_max", &SystemConfig::p_max, 0.0, big, true, false));
        t.push_back(real_key("power.i_max", &SystemConfig::i_max, 0.0, big, true, false));
        t.push_back(real_key("power.dc_offset", &SystemConfig::dc_offset, 0.0, big, false, false));
        t.push_back(real_key("power.peak_ratio", &SystemConfig::peak_ratio, 0.0, big, true, false));
        t.push_back(real_key("solver.penalty_alpha", &SystemConfig::penalty_alpha, 0.0, big, true, false));
        t.push_back(real_key("solver.beta0", &SystemConfig::beta0, 0.0, big, true, false));
        t.push_back(int_key("solver.max_iter", &SystemConfig::max_iter, 1, 100000000));
        t.push_back(real_key("solver.tolerance", &SystemConfig::tolerance, 0.0, big, true, false));
        t.push_back(real_key("solver.scheme_tolerance", &SystemConfig::scheme_tolerance, 0.0, big, true, false));
        {
            KeySpec k;
            k.name = "experiment.seed";
            k.set = [](SystemConfig& c, const std::string& text) {
                const long long v = parse_integer("experiment.seed", text);
                if (v < 0) throw ConfigError("key 'experiment.seed' must be >= 0");
                c.seed = static_cast<std::uint64_t>(v);
            };
            k.get = [](const SystemConfig& c) { return std::to_string(c.seed); };
            t.push_back(std::move(k));
        }
        t.push_back(int_key("experiment.n_drops", &SystemConfig::n_drops, 1, 100000000));
        t.push_back(int_key("instance.users", &SystemConfig::users, 1, 64));
        t.push_back(int_key("instance.drop", &SystemConfig::drop, 0, 2000000000));
        t.push_back(list_key("instance.vlc_gain", &SystemConfig::vlc_gain, false));
        t.push_back(list_key("instance.rf_power_gain", &SystemConfig::rf_power_gain, false));
        t.push_back(int_key("pareto.points", &SystemConfig::pareto_points, 2, 10000));
        return t;
    }();
    return table;
}

inline const KeySpec& find_key(const std::string& key) {
    for (const auto& k : key_table())
        if (k.name == key) return k;
    throw ConfigError("unknown key '" + key + "'");
}

/// Flattens nested JSON objects into dotted keys with textual values.
inline void flatten_json(const nlohmann::json& j, const std::string& prefix,
                         std::vector<std::pair<std::string, std::string>>& out) {
    if (!j.is_object()) throw ConfigError("JSON config: expected an object at '" + prefix + "'");
    for (const auto& [k, v] : j.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten_json(v, key, out);
        } else if (v.is_array()) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) throw ConfigError("JSON config: '" + key + "' must hold numbers");
                s += (i ? "," : "") + format_double(v[i].get<double>());
            }
            out.emplace_back(key, s);
        } else if (v.is_number_integer()) {
            out.emplace_back(key, std::to_string(v.get<long long>()));
        } else if (v.is_number()) {
            out.emplace_back(key, format_double(v.get<double>()));
        } else if (v.is_string()) {
            out.emplace_back(key, v.get<std::string>());
        } else {
            throw ConfigError("JSON config: unsupported value for '" + key + "'");
        }
    }
}

}  // namespace detail

/// Key/value pairs of a text config. Blank lines and '#' comments skipped.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
        out.emplace_back(key, value);
    }
    return out;
}

/// Resolves a config from file contents (text or JSON, detected by a leading
/// '{') and KEY=VALUE overrides applied afterwards.
inline ParsedConfig parse_config(const std::string& contents, const std::vector<std::string>& overrides = {}) {
    std::vector<std::pair<std::string, std::string>> file_pairs;
    const std::string head = detail::trim(contents);
    if (!head.empty() && head.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(contents);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("JSON config: ") + e.what());
        }
        detail::flatten_json(j, "", file_pairs);
    } else {
        file_pairs = parse_key_values(contents);
    }

    ParsedConfig out;
    std::map<std::string, std::string> source;
    for (const auto& [k, v] : file_pairs) {
        detail::find_key(k).set(out.config, v);
        source[k] = "file";
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected KEY=VALUE");
        const std::string k = detail::trim(o.substr(0, eq));
        detail::find_key(k).set(out.config, detail::trim(o.substr(eq + 1)));
        source[k] = "override";
    }
    out.config.validate();
    for (const auto& k : detail::key_table()) {
        const auto it = source.find(k.name);
        out.echo.push_back({k.name, k.get(out.config), it == source.end() ? "default" : it->second});
    }
    return out;
}

inline ParsedConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::string contents;
    if (!path.empty()) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        contents = ss.str();
    }
    try {
        return parse_config(contents, overrides);
    } catch (const ConfigError& e) {
        throw ConfigError(path.empty() ? e.what() : path + ": " + e.what());
    }
}

}  // namespace lightharvest

#endif  // LIGHTHARVEST_CONFIG_HPP
