// Line-of-sight VLC downlink gains, Rayleigh/path-loss RF uplink gains and
// uniform user placement.
#ifndef LIGHTHARVEST_CHANNEL_HPP
#define LIGHTHARVEST_CHANNEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightharvest {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Rectangular room with the LED on the ceiling and the RF receiver inside.
/// Users sit on a plane at `user_height` above the floor.
struct RoomGeometry {
    double length = 5.0;
    double width = 5.0;
    double height = 3.0;
    Vec3 led_position{2.5, 2.5, 3.0};
    Vec3 rf_receiver_position{4.0, 1.0, 1.0};
    double user_height = 1.0;

    void validate() const {
        if (!(length > 0.0 && width > 0.0 && height > 0.0))
            throw std::invalid_argument("room dimensions must be positive");
        auto inside = [&](const Vec3& p) {
            return p[0] >= 0.0 && p[0] <= length && p[1] >= 0.0 && p[1] <= width &&
                   p[2] >= 0.0 && p[2] <= height;
        };
        if (!inside(led_position)) throw std::invalid_argument("LED lies outside the room");
        if (!inside(rf_receiver_position))
            throw std::invalid_argument("RF receiver lies outside the room");
        if (!(user_height >= 0.0 && user_height < height))
            throw std::invalid_argument("user height must be in [0, room height)");
        if (!(user_height < led_position[2]))
            throw std::invalid_argument("users must sit below the LED");
    }

    bool contains_floor_point(const Vec2& p) const {
        return p[0] >= 0.0 && p[0] <= length && p[1] >= 0.0 && p[1] <= width;
    }
};

/// Photodetector and LED optics.
struct OpticalFrontend {
    double detector_area = 1e-4;                               // A_p [m^2]
    double responsivity = 0.53;                                // R_p [A/W]
    double semi_angle_half = std::numbers::pi / 3.0;           // Phi_1/2 [rad]
    double fov_half = std::numbers::pi / 3.0;                  // psi [rad]
    double optical_filter_gain = 1.0;                          // T_s
    double refractive_index = 1.5;                             // n
    double conversion_efficiency_xi = 1.0;                     // xi

    void validate() const {
        constexpr double half_pi = std::numbers::pi / 2.0;
        if (!(detector_area > 0.0)) throw std::invalid_argument("detector area must be positive");
        if (!(responsivity > 0.0)) throw std::invalid_argument("responsivity must be positive");
        if (!(semi_angle_half > 0.0 && semi_angle_half < half_pi))
            throw std::invalid_argument("LED semi-angle must lie in (0, 90) degrees");
        if (!(fov_half > 0.0 && fov_half <= half_pi))
            throw std::invalid_argument("FOV half-angle must lie in (0, 90] degrees");
        if (!(optical_filter_gain > 0.0)) throw std::invalid_argument("filter gain must be positive");
        if (!(refractive_index >= 1.0)) throw std::invalid_argument("refractive index must be >= 1");
        if (!(conversion_efficiency_xi > 0.0))
            throw std::invalid_argument("conversion efficiency must be positive");
    }
};

struct UserDrop {
    std::vector<Vec2> positions;
};

/// Per-user channel state for one drop.
struct ChannelRealization {
    std::vector<double> vlc_gain;       // g_k
    std::vector<double> rf_power_gain;  // |h_k|^2

    std::size_t size() const { return vlc_gain.size(); }
};

/// m = -1 / log2(cos(Phi_1/2)).
inline double lambertian_order(double semi_angle_half) {
    const double c = std::cos(semi_angle_half);
    if (!(semi_angle_half > 0.0) || !(c > 0.0) || !(c < 1.0))
        throw std::domain_error("lambertian_order: semi-angle must lie in (0, pi/2)");
    return -1.0 / std::log2(c);
}

/// Non-imaging concentrator gain, constant n^2 / sin^2(psi) across the FOV.
inline double concentrator_gain(double incidence, double refractive_index, double fov_half) {
    if (!(incidence >= 0.0)) throw std::domain_error("concentrator_gain: negative incidence");
    if (incidence > fov_half) return 0.0;
    const double s = std::sin(fov_half);
    return refractive_index * refractive_index / (s * s);
}

/// LOS DC gain from the ceiling LED (facing down) to an upward-facing
/// detector at `user_position`. Zero outside the FOV.
inline double vlc_gain(const Vec2& user_position, const RoomGeometry& room,
                       const OpticalFrontend& fe) {
    const double vertical = room.led_position[2] - room.user_height;
    const double dx = user_position[0] - room.led_position[0];
    const double dy = user_position[1] - room.led_position[1];
    const double dist2 = vertical * vertical + dx * dx + dy * dy;
    const double cos_angle = vertical / std::sqrt(dist2);
    const double incidence = std::acos(std::fmin(cos_angle, 1.0));
    const double tf = concentrator_gain(incidence, fe.refractive_index, fe.fov_half);
    if (tf == 0.0) return 0.0;
    const double m = lambertian_order(fe.semi_angle_half);
    return (m + 1.0) * fe.detector_area * fe.responsivity / (2.0 * std::numbers::pi * dist2) *
           std::pow(cos_angle, m) * fe.optical_filter_gain * tf * cos_angle;
}

/// 3-D distance between a user (at user height) and the RF receiver.
inline double rf_distance(const Vec2& user_position, const RoomGeometry& room) {
    const double dx = user_position[0] - room.rf_receiver_position[0];
    const double dy = user_position[1] - room.rf_receiver_position[1];
    const double dz = room.user_height - room.rf_receiver_position[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// |h|^2 = X d^{-alpha} with X ~ Exp(1) (unit-mean Rayleigh power).
template <class Rng>
double rf_power_gain(const Vec2& user_position, const RoomGeometry& room,
                     double path_loss_exponent, Rng& rng) {
    if (!(path_loss_exponent >= 0.0))
        throw std::invalid_argument("path loss exponent must be nonnegative");
    std::exponential_distribution<double> fading(1.0);
    const double x = fading(rng);
    const double d = rf_distance(user_position, room);
    // Users co-located with the receiver would see an unbounded gain.
    const double d_eff = std::fmax(d, 1e-3);
    return x * std::pow(d_eff, -path_loss_exponent);
}

template <class Rng>
UserDrop place_users_uniform(std::size_t k_users, const RoomGeometry& room, Rng& rng) {
    if (k_users < 1) throw std::invalid_argument("place_users_uniform: need at least one user");
    std::uniform_real_distribution<double> ux(0.0, room.length);
    std::uniform_real_distribution<double> uy(0.0, room.width);
    UserDrop drop;
    drop.positions.reserve(k_users);
    for (std::size_t k = 0; k < k_users; ++k) {
        const double x = ux(rng);
        const double y = uy(rng);
        drop.positions.push_back({x, y});
    }
    return drop;
}

/// Channel realization for a drop: deterministic VLC gains plus one fading
/// draw per user, in user order.
template <class Rng>
ChannelRealization realize_channels(const UserDrop& drop, const RoomGeometry& room,
                                    const OpticalFrontend& fe, double path_loss_exponent,
                                    Rng& rng) {
    ChannelRealization ch;
    ch.vlc_gain.reserve(drop.positions.size());
    ch.rf_power_gain.reserve(drop.positions.size());
    for (const auto& p : drop.positions) {
        ch.vlc_gain.push_back(vlc_gain(p, room, fe));
        ch.rf_power_gain.push_back(rf_power_gain(p, room, path_loss_exponent, rng));
    }
    return ch;
}

/// Independent, reproducible stream for (seed, drop, user). Streams for
/// user k do not depend on how many users a drop has, so drops with K+1
/// users extend the K-user drop.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t drop, std::uint64_t user) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(drop), static_cast<std::uint32_t>(drop >> 32),
                      static_cast<std::uint32_t>(user), static_cast<std::uint32_t>(user >> 32),
                      0x5eedu};
    return std::mt19937_64(seq);
}

}  // namespace lightharvest

#endif  // LIGHTHARVEST_CHANNEL_HPP
