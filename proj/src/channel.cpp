#include "uavd2d/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uavd2d {

double elevation_angle_deg(const Vec3& uav, const Vec3& user) {
    const double delta = distance(uav, user);
    if (delta <= 0.0) throw std::invalid_argument("elevation angle undefined for coincident points");
    const double s = std::min(1.0, std::max(-1.0, (uav.z - user.z) / delta));
    return (180.0 / std::numbers::pi) * std::asin(s);
}

double los_probability(double theta_deg, double nu1, double nu2) {
    return 1.0 / (1.0 + nu1 * std::exp(-nu2 * (theta_deg - nu1)));
}

namespace {

double free_space_factor(double delta_m, const RadioConstants& radio) {
    const double f = 4.0 * std::numbers::pi * delta_m / radio.wavelength_m;
    return radio.squared_free_space ? f * f : f;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

double air_ground_path_loss(double delta_m, const RadioConstants& radio, double theta_deg) {
    if (!(delta_m > 0.0)) throw std::invalid_argument("path loss requires positive distance");
    const double p = los_probability(theta_deg, radio.nu1, radio.nu2);
    const double fs = free_space_factor(delta_m, radio);
    return p * db_to_linear(radio.xi_los_db) * fs + (1.0 - p) * db_to_linear(radio.xi_nlos_db) * fs;
}

double air_ground_gain(const Vec3& uav, const Vec3& user, const RadioConstants& radio) {
    const double theta = elevation_angle_deg(uav, user);
    return 1.0 / air_ground_path_loss(distance(uav, user), radio, theta);
}

double d2d_gain(const Vec3& src, const Vec3& dst, const RadioConstants& radio) {
    const double delta = distance(src, dst);
    if (!(delta > 0.0)) throw std::invalid_argument("d2d gain undefined for coincident points");
    return 1.0 / (db_to_linear(radio.xi_nlos_db) * free_space_factor(delta, radio));
}

ChannelSnapshot make_snapshot(const Scenario& s, const std::vector<Vec3>& uav_positions, int t) {
    if (t < 1 || t > s.time.num_slots) throw std::out_of_range("slot index out of range");
    if (uav_positions.size() != s.uavs.size())
        throw std::invalid_argument("one position per UAV required");
    const auto direct = s.direct_indices();
    const auto relay = s.relay_indices();
    ChannelSnapshot snap;
    snap.num_direct = static_cast<int>(direct.size());
    snap.num_relay = static_cast<int>(relay.size());
    snap.num_uavs = static_cast<int>(uav_positions.size());
    snap.d2d_gains.resize(static_cast<std::size_t>(snap.num_direct) * snap.num_direct);
    snap.uplink_gains.resize(static_cast<std::size_t>(snap.num_relay) * snap.num_uavs);
    snap.downlink_gains.resize(static_cast<std::size_t>(snap.num_uavs) * snap.num_relay);

    const int idx = t - 1;
    for (int k = 0; k < snap.num_direct; ++k) {
        const Vec3& src = s.pairs[direct[k]].src_trace[idx];
        for (int n = 0; n < snap.num_direct; ++n) {
            const Vec3& dst = s.pairs[direct[n]].dst_trace[idx];
            snap.d2d_gains[k * snap.num_direct + n] = d2d_gain(src, dst, s.radio);
        }
    }
    for (int m = 0; m < snap.num_relay; ++m) {
        const Vec3& src = s.pairs[relay[m]].src_trace[idx];
        const Vec3& dst = s.pairs[relay[m]].dst_trace[idx];
        for (int l = 0; l < snap.num_uavs; ++l) {
            snap.uplink_gains[m * snap.num_uavs + l] =
                air_ground_gain(uav_positions[l], src, s.radio);
            snap.downlink_gains[l * snap.num_relay + m] =
                air_ground_gain(uav_positions[l], dst, s.radio);
        }
    }
    return snap;
}

}  // namespace uavd2d
