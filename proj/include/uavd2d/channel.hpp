#ifndef UAVD2D_CHANNEL_HPP
#define UAVD2D_CHANNEL_HPP

#include <vector>

#include "uavd2d/geometry.hpp"
#include "uavd2d/scenario.hpp"

namespace uavd2d {

// All link gains for one slot at given UAV positions. Matrices are row-major
// and sized to the scenario's direct/relay pair counts.
struct ChannelSnapshot {
    int num_direct = 0;  // N
    int num_relay = 0;   // M
    int num_uavs = 0;    // L
    // (k, n): transmitter of direct pair k -> receiver of direct pair n.
    // Diagonal holds the wanted-signal gain.
    std::vector<double> d2d_gains;
    // (m, l): relay-pair source m -> UAV l.
    std::vector<double> uplink_gains;
    // (l, m): UAV l -> relay-pair destination m.
    std::vector<double> downlink_gains;

    double d2d(int k, int n) const { return d2d_gains[k * num_direct + n]; }
    double uplink(int m, int l) const { return uplink_gains[m * num_uavs + l]; }
    double downlink(int l, int m) const { return downlink_gains[l * num_relay + m]; }
};

double elevation_angle_deg(const Vec3& uav, const Vec3& user);

double los_probability(double theta_deg, double nu1, double nu2);

// Probability-averaged path loss of an air-ground link (linear, >= 1 in
// practice). Gain is its reciprocal.
double air_ground_path_loss(double delta_m, const RadioConstants& radio, double theta_deg);

double air_ground_gain(const Vec3& uav, const Vec3& user, const RadioConstants& radio);

double d2d_gain(const Vec3& src, const Vec3& dst, const RadioConstants& radio);

ChannelSnapshot make_snapshot(const Scenario& s, const std::vector<Vec3>& uav_positions, int t);

}  // namespace uavd2d

#endif
