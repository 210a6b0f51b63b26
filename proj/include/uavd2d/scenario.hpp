#ifndef UAVD2D_SCENARIO_HPP
#define UAVD2D_SCENARIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavd2d/geometry.hpp"

namespace uavd2d {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TimeGrid {
    double slot_duration_tau = 1.0;  // seconds
    int num_slots = 10;
};

enum class PairKind { Direct, Relay };

struct UserPair {
    int pair_id = 0;
    PairKind kind = PairKind::Direct;
    std::vector<Vec3> src_trace;  // one entry per slot, z = 0
    std::vector<Vec3> dst_trace;
    double max_power_w = 0.1;  // 20 dBm default
};

struct UavSpec {
    int uav_id = 0;
    Vec3 initial_position{};
    double initial_battery_j = 7500.0;
    double max_speed_m_s = 15.0;
    double max_tx_power_w = 0.31622776601683794;  // 25 dBm
    double amp_slope_alpha = 4.0;
    double amp_offset_beta_w = 6.8;
    double mass_kg = 1.0;
    double propeller_radius_m = 0.2;
    int propeller_count = 4;
    double power_full_speed_w = 5.0;
    double power_static_w = 0.5;
};

struct RadioConstants {
    double total_bandwidth_hz = 2.0e7;
    double noise_psd_w_per_hz = 2.5e-25;
    double wavelength_m = 0.125;
    double xi_los_db = 1.0;
    double xi_nlos_db = 12.0;
    double nu1 = 9.6;
    double nu2 = 0.29;
    // Average air-ground path loss uses squared free-space distance by
    // default; false keeps the linear-distance variant for comparison runs.
    bool squared_free_space = true;
};

struct EnergyConstants {
    double battery_capacity_j = 15000.0;
    double charge_power_w = 10.0;
    Vec3 station{400.0, 400.0, 60.0};
    double station_epsilon_m2 = 1.0;
    double gravity_m_s2 = 9.81;
    double air_density_kg_m3 = 1.225;
};

struct Region {
    double x_min = 0.0, x_max = 800.0;
    double y_min = 0.0, y_max = 800.0;
    double uav_z_min = 10.0, uav_z_max = 120.0;
    double user_speed_cap_m_s = 1.5;
    double station_dock_radius_m = 1.0;
};

struct Scenario {
    TimeGrid time;
    RadioConstants radio;
    EnergyConstants energy;
    Region region;
    std::vector<UavSpec> uavs;
    std::vector<UserPair> pairs;
    std::uint64_t rng_seed = 0;

    std::vector<int> direct_indices() const;
    std::vector<int> relay_indices() const;
    int num_direct() const;
    int num_relay() const;
};

double dbm_to_watts(double dbm);

// Throws ValidationError naming the violated rule and the offending entity.
void validate_scenario(const Scenario& s);

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

Scenario load_scenario(const std::string& path);
void write_scenario(const Scenario& s, const std::string& path);

// Users uniform in the region at z=0 with waypoint mobility; 5 UAVs take the
// reference initial placement and battery split, other counts are placed
// uniformly at 60 m with half-full batteries.
Scenario synthesize_random_scenario(int num_direct, int num_relay, int num_uavs,
                                    std::uint64_t seed, int num_slots = 10,
                                    double tau = 1.0);

// Stable content hash of the canonical JSON form, as a 16-digit hex string.
std::string scenario_digest(const Scenario& s);

}  // namespace uavd2d

#endif
