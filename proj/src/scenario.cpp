#include "uavd2d/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavd2d/rng.hpp"

namespace uavd2d {

using ordered_json = nlohmann::ordered_json;

std::vector<int> Scenario::direct_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i)
        if (pairs[i].kind == PairKind::Direct) out.push_back(i);
    return out;
}

std::vector<int> Scenario::relay_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i)
        if (pairs[i].kind == PairKind::Relay) out.push_back(i);
    return out;
}

int Scenario::num_direct() const {
    return static_cast<int>(std::count_if(pairs.begin(), pairs.end(), [](const UserPair& p) {
        return p.kind == PairKind::Direct;
    }));
}

int Scenario::num_relay() const {
    return static_cast<int>(pairs.size()) - num_direct();
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void check_finite(const Vec3& v, const std::string& what) {
    if (!is_finite(v)) fail(what + ": non-finite coordinates");
}

void check_positive(double v, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(what + ": must be positive");
}

}  // namespace

void validate_scenario(const Scenario& s) {
    if (!(s.time.slot_duration_tau > 0.0)) fail("time.slot_duration_s: must be positive");
    if (s.time.num_slots < 1) fail("time.num_slots: must be >= 1");

    check_positive(s.radio.total_bandwidth_hz, "radio.total_bandwidth_hz");
    check_positive(s.radio.noise_psd_w_per_hz, "radio.noise_psd_w_per_hz");
    check_positive(s.radio.wavelength_m, "radio.wavelength_m");
    check_positive(s.radio.nu1, "radio.nu1");
    check_positive(s.radio.nu2, "radio.nu2");
    if (s.radio.xi_nlos_db < s.radio.xi_los_db)
        fail("radio: xi_nlos_db must be >= xi_los_db");

    check_positive(s.energy.battery_capacity_j, "energy.battery_capacity_j");
    check_positive(s.energy.station_epsilon_m2, "energy.station_epsilon_m2");
    check_positive(s.energy.gravity_m_s2, "energy.gravity_m_s2");
    check_positive(s.energy.air_density_kg_m3, "energy.air_density_kg_m3");
    if (s.energy.charge_power_w < 0.0) fail("energy.charge_power_w: must be >= 0");
    check_finite(s.energy.station, "energy.station");

    if (!(s.region.x_min < s.region.x_max) || !(s.region.y_min < s.region.y_max))
        fail("region: empty bounding box");
    if (!(s.region.uav_z_min > 0.0) || !(s.region.uav_z_min <= s.region.uav_z_max))
        fail("region: invalid UAV altitude band");
    check_positive(s.region.user_speed_cap_m_s, "region.user_speed_cap_m_s");

    for (const auto& u : s.uavs) {
        const std::string who = "uav " + std::to_string(u.uav_id);
        check_finite(u.initial_position, who);
        if (u.initial_position.z < 0.0) fail(who + ": negative altitude");
        if (u.initial_battery_j < 0.0 || u.initial_battery_j > s.energy.battery_capacity_j)
            fail(who + ": initial battery outside [0, capacity]");
        check_positive(u.max_speed_m_s, who + " max_speed_m_s");
        check_positive(u.max_tx_power_w, who + " max_tx_power_w");
        check_positive(u.amp_slope_alpha, who + " amp_slope_alpha");
        check_positive(u.amp_offset_beta_w, who + " amp_offset_beta_w");
        check_positive(u.mass_kg, who + " mass_kg");
        check_positive(u.propeller_radius_m, who + " propeller_radius_m");
        if (u.propeller_count < 1) fail(who + ": propeller_count must be >= 1");
        check_positive(u.power_static_w, who + " power_static_w");
        if (u.power_full_speed_w < u.power_static_w)
            fail(who + ": power_full_speed_w must be >= power_static_w");
    }
    for (std::size_t i = 0; i < s.uavs.size(); ++i)
        for (std::size_t j = i + 1; j < s.uavs.size(); ++j)
            if (s.uavs[i].uav_id == s.uavs[j].uav_id)
                fail("uav " + std::to_string(s.uavs[i].uav_id) + ": duplicate uav_id");

    bool any_relay = false;
    const double step_cap =
        s.region.user_speed_cap_m_s * s.time.slot_duration_tau * (1.0 + 1e-9);
    for (const auto& p : s.pairs) {
        const std::string who = "pair " + std::to_string(p.pair_id);
        if (p.kind == PairKind::Relay) any_relay = true;
        check_positive(p.max_power_w, who + " max_power_w");
        for (const auto* trace : {&p.src_trace, &p.dst_trace}) {
            const char* side = (trace == &p.src_trace) ? "src" : "dst";
            if (static_cast<int>(trace->size()) != s.time.num_slots)
                fail(who + ": " + side + "_trace must have exactly " +
                     std::to_string(s.time.num_slots) + " entries");
            for (std::size_t t = 0; t < trace->size(); ++t) {
                const Vec3& v = (*trace)[t];
                check_finite(v, who);
                if (v.z != 0.0) fail(who + ": " + side + " z must be 0");
                if (v.x < s.region.x_min || v.x > s.region.x_max || v.y < s.region.y_min ||
                    v.y > s.region.y_max)
                    fail(who + ": " + side + " trace leaves the bounding region at slot " +
                         std::to_string(t + 1));
                if (t > 0 && distance(v, (*trace)[t - 1]) > step_cap)
                    fail(who + ": " + side + " per-slot displacement exceeds speed cap at slot " +
                         std::to_string(t + 1));
            }
        }
    }
    for (std::size_t i = 0; i < s.pairs.size(); ++i)
        for (std::size_t j = i + 1; j < s.pairs.size(); ++j)
            if (s.pairs[i].pair_id == s.pairs[j].pair_id)
                fail("pair " + std::to_string(s.pairs[i].pair_id) + ": duplicate pair_id");

    if (any_relay && s.uavs.empty()) fail("scenario: relay pairs present but no UAVs");
}

namespace {

ordered_json vec_to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const ordered_json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ParseError(what + ": expected [x, y, z]");
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Power fields accept "<name>_w" or "<name>_dbm"; dBm converts at the boundary.
double read_power(const ordered_json& j, const std::string& base, double fallback_w) {
    const std::string w_key = base + "_w";
    const std::string dbm_key = base + "_dbm";
    if (j.contains(w_key) && j.contains(dbm_key))
        throw ParseError(base + ": give either _w or _dbm, not both");
    if (j.contains(w_key)) return j[w_key].get<double>();
    if (j.contains(dbm_key)) return dbm_to_watts(j[dbm_key].get<double>());
    return fallback_w;
}

template <typename T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
    if (j.contains(key)) return j[key].get<T>();
    return fallback;
}

std::vector<Vec3> trace_from_json(const ordered_json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of [x, y, z]");
    std::vector<Vec3> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(vec_from_json(e, what));
    return out;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    Scenario s;
    try {
        if (j.contains("time")) {
            const auto& t = j["time"];
            s.time.slot_duration_tau = get_or(t, "slot_duration_s", s.time.slot_duration_tau);
            s.time.num_slots = get_or(t, "num_slots", s.time.num_slots);
        }
        if (j.contains("radio")) {
            const auto& r = j["radio"];
            s.radio.total_bandwidth_hz = get_or(r, "total_bandwidth_hz", s.radio.total_bandwidth_hz);
            s.radio.noise_psd_w_per_hz = get_or(r, "noise_psd_w_per_hz", s.radio.noise_psd_w_per_hz);
            s.radio.wavelength_m = get_or(r, "wavelength_m", s.radio.wavelength_m);
            s.radio.xi_los_db = get_or(r, "xi_los_db", s.radio.xi_los_db);
            s.radio.xi_nlos_db = get_or(r, "xi_nlos_db", s.radio.xi_nlos_db);
            s.radio.nu1 = get_or(r, "nu1", s.radio.nu1);
            s.radio.nu2 = get_or(r, "nu2", s.radio.nu2);
            s.radio.squared_free_space =
                get_or(r, "squared_free_space", s.radio.squared_free_space);
        }
        if (j.contains("energy")) {
            const auto& e = j["energy"];
            s.energy.battery_capacity_j = get_or(e, "battery_capacity_j", s.energy.battery_capacity_j);
            s.energy.charge_power_w = get_or(e, "charge_power_w", s.energy.charge_power_w);
            if (e.contains("station")) s.energy.station = vec_from_json(e["station"], "energy.station");
            s.energy.station_epsilon_m2 = get_or(e, "station_epsilon_m2", s.energy.station_epsilon_m2);
            s.energy.gravity_m_s2 = get_or(e, "gravity_m_s2", s.energy.gravity_m_s2);
            s.energy.air_density_kg_m3 = get_or(e, "air_density_kg_m3", s.energy.air_density_kg_m3);
        }
        if (j.contains("region")) {
            const auto& r = j["region"];
            s.region.x_min = get_or(r, "x_min", s.region.x_min);
            s.region.x_max = get_or(r, "x_max", s.region.x_max);
            s.region.y_min = get_or(r, "y_min", s.region.y_min);
            s.region.y_max = get_or(r, "y_max", s.region.y_max);
            s.region.uav_z_min = get_or(r, "uav_z_min", s.region.uav_z_min);
            s.region.uav_z_max = get_or(r, "uav_z_max", s.region.uav_z_max);
            s.region.user_speed_cap_m_s = get_or(r, "user_speed_cap_m_s", s.region.user_speed_cap_m_s);
            s.region.station_dock_radius_m =
                get_or(r, "station_dock_radius_m", s.region.station_dock_radius_m);
        }
        s.rng_seed = get_or<std::uint64_t>(j, "rng_seed", 0);
        if (j.contains("uavs")) {
            for (const auto& ju : j["uavs"]) {
                UavSpec u;
                u.uav_id = get_or(ju, "uav_id", static_cast<int>(s.uavs.size()) + 1);
                if (ju.contains("initial_position"))
                    u.initial_position = vec_from_json(ju["initial_position"], "uav initial_position");
                u.initial_battery_j = get_or(ju, "initial_battery_j", u.initial_battery_j);
                u.max_speed_m_s = get_or(ju, "max_speed_m_s", u.max_speed_m_s);
                u.max_tx_power_w = read_power(ju, "max_tx_power", u.max_tx_power_w);
                u.amp_slope_alpha = get_or(ju, "amp_slope_alpha", u.amp_slope_alpha);
                u.amp_offset_beta_w = get_or(ju, "amp_offset_beta_w", u.amp_offset_beta_w);
                u.mass_kg = get_or(ju, "mass_kg", u.mass_kg);
                u.propeller_radius_m = get_or(ju, "propeller_radius_m", u.propeller_radius_m);
                u.propeller_count = get_or(ju, "propeller_count", u.propeller_count);
                u.power_full_speed_w = get_or(ju, "power_full_speed_w", u.power_full_speed_w);
                u.power_static_w = get_or(ju, "power_static_w", u.power_static_w);
                s.uavs.push_back(u);
            }
        }
        if (j.contains("pairs")) {
            for (const auto& jp : j["pairs"]) {
                UserPair p;
                p.pair_id = get_or(jp, "pair_id", static_cast<int>(s.pairs.size()) + 1);
                const std::string kind = get_or<std::string>(jp, "kind", "direct");
                if (kind == "direct") {
                    p.kind = PairKind::Direct;
                } else if (kind == "relay") {
                    p.kind = PairKind::Relay;
                } else {
                    throw ParseError("pair " + std::to_string(p.pair_id) +
                                     ": kind must be \"direct\" or \"relay\"");
                }
                p.max_power_w = read_power(jp, "max_power", p.max_power_w);
                if (!jp.contains("src_trace") || !jp.contains("dst_trace"))
                    throw ParseError("pair " + std::to_string(p.pair_id) +
                                     ": src_trace and dst_trace are required");
                p.src_trace = trace_from_json(jp["src_trace"], "pair src_trace");
                p.dst_trace = trace_from_json(jp["dst_trace"], "pair dst_trace");
                s.pairs.push_back(p);
            }
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

std::string scenario_to_json_text(const Scenario& s) {
    ordered_json j;
    j["time"] = {{"slot_duration_s", s.time.slot_duration_tau}, {"num_slots", s.time.num_slots}};
    j["radio"] = {{"total_bandwidth_hz", s.radio.total_bandwidth_hz},
                  {"noise_psd_w_per_hz", s.radio.noise_psd_w_per_hz},
                  {"wavelength_m", s.radio.wavelength_m},
                  {"xi_los_db", s.radio.xi_los_db},
                  {"xi_nlos_db", s.radio.xi_nlos_db},
                  {"nu1", s.radio.nu1},
                  {"nu2", s.radio.nu2},
                  {"squared_free_space", s.radio.squared_free_space}};
    j["energy"] = {{"battery_capacity_j", s.energy.battery_capacity_j},
                   {"charge_power_w", s.energy.charge_power_w},
                   {"station", vec_to_json(s.energy.station)},
                   {"station_epsilon_m2", s.energy.station_epsilon_m2},
                   {"gravity_m_s2", s.energy.gravity_m_s2},
                   {"air_density_kg_m3", s.energy.air_density_kg_m3}};
    j["region"] = {{"x_min", s.region.x_min},
                   {"x_max", s.region.x_max},
                   {"y_min", s.region.y_min},
                   {"y_max", s.region.y_max},
                   {"uav_z_min", s.region.uav_z_min},
                   {"uav_z_max", s.region.uav_z_max},
                   {"user_speed_cap_m_s", s.region.user_speed_cap_m_s},
                   {"station_dock_radius_m", s.region.station_dock_radius_m}};
    j["rng_seed"] = s.rng_seed;
    j["uavs"] = ordered_json::array();
    for (const auto& u : s.uavs) {
        j["uavs"].push_back({{"uav_id", u.uav_id},
                             {"initial_position", vec_to_json(u.initial_position)},
                             {"initial_battery_j", u.initial_battery_j},
                             {"max_speed_m_s", u.max_speed_m_s},
                             {"max_tx_power_w", u.max_tx_power_w},
                             {"amp_slope_alpha", u.amp_slope_alpha},
                             {"amp_offset_beta_w", u.amp_offset_beta_w},
                             {"mass_kg", u.mass_kg},
                             {"propeller_radius_m", u.propeller_radius_m},
                             {"propeller_count", u.propeller_count},
                             {"power_full_speed_w", u.power_full_speed_w},
                             {"power_static_w", u.power_static_w}});
    }
    j["pairs"] = ordered_json::array();
    for (const auto& p : s.pairs) {
        ordered_json jp = {{"pair_id", p.pair_id},
                           {"kind", p.kind == PairKind::Direct ? "direct" : "relay"},
                           {"max_power_w", p.max_power_w}};
        jp["src_trace"] = ordered_json::array();
        for (const auto& v : p.src_trace) jp["src_trace"].push_back(vec_to_json(v));
        jp["dst_trace"] = ordered_json::array();
        for (const auto& v : p.dst_trace) jp["dst_trace"].push_back(vec_to_json(v));
        j["pairs"].push_back(std::move(jp));
    }
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

void write_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json_text(s);
}

namespace {

// Waypoint walk: head toward a random goal at a per-leg speed below the cap,
// drawing a new goal on arrival. Keeps every step inside the region.
std::vector<Vec3> make_trace(RngStream& rng, const Region& reg, int num_slots, double tau) {
    std::vector<Vec3> trace;
    trace.reserve(num_slots);
    Vec3 pos{rng.uniform(reg.x_min, reg.x_max), rng.uniform(reg.y_min, reg.y_max), 0.0};
    Vec3 goal{rng.uniform(reg.x_min, reg.x_max), rng.uniform(reg.y_min, reg.y_max), 0.0};
    double speed = rng.uniform(0.3, 1.0) * reg.user_speed_cap_m_s;
    trace.push_back(pos);
    for (int t = 1; t < num_slots; ++t) {
        double remaining = speed * tau;
        while (remaining > 1e-12) {
            const double d = distance(pos, goal);
            if (d <= remaining) {
                pos = goal;
                remaining -= d;
                goal = Vec3{rng.uniform(reg.x_min, reg.x_max), rng.uniform(reg.y_min, reg.y_max), 0.0};
                speed = rng.uniform(0.3, 1.0) * reg.user_speed_cap_m_s;
                if (d == 0.0) break;
            } else {
                const double f = remaining / d;
                pos = Vec3{pos.x + f * (goal.x - pos.x), pos.y + f * (goal.y - pos.y), 0.0};
                remaining = 0.0;
            }
        }
        trace.push_back(pos);
    }
    return trace;
}

}  // namespace

Scenario synthesize_random_scenario(int num_direct, int num_relay, int num_uavs,
                                    std::uint64_t seed, int num_slots, double tau) {
    if (num_direct < 0 || num_relay < 0 || num_uavs < 0)
        throw ValidationError("synthesize: counts must be >= 0");
    if (num_slots < 1) throw ValidationError("synthesize: num_slots must be >= 1");
    Scenario s;
    s.time.slot_duration_tau = tau;
    s.time.num_slots = num_slots;
    s.rng_seed = seed;

    RngStream users = derive_stream(seed, "scenario/users");
    int next_id = 1;
    for (int i = 0; i < num_direct + num_relay; ++i) {
        UserPair p;
        p.pair_id = next_id++;
        p.kind = i < num_direct ? PairKind::Direct : PairKind::Relay;
        p.max_power_w = dbm_to_watts(20.0);
        p.src_trace = make_trace(users, s.region, num_slots, tau);
        p.dst_trace = make_trace(users, s.region, num_slots, tau);
        s.pairs.push_back(std::move(p));
    }

    RngStream uavs = derive_stream(seed, "scenario/uavs");
    const Vec3 reference_positions[5] = {{400, 400, 60}, {200, 200, 60}, {200, 600, 60},
                                         {600, 200, 60}, {600, 600, 60}};
    for (int l = 0; l < num_uavs; ++l) {
        UavSpec u;
        u.uav_id = l + 1;
        if (num_uavs == 5) {
            u.initial_position = reference_positions[l];
            u.initial_battery_j =
                l == 0 ? s.energy.battery_capacity_j : 0.5 * s.energy.battery_capacity_j;
        } else {
            u.initial_position = Vec3{uavs.uniform(s.region.x_min, s.region.x_max),
                                      uavs.uniform(s.region.y_min, s.region.y_max), 60.0};
            u.initial_battery_j = 0.5 * s.energy.battery_capacity_j;
        }
        s.uavs.push_back(u);
    }
    validate_scenario(s);
    return s;
}

std::string scenario_digest(const Scenario& s) {
    const std::uint64_t h = fnv1a(scenario_to_json_text(s));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace uavd2d
