#include "uavd2d/energy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace uavd2d {

double hover_power(const UavSpec& spec, double speed_m_s, const EnergyConstants& ec) {
    if (speed_m_s < 0.0 || speed_m_s > spec.max_speed_m_s * (1.0 + 1e-9))
        throw std::invalid_argument("speed outside [0, max_speed]");
    const double thrust = spec.mass_kg * ec.gravity_m_s2;
    const double disk = 2.0 * std::numbers::pi * spec.propeller_radius_m * spec.propeller_radius_m *
                        spec.propeller_count * ec.air_density_kg_m3;
    const double rotor = std::sqrt(thrust * thrust * thrust / disk);
    const double hardware =
        (spec.power_full_speed_w - spec.power_static_w) / spec.max_speed_m_s * speed_m_s +
        spec.power_static_w;
    return rotor + hardware;
}

double uav_tx_power(int uav, const std::vector<int>& assoc,
                    const std::vector<double>& downlink_powers_w, double alpha, double beta_w) {
    if (assoc.size() != downlink_powers_w.size())
        throw std::invalid_argument("association and power vectors must align");
    double sum = 0.0;
    for (std::size_t m = 0; m < assoc.size(); ++m)
        if (assoc[m] == uav) sum += downlink_powers_w[m];
    return alpha * sum + beta_w;
}

double station_gate(const Vec3& position, const Vec3& station, double epsilon_m2) {
    if (!(epsilon_m2 > 0.0)) throw std::invalid_argument("station epsilon must be positive");
    const double d2 = distance2(position, station);
    return d2 / (d2 + epsilon_m2);
}

SlotEnergy slot_energy(const UavSpec& spec, const Vec3& position, double speed_m_s,
                       double tx_power_w, double tau_s, const EnergyConstants& ec) {
    const double gate = station_gate(position, ec.station, ec.station_epsilon_m2);
    const double pf = hover_power(spec, speed_m_s, ec);
    SlotEnergy e;
    e.consumed_j = tau_s * gate * (pf + tx_power_w);
    e.charged_j = tau_s * (1.0 - gate) * ec.charge_power_w;
    return e;
}

double return_energy_reserve(const UavSpec& spec, const Vec3& position,
                             const EnergyConstants& ec) {
    const double d = distance(position, ec.station);
    return d / spec.max_speed_m_s * hover_power(spec, spec.max_speed_m_s, ec);
}

SlotEnergy clamp_charge(SlotEnergy e, double stored_j, double capacity_j) {
    const double headroom = capacity_j - (stored_j - e.consumed_j);
    if (e.charged_j > headroom) e.charged_j = std::max(0.0, headroom);
    return e;
}

BatteryLedger::BatteryLedger(std::vector<double> initial_j, double capacity_j)
    : capacity_(capacity_j) {
    stored_.resize(initial_j.size());
    consumed_.resize(initial_j.size());
    charged_.resize(initial_j.size());
    for (std::size_t l = 0; l < initial_j.size(); ++l) {
        if (initial_j[l] < 0.0 || initial_j[l] > capacity_j)
            throw LedgerError("initial battery outside [0, capacity] for uav index " +
                              std::to_string(l));
        stored_[l].push_back(initial_j[l]);
    }
}

void BatteryLedger::commit_slot(const std::vector<SlotEnergy>& energies) {
    if (energies.size() != stored_.size())
        throw std::invalid_argument("one slot energy per UAV required");
    constexpr double kSlack = 1e-9;
    for (std::size_t l = 0; l < energies.size(); ++l) {
        const double next = stored_[l].back() + energies[l].charged_j - energies[l].consumed_j;
        if (next < -kSlack * capacity_)
            throw LedgerError("battery underflow at uav index " + std::to_string(l));
        if (next > capacity_ * (1.0 + kSlack))
            throw LedgerError("overcharge above capacity at uav index " + std::to_string(l));
    }
    for (std::size_t l = 0; l < energies.size(); ++l) {
        const double next = std::min(
            capacity_, std::max(0.0, stored_[l].back() + energies[l].charged_j - energies[l].consumed_j));
        stored_[l].push_back(next);
        consumed_[l].push_back(energies[l].consumed_j);
        charged_[l].push_back(energies[l].charged_j);
    }
}

}  // namespace uavd2d
