#ifndef UAVD2D_ENERGY_HPP
#define UAVD2D_ENERGY_HPP

#include <vector>

#include "uavd2d/geometry.hpp"
#include "uavd2d/scenario.hpp"

namespace uavd2d {

struct SlotEnergy {
    double consumed_j = 0.0;
    double charged_j = 0.0;
};

// Rotor-disk hover term plus a hardware draw affine in horizontal speed.
double hover_power(const UavSpec& spec, double speed_m_s, const EnergyConstants& ec);

// Linear amplifier model over the downlink powers UAV `uav` actually serves;
// assoc[m] is the serving UAV index of relay pair m, or -1.
double uav_tx_power(int uav, const std::vector<int>& assoc,
                    const std::vector<double>& downlink_powers_w, double alpha, double beta_w);

// 0 exactly at the station, saturating toward 1 away from it.
double station_gate(const Vec3& position, const Vec3& station, double epsilon_m2);

SlotEnergy slot_energy(const UavSpec& spec, const Vec3& position, double speed_m_s,
                       double tx_power_w, double tau_s, const EnergyConstants& ec);

// Energy needed to fly back to the station at top speed from here.
double return_energy_reserve(const UavSpec& spec, const Vec3& position,
                             const EnergyConstants& ec);

// Caps the charge draw so the battery never exceeds capacity; a full battery
// draws nothing.
SlotEnergy clamp_charge(SlotEnergy e, double stored_j, double capacity_j);

struct LedgerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stored-energy recursion S[t] = S[t-1] + E_ch - E_c per UAV, with full
// history kept for export and invariant checks. Slot 0 is the initial state.
class BatteryLedger {
public:
    BatteryLedger(std::vector<double> initial_j, double capacity_j);

    int num_uavs() const { return static_cast<int>(stored_.size()); }
    int committed_slots() const { return static_cast<int>(consumed_.empty() ? 0 : consumed_[0].size()); }
    double capacity() const { return capacity_; }

    double stored(int uav) const { return stored_[uav].back(); }
    double stored_at(int uav, int slot) const { return stored_[uav][slot]; }
    double consumed_at(int uav, int slot) const { return consumed_[uav][slot - 1]; }
    double charged_at(int uav, int slot) const { return charged_[uav][slot - 1]; }

    // Throws LedgerError on battery underflow or overcharge; callers wanting
    // clamp semantics apply clamp_charge first.
    void commit_slot(const std::vector<SlotEnergy>& energies);

private:
    double capacity_;
    std::vector<std::vector<double>> stored_;
    std::vector<std::vector<double>> consumed_;
    std::vector<std::vector<double>> charged_;
};

}  // namespace uavd2d

#endif
