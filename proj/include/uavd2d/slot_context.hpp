#ifndef UAVD2D_SLOT_CONTEXT_HPP
#define UAVD2D_SLOT_CONTEXT_HPP

#include <vector>

#include "uavd2d/channel.hpp"
#include "uavd2d/rates.hpp"
#include "uavd2d/scenario.hpp"

namespace uavd2d {

// Everything the per-slot solvers need about one candidate geometry: channel
// snapshot, station gates, hover draw, and the energy floor that does not
// depend on the allocation.
struct SlotContext {
    const Scenario* scenario = nullptr;
    const ChannelSnapshot* snap = nullptr;
    double tau = 1.0;
    std::vector<double> gate;     // per UAV
    std::vector<double> hover_w;  // per UAV at slot speed
    double fixed_energy_j = 0.0;  // tau * sum gate * (hover + beta)
    std::vector<double> pu_direct_w;  // per direct pair power cap
    std::vector<double> pu_relay_w;   // per relay pair power cap
};

SlotContext make_slot_context(const Scenario& s, const ChannelSnapshot& snap,
                              const std::vector<Vec3>& positions,
                              const std::vector<double>& speeds);

// Denominator of the per-slot efficiency ratio, in joules.
double allocation_energy_j(const Allocation& alloc, const SlotContext& ctx);

// Min rate over total energy, in bit/J; 0 when nothing is spent or carried.
double efficiency_bit_per_joule(const Allocation& alloc, const SlotContext& ctx,
                                RateReport* report = nullptr);

}  // namespace uavd2d

#endif
