#ifndef UAVD2D_RATES_HPP
#define UAVD2D_RATES_HPP

#include <vector>

#include "uavd2d/channel.hpp"
#include "uavd2d/scenario.hpp"

namespace uavd2d {

// One slot's resource decision. Relay-pair vectors are indexed like the
// snapshot's relay axis; assoc[m] is the serving UAV index or -1.
struct Allocation {
    double bd_hz = 0.0;
    std::vector<double> br_hz;
    std::vector<double> d2d_powers_w;
    std::vector<double> uplink_powers_w;
    std::vector<double> downlink_powers_w;
    std::vector<int> assoc;
};

struct RateReport {
    std::vector<double> direct_rates;    // R^d_n
    std::vector<double> uplink_rates;    // user -> UAV
    std::vector<double> downlink_rates;  // UAV -> user
    std::vector<double> relay_rates;     // end-to-end, half the bottleneck hop
    double min_rate = 0.0;
};

double relay_uplink_rate(double br_hz, double power_w, double gain, double n0);
double relay_downlink_rate(double br_hz, double power_w, double gain, double n0);
double df_end_to_end(double uplink_rate, double downlink_rate);
double d2d_rate(int n, const Allocation& alloc, const ChannelSnapshot& snap, double n0);

// Checks the Allocation against power, bandwidth, and association limits.
// Returns an empty string when valid, else a description of the violation.
std::string allocation_violation(const Allocation& alloc, const ChannelSnapshot& snap,
                                 const Scenario& s);

RateReport evaluate_rates(const Allocation& alloc, const ChannelSnapshot& snap, const Scenario& s);

}  // namespace uavd2d

#endif
