#include "uavd2d/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uavd2d {

namespace {

double shannon(double b_hz, double power_w, double gain, double n0) {
    if (b_hz <= 0.0) {
        if (power_w > 0.0) throw std::invalid_argument("rate undefined: zero bandwidth with power");
        return 0.0;
    }
    return b_hz * std::log2(1.0 + power_w * gain / (b_hz * n0));
}

}  // namespace

double relay_uplink_rate(double br_hz, double power_w, double gain, double n0) {
    return shannon(br_hz, power_w, gain, n0);
}

double relay_downlink_rate(double br_hz, double power_w, double gain, double n0) {
    return shannon(br_hz, power_w, gain, n0);
}

double df_end_to_end(double uplink_rate, double downlink_rate) {
    return 0.5 * std::min(uplink_rate, downlink_rate);
}

double d2d_rate(int n, const Allocation& alloc, const ChannelSnapshot& snap, double n0) {
    const double bd = alloc.bd_hz;
    if (bd <= 0.0) {
        if (alloc.d2d_powers_w[n] > 0.0)
            throw std::invalid_argument("rate undefined: zero bandwidth with power");
        return 0.0;
    }
    double interference = 0.0;
    for (int k = 0; k < snap.num_direct; ++k)
        if (k != n) interference += alloc.d2d_powers_w[k] * snap.d2d(k, n);
    const double sinr = alloc.d2d_powers_w[n] * snap.d2d(n, n) / (interference + bd * n0);
    return bd * std::log2(1.0 + sinr);
}

std::string allocation_violation(const Allocation& alloc, const ChannelSnapshot& snap,
                                 const Scenario& s) {
    constexpr double kTol = 1e-9;
    const int n_direct = snap.num_direct;
    const int n_relay = snap.num_relay;
    if (static_cast<int>(alloc.d2d_powers_w.size()) != n_direct ||
        static_cast<int>(alloc.br_hz.size()) != n_relay ||
        static_cast<int>(alloc.uplink_powers_w.size()) != n_relay ||
        static_cast<int>(alloc.downlink_powers_w.size()) != n_relay ||
        static_cast<int>(alloc.assoc.size()) != n_relay)
        return "allocation shape does not match the scenario";

    const auto direct = s.direct_indices();
    const auto relay = s.relay_indices();
    if (alloc.bd_hz < -kTol) return "negative shared bandwidth";
    double total_b = alloc.bd_hz;
    for (int m = 0; m < n_relay; ++m) {
        if (alloc.br_hz[m] < -kTol) return "negative relay bandwidth";
        if (alloc.assoc[m] >= 0) total_b += alloc.br_hz[m];
    }
    if (total_b > s.radio.total_bandwidth_hz * (1.0 + kTol)) return "bandwidth budget exceeded";

    for (int n = 0; n < n_direct; ++n) {
        const double cap = s.pairs[direct[n]].max_power_w;
        if (alloc.d2d_powers_w[n] < -kTol || alloc.d2d_powers_w[n] > cap * (1.0 + kTol))
            return "direct-pair power outside [0, max] for pair " +
                   std::to_string(s.pairs[direct[n]].pair_id);
    }
    for (int m = 0; m < n_relay; ++m) {
        const double cap = s.pairs[relay[m]].max_power_w;
        if (alloc.uplink_powers_w[m] < -kTol || alloc.uplink_powers_w[m] > cap * (1.0 + kTol))
            return "relay-source power outside [0, max] for pair " +
                   std::to_string(s.pairs[relay[m]].pair_id);
        if (alloc.downlink_powers_w[m] < -kTol)
            return "negative downlink power for pair " + std::to_string(s.pairs[relay[m]].pair_id);
        if (alloc.assoc[m] >= snap.num_uavs) return "association references a missing UAV";
    }
    for (int l = 0; l < snap.num_uavs; ++l) {
        double budget = 0.0;
        for (int m = 0; m < n_relay; ++m)
            if (alloc.assoc[m] == l) budget += alloc.downlink_powers_w[m];
        if (budget > s.uavs[l].max_tx_power_w * (1.0 + kTol))
            return "downlink power budget exceeded at uav " + std::to_string(s.uavs[l].uav_id);
    }
    return {};
}

RateReport evaluate_rates(const Allocation& alloc, const ChannelSnapshot& snap, const Scenario& s) {
    const std::string bad = allocation_violation(alloc, snap, s);
    if (!bad.empty()) throw std::invalid_argument(bad);

    const double n0 = s.radio.noise_psd_w_per_hz;
    RateReport r;
    r.direct_rates.resize(snap.num_direct);
    r.uplink_rates.assign(snap.num_relay, 0.0);
    r.downlink_rates.assign(snap.num_relay, 0.0);
    r.relay_rates.assign(snap.num_relay, 0.0);

    double min_rate = std::numeric_limits<double>::infinity();
    for (int n = 0; n < snap.num_direct; ++n) {
        r.direct_rates[n] = d2d_rate(n, alloc, snap, n0);
        min_rate = std::min(min_rate, r.direct_rates[n]);
    }
    for (int m = 0; m < snap.num_relay; ++m) {
        const int l = alloc.assoc[m];
        if (l < 0) {
            min_rate = std::min(min_rate, 0.0);
            continue;
        }
        r.uplink_rates[m] =
            relay_uplink_rate(alloc.br_hz[m], alloc.uplink_powers_w[m], snap.uplink(m, l), n0);
        r.downlink_rates[m] =
            relay_downlink_rate(alloc.br_hz[m], alloc.downlink_powers_w[m], snap.downlink(l, m), n0);
        r.relay_rates[m] = df_end_to_end(r.uplink_rates[m], r.downlink_rates[m]);
        min_rate = std::min(min_rate, r.relay_rates[m]);
    }
    r.min_rate = std::isfinite(min_rate) ? min_rate : 0.0;
    return r;
}

}  // namespace uavd2d
