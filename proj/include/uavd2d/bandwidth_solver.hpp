#ifndef UAVD2D_BANDWIDTH_SOLVER_HPP
#define UAVD2D_BANDWIDTH_SOLVER_HPP

#include <vector>

#include "uavd2d/slot_context.hpp"

namespace uavd2d {

struct ScalarAffine {
    double constant = 0.0;
    double slope = 0.0;
    double value(double b) const { return constant + slope * b; }
};

// Convex-in-bandwidth part of the D2D rate of pair n once powers are fixed:
// Bd * log2(Bd*N0 + sum_k P_k h_kn), own signal included.
double d2d_rate_convex_part(double bd_hz, const std::vector<double>& d2d_powers_w,
                            const ChannelSnapshot& snap, int n, double n0);

// Tangent at the expansion bandwidth: global lower bound of the part above.
ScalarAffine taylor_lower_bound_bd(double bd_at_r, const std::vector<double>& d2d_powers_w,
                                   const ChannelSnapshot& snap, int n, double n0);

// Convex part of a relay hop rate: Br * log2(Br*N0 + P*h), and its tangent.
double hop_rate_convex_part(double br_hz, double power_w, double gain, double n0);
ScalarAffine taylor_lower_bound_hop(double br_at_r, double power_w, double gain, double n0);

struct BandwidthSolveOptions {
    int max_sca_iters = 10;
    double sca_tol = 1e-3;
    double barrier_gap = 1e-8;
    double floor_hz = 1e3;  // smallest live subband
};

struct BandwidthSolveResult {
    Allocation alloc;
    double efficiency = 0.0;
    std::vector<double> trace;  // best true objective per SCA round
    int sca_iterations = 0;
    bool converged = false;
};

// P2: reallocates the shared D2D band and the per-relay-pair subbands at
// fixed powers and association. The energy term does not move with the
// bandwidths, so this maximizes the min rate directly.
BandwidthSolveResult solve_bandwidth(Allocation alloc, const SlotContext& ctx,
                                     const BandwidthSolveOptions& opt = {});

}  // namespace uavd2d

#endif
