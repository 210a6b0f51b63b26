#ifndef UAVD2D_POWER_SOLVER_HPP
#define UAVD2D_POWER_SOLVER_HPP

#include <vector>

#include "uavd2d/slot_context.hpp"

namespace uavd2d {

// Affine form c0 + sum coeffs[k] * P_k over the direct-pair powers.
struct AffineForm {
    double constant = 0.0;
    std::vector<double> coeffs;

    double value(const std::vector<double>& p) const {
        double v = constant;
        for (std::size_t k = 0; k < coeffs.size(); ++k) v += coeffs[k] * p[k];
        return v;
    }
};

// Exact interference penalty of direct pair n: -Bd*log2(sum_{k!=n} P_k h_kn
// + Bd*N0). Convex in the powers.
double interference_penalty_exact(int n, const std::vector<double>& d2d_powers_w, double bd_hz,
                                  const ChannelSnapshot& snap, double n0);

// Tangent of the penalty at the expansion powers: a global lower bound that
// touches it there.
AffineForm taylor_lower_bound_interference(int n, const std::vector<double>& powers_at_r,
                                           double bd_hz, const ChannelSnapshot& snap, double n0);

struct PowerSolveOptions {
    int max_sca_iters = 10;
    double sca_tol = 1e-3;        // relative change of the true objective
    double f_tol_rel = 1e-6;      // stop when F(kappa_lo) <= f_tol_rel * F(0)
    double kappa_tol_rel = 1e-6;  // or when the bracket is this tight
    double barrier_gap = 1e-8;    // inner convex tolerance (scaled units)
    int max_root_iters = 48;
    bool warm_start = false;  // expand at the incoming powers instead of caps/2
};

struct SolverTracePoint {
    int iteration = 0;
    double kappa = 0.0;
    double f_value = 0.0;
    double min_rate = 0.0;
    double denominator_j = 0.0;
};

struct PowerSolveResult {
    Allocation alloc;
    double efficiency = 0.0;            // true ratio at the returned powers
    double kappa_star = 0.0;            // root estimate from the last round
    std::vector<double> trace;          // best true objective per SCA round
    std::vector<SolverTracePoint> root_trace;
    int sca_iterations = 0;
    bool converged = false;
};

// Maximizes min-rate minus kappa * energy over powers at a fixed minorant
// expansion. Returns false only on solver breakdown.
bool solve_inner_convex(double kappa, const Allocation& alloc, const SlotContext& ctx,
                        const std::vector<double>& expansion_powers, double barrier_gap,
                        std::vector<double>& d2d_powers_w, double& rho_bit_s, double& f_value);

// Root of F(kappa) by bracketed bisection sharpened with ratio probes, at a
// fixed minorant expansion. Fills the allocation's powers.
bool bisect_efficiency(Allocation& alloc, const SlotContext& ctx,
                       const std::vector<double>& expansion_powers, const PowerSolveOptions& opt,
                       double& kappa_star, std::vector<SolverTracePoint>* trace);

// Full P1: re-expand minorants and re-root until the true objective settles.
PowerSolveResult sca_power_loop(Allocation alloc, const SlotContext& ctx,
                                const PowerSolveOptions& opt = {});

}  // namespace uavd2d

#endif
