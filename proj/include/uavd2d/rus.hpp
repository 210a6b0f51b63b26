#ifndef UAVD2D_RUS_HPP
#define UAVD2D_RUS_HPP

#include <cstddef>
#include <vector>

#include "uavd2d/bandwidth_solver.hpp"
#include "uavd2d/energy.hpp"
#include "uavd2d/power_solver.hpp"
#include "uavd2d/rng.hpp"

namespace uavd2d {

// Candidate 0 is the center; the q others are area-uniform on the sphere
// surface, then floored to z_min.
std::vector<Vec3> sample_sphere(const Vec3& center, double radius, int q, RngStream& rng,
                                double z_min = 10.0);

// Serving UAV per relay pair by the larger bottleneck hop gain, ties to the
// lowest UAV index. allowed masks UAVs out (e.g. while returning to charge);
// -1 marks a pair nobody may serve.
std::vector<int> associate_best_channel(const ChannelSnapshot& snap,
                                        const std::vector<bool>* allowed = nullptr);

// Equal split: full source power, per-UAV downlink budget shared evenly,
// half the band to D2D and half across relay subbands.
Allocation uniform_allocation(const Scenario& s, const ChannelSnapshot& snap,
                              const std::vector<int>& assoc);

struct SolveBudget {
    PowerSolveOptions power;
    BandwidthSolveOptions bandwidth;
    int alternation_rounds = 10;
    double alternation_tol = 1e-3;
    bool record_trace = false;
};

SolveBudget scan_budget();    // cheap settings for ranking many candidates
SolveBudget commit_budget();  // full-accuracy settings for the chosen one

struct CandidateEvaluation {
    bool feasible = false;
    double objective = 0.0;  // bit/J, valid when feasible
    Allocation alloc;
    RateReport rates;
    std::vector<SlotEnergy> energies;  // per UAV, unclamped
    std::vector<SolverTracePoint> power_trace;
    std::vector<double> alternation_trace;  // best objective after each round
    int alternation_rounds = 0;
};

// Energy to fly straight home at top speed, idle amplifier draw included;
// holding this much back keeps the return leg affordable.
double homeward_reserve_j(const UavSpec& u, const Vec3& pos, const EnergyConstants& ec);

// Per-UAV slot energy under an allocation: amplifier load from the downlink
// powers each UAV serves, plus flight.
std::vector<SlotEnergy> allocation_slot_energies(const Scenario& s,
                                                 const std::vector<Vec3>& candidate,
                                                 const std::vector<double>& speeds,
                                                 const Allocation& a);

// P1/P2 alternation at a fixed geometry, floored by the equal-split
// allocation; infeasible when some UAV could not still reach the station.
CandidateEvaluation evaluate_candidate(const Scenario& s, const std::vector<Vec3>& candidate,
                                       const std::vector<Vec3>& prev_positions,
                                       const std::vector<double>& stored_j, int t,
                                       const SolveBudget& budget,
                                       const Allocation* warm = nullptr,
                                       const std::vector<bool>* allowed = nullptr);

struct RusIterationLog {
    int iteration = 0;
    double radius_m = 0.0;
    double best_objective = 0.0;
    std::vector<Vec3> best_candidate;
};

struct RusOptions {
    int q_candidates = 10;
    int max_iters = 10;
    double r_min_m = 0.5;
    std::size_t joint_enum_cap = 2048;  // beyond this, per-UAV sweeps
    SolveBudget scan = scan_budget();
    SolveBudget commit = commit_budget();
    bool parallel = true;
};

struct TrajectoryDecision {
    std::vector<Vec3> waypoints;
    std::vector<double> speeds;
    CandidateEvaluation eval;
    std::vector<RusIterationLog> log;
    std::vector<bool> returning;  // per UAV: forced back to the station
    bool any_return_fallback = false;
};

// One slot of the shrink-and-realign search: sample spheres around the
// incumbent, realign on improvement, halve the radius on stagnation.
TrajectoryDecision rus_step(const Scenario& s, const std::vector<Vec3>& prev_positions,
                            const std::vector<double>& stored_j, int t, const RusOptions& opt,
                            RngStream& rng);

}  // namespace uavd2d

#endif
