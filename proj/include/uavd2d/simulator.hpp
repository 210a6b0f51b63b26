#ifndef UAVD2D_SIMULATOR_HPP
#define UAVD2D_SIMULATOR_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uavd2d/energy.hpp"
#include "uavd2d/rus.hpp"

namespace uavd2d {

enum class Mode { Proposed, Uniform };

const char* mode_name(Mode m);

struct SlotSolution {
    int slot = 0;
    std::vector<Vec3> waypoints;
    std::vector<double> speeds;
    Allocation alloc;
    RateReport rates;
    std::vector<double> consumed_j;  // per UAV, as committed to the ledger
    std::vector<double> charged_j;
    std::vector<double> stored_j;  // end of slot
    std::vector<bool> returning;
    double objective_bit_per_j = 0.0;
    double energy_j = 0.0;  // efficiency denominator for this slot
    bool return_fallback = false;
    std::vector<RusIterationLog> rus_log;
    std::vector<SolverTracePoint> power_trace;
    std::vector<double> alternation_trace;
};

struct EpisodeAggregates {
    double mean_efficiency_bit_per_j = 0.0;
    double mean_min_rate_bit_s = 0.0;
    double mean_energy_j_per_s = 0.0;
    int fallback_slots = 0;
};

struct EpisodeOptions {
    Mode mode = Mode::Proposed;
    RusOptions rus;
    bool record_trace = false;
};

struct EpisodeResult {
    Mode mode = Mode::Proposed;
    std::string scenario_digest;
    std::vector<SlotSolution> slots;
    EpisodeAggregates aggregates;
    bool ok = true;  // false when a battery genuinely ran dry
    std::string error;
};

EpisodeResult run_episode(const Scenario& s, const EpisodeOptions& opt);

EpisodeAggregates aggregate_slots(const std::vector<SlotSolution>& slots, double tau_s);

struct SweepSpec {
    std::string param;  // "pl-dbm" or "users"
    std::vector<double> values;
    int num_seeds = 1;
    std::uint64_t seed0 = 1;
    bool run_proposed = true;
    bool run_uniform = true;
    int synth_direct = 10;  // synthesis shape when no template is given
    int synth_relay = 10;
    int synth_uavs = 5;
    int num_slots = 10;
    double tau_s = 1.0;
    const Scenario* base = nullptr;  // template for pl-dbm sweeps
    RusOptions rus;
};

struct SweepRow {
    double value = 0.0;
    Mode mode = Mode::Proposed;
    int seeds = 0;
    double mean_efficiency_bit_per_j = 0.0;
    double sd_efficiency = 0.0;
    double mean_min_rate_bit_s = 0.0;
    double sd_min_rate = 0.0;
    double mean_energy_j_per_s = 0.0;
    double sd_energy = 0.0;
    int failures = 0;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec);

std::string run_id(const Scenario& s, Mode mode, const std::string& tag);

void write_slots_csv(const std::string& path, const Scenario& s, const EpisodeResult& r);
void write_aggregates_csv(const std::string& path,
                          const std::vector<std::pair<Mode, EpisodeAggregates>>& rows);
void write_sweep_csv(const std::string& path, const std::string& param,
                     const std::vector<SweepRow>& rows);
void write_solver_trace_csv(const std::string& path, const EpisodeResult& r);
void write_alternation_csv(const std::string& path, const EpisodeResult& r);

}  // namespace uavd2d

#endif
