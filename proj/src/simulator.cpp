#include "uavd2d/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "uavd2d/csv.hpp"
#include "uavd2d/rng.hpp"
#include "uavd2d/slot_context.hpp"

namespace uavd2d {

const char* mode_name(Mode m) { return m == Mode::Proposed ? "proposed" : "uniform"; }

namespace {

std::vector<double> stored_vector(const BatteryLedger& ledger) {
    std::vector<double> out(ledger.num_uavs());
    for (int l = 0; l < ledger.num_uavs(); ++l) out[l] = ledger.stored(l);
    return out;
}

void commit_and_record(const Scenario& s, BatteryLedger& ledger, SlotSolution& sol,
                       const std::vector<SlotEnergy>& raw) {
    const int num_uavs = static_cast<int>(s.uavs.size());
    std::vector<SlotEnergy> clamped(num_uavs);
    for (int l = 0; l < num_uavs; ++l)
        clamped[l] = clamp_charge(raw[l], ledger.stored(l), s.energy.battery_capacity_j);
    ledger.commit_slot(clamped);
    sol.consumed_j.resize(num_uavs);
    sol.charged_j.resize(num_uavs);
    sol.stored_j.resize(num_uavs);
    for (int l = 0; l < num_uavs; ++l) {
        sol.consumed_j[l] = clamped[l].consumed_j;
        sol.charged_j[l] = clamped[l].charged_j;
        sol.stored_j[l] = ledger.stored(l);
    }
}

void run_proposed(const Scenario& s, const EpisodeOptions& opt, EpisodeResult& out) {
    const int num_uavs = static_cast<int>(s.uavs.size());
    std::vector<double> initial(num_uavs);
    for (int l = 0; l < num_uavs; ++l) initial[l] = s.uavs[l].initial_battery_j;
    BatteryLedger ledger(initial, s.energy.battery_capacity_j);
    std::vector<Vec3> positions(num_uavs);
    for (int l = 0; l < num_uavs; ++l) positions[l] = s.uavs[l].initial_position;

    RusOptions ropt = opt.rus;
    ropt.commit.record_trace = opt.record_trace;
    RngStream rng = derive_stream(s.rng_seed, "trajectory-search");

    for (int t = 1; t <= s.time.num_slots; ++t) {
        const std::vector<double> stored = stored_vector(ledger);
        TrajectoryDecision dec = rus_step(s, positions, stored, t, ropt, rng);

        SlotSolution sol;
        sol.slot = t;
        sol.waypoints = dec.waypoints;
        sol.speeds = dec.speeds;
        sol.alloc = dec.eval.alloc;
        sol.rates = dec.eval.rates;
        sol.returning = dec.returning;
        sol.objective_bit_per_j = dec.eval.objective;
        sol.return_fallback = dec.any_return_fallback;
        sol.rus_log = dec.log;
        sol.power_trace = dec.eval.power_trace;
        sol.alternation_trace = dec.eval.alternation_trace;
        {
            const ChannelSnapshot snap = make_snapshot(s, dec.waypoints, t);
            const SlotContext ctx = make_slot_context(s, snap, dec.waypoints, dec.speeds);
            sol.energy_j = allocation_energy_j(sol.alloc, ctx);
        }
        commit_and_record(s, ledger, sol, dec.eval.energies);
        out.slots.push_back(std::move(sol));
        positions = dec.waypoints;
    }
}

void run_uniform(const Scenario& s, EpisodeResult& out) {
    const int num_uavs = static_cast<int>(s.uavs.size());
    const double tau = s.time.slot_duration_tau;
    std::vector<double> initial(num_uavs);
    for (int l = 0; l < num_uavs; ++l) initial[l] = s.uavs[l].initial_battery_j;
    BatteryLedger ledger(initial, s.energy.battery_capacity_j);
    std::vector<Vec3> positions(num_uavs);
    for (int l = 0; l < num_uavs; ++l) positions[l] = s.uavs[l].initial_position;

    for (int t = 1; t <= s.time.num_slots; ++t) {
        const std::vector<double> stored = stored_vector(ledger);
        std::vector<bool> returning(num_uavs, false);
        for (int l = 0; l < num_uavs; ++l) {
            const double gate =
                station_gate(positions[l], s.energy.station, s.energy.station_epsilon_m2);
            const double stay = tau * gate * (hover_power(s.uavs[l], 0.0, s.energy) +
                                              s.uavs[l].amp_offset_beta_w);
            if (homeward_reserve_j(s.uavs[l], positions[l], s.energy) + stay >
                stored[l] * (1.0 + 1e-9) + 1e-9)
                returning[l] = true;
        }

        // fixed point: sending one UAV home shifts downlink load onto the
        // rest, which can push another over its reserve
        std::vector<Vec3> waypoints;
        std::vector<double> speeds(num_uavs, 0.0);
        Allocation alloc;
        std::vector<SlotEnergy> raw;
        for (int pass = 0; pass <= num_uavs; ++pass) {
            waypoints = positions;
            for (int l = 0; l < num_uavs; ++l)
                if (returning[l])
                    waypoints[l] = step_toward(positions[l], s.energy.station,
                                               s.uavs[l].max_speed_m_s * tau);
            for (int l = 0; l < num_uavs; ++l)
                speeds[l] = std::min(distance(waypoints[l], positions[l]) / tau,
                                     s.uavs[l].max_speed_m_s);
            const ChannelSnapshot snap = make_snapshot(s, waypoints, t);
            std::vector<bool> allowed(num_uavs);
            for (int l = 0; l < num_uavs; ++l) allowed[l] = !returning[l];
            const std::vector<int> assoc =
                associate_best_channel(snap, num_uavs > 0 ? &allowed : nullptr);
            alloc = uniform_allocation(s, snap, assoc);
            raw = allocation_slot_energies(s, waypoints, speeds, alloc);
            bool flipped = false;
            for (int l = 0; l < num_uavs; ++l) {
                if (returning[l]) continue;
                if (homeward_reserve_j(s.uavs[l], waypoints[l], s.energy) + raw[l].consumed_j >
                    stored[l] * (1.0 + 1e-9) + 1e-9) {
                    returning[l] = true;
                    flipped = true;
                }
            }
            if (!flipped) break;
        }

        SlotSolution sol;
        sol.slot = t;
        sol.waypoints = waypoints;
        sol.speeds = speeds;
        sol.alloc = alloc;
        sol.returning = returning;
        sol.return_fallback =
            std::any_of(returning.begin(), returning.end(), [](bool b) { return b; });
        {
            const ChannelSnapshot snap = make_snapshot(s, waypoints, t);
            const SlotContext ctx = make_slot_context(s, snap, waypoints, speeds);
            sol.objective_bit_per_j = efficiency_bit_per_joule(alloc, ctx, &sol.rates);
            sol.energy_j = allocation_energy_j(alloc, ctx);
        }
        commit_and_record(s, ledger, sol, raw);
        out.slots.push_back(std::move(sol));
        positions = waypoints;
    }
}

}  // namespace

EpisodeAggregates aggregate_slots(const std::vector<SlotSolution>& slots, double tau_s) {
    EpisodeAggregates a;
    if (slots.empty()) return a;
    for (const SlotSolution& sol : slots) {
        a.mean_efficiency_bit_per_j += sol.objective_bit_per_j;
        a.mean_min_rate_bit_s += sol.rates.min_rate;
        a.mean_energy_j_per_s += sol.energy_j / tau_s;
        if (sol.return_fallback) ++a.fallback_slots;
    }
    const double n = static_cast<double>(slots.size());
    a.mean_efficiency_bit_per_j /= n;
    a.mean_min_rate_bit_s /= n;
    a.mean_energy_j_per_s /= n;
    return a;
}

EpisodeResult run_episode(const Scenario& s, const EpisodeOptions& opt) {
    EpisodeResult out;
    out.mode = opt.mode;
    out.scenario_digest = scenario_digest(s);
    try {
        if (opt.mode == Mode::Proposed)
            run_proposed(s, opt, out);
        else
            run_uniform(s, out);
    } catch (const LedgerError& e) {
        out.ok = false;
        out.error = e.what();
    }
    out.aggregates = aggregate_slots(out.slots, s.time.slot_duration_tau);
    return out;
}

namespace {

struct Welford {
    int n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double sd() const { return n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0; }
};

Scenario sweep_scenario(const SweepSpec& spec, double value, std::uint64_t seed) {
    if (spec.param == "users") {
        const int pairs_each = static_cast<int>(std::lround(value)) / 2;
        return synthesize_random_scenario(pairs_each, pairs_each, spec.synth_uavs, seed,
                                          spec.num_slots, spec.tau_s);
    }
    if (spec.param != "pl-dbm") throw std::invalid_argument("unknown sweep parameter: " + spec.param);
    Scenario s = spec.base ? *spec.base
                           : synthesize_random_scenario(spec.synth_direct, spec.synth_relay,
                                                        spec.synth_uavs, seed, spec.num_slots,
                                                        spec.tau_s);
    s.rng_seed = seed;
    for (UavSpec& u : s.uavs) u.max_tx_power_w = dbm_to_watts(value);
    return s;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    std::vector<SweepRow> rows;
    std::vector<Mode> modes;
    if (spec.run_proposed) modes.push_back(Mode::Proposed);
    if (spec.run_uniform) modes.push_back(Mode::Uniform);
    for (double value : spec.values) {
        for (Mode mode : modes) {
            SweepRow row;
            row.value = value;
            row.mode = mode;
            Welford eff, rate, energy;
            for (int i = 0; i < spec.num_seeds; ++i) {
                const Scenario s = sweep_scenario(spec, value, spec.seed0 + i);
                EpisodeOptions opt;
                opt.mode = mode;
                opt.rus = spec.rus;
                const EpisodeResult r = run_episode(s, opt);
                if (!r.ok) {
                    ++row.failures;
                    continue;
                }
                eff.add(r.aggregates.mean_efficiency_bit_per_j);
                rate.add(r.aggregates.mean_min_rate_bit_s);
                energy.add(r.aggregates.mean_energy_j_per_s);
            }
            row.seeds = eff.n;
            row.mean_efficiency_bit_per_j = eff.mean;
            row.sd_efficiency = eff.sd();
            row.mean_min_rate_bit_s = rate.mean;
            row.sd_min_rate = rate.sd();
            row.mean_energy_j_per_s = energy.mean;
            row.sd_energy = energy.sd();
            rows.push_back(row);
        }
    }
    return rows;
}

std::string run_id(const Scenario& s, Mode mode, const std::string& tag) {
    std::string id = scenario_digest(s);
    id += '-';
    id += mode_name(mode);
    if (!tag.empty()) {
        id += '-';
        id += tag;
    }
    return id;
}

namespace {

void write_or_throw(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << body;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_slots_csv(const std::string& path, const Scenario& s, const EpisodeResult& r) {
    std::string body = csv_row({"slot", "uav_id", "S_joules", "E_c", "E_ch", "x_m", "y_m", "z_m",
                                "speed_m_s", "returning", "objective_bit_per_j", "min_rate_bit_s",
                                "energy_j", "return_fallback"});
    for (const SlotSolution& sol : r.slots) {
        const std::string slot = std::to_string(sol.slot);
        const std::string obj = format_double(sol.objective_bit_per_j);
        const std::string min_rate = format_double(sol.rates.min_rate);
        const std::string energy = format_double(sol.energy_j);
        const std::string fb = sol.return_fallback ? "1" : "0";
        if (s.uavs.empty()) {
            body += csv_row({slot, "-1", "0", "0", "0", "0", "0", "0", "0", "0", obj, min_rate,
                             energy, fb});
            continue;
        }
        for (std::size_t l = 0; l < s.uavs.size(); ++l) {
            body += csv_row({slot, std::to_string(s.uavs[l].uav_id),
                             format_double(sol.stored_j[l]), format_double(sol.consumed_j[l]),
                             format_double(sol.charged_j[l]), format_double(sol.waypoints[l].x),
                             format_double(sol.waypoints[l].y), format_double(sol.waypoints[l].z),
                             format_double(sol.speeds[l]), sol.returning[l] ? "1" : "0", obj,
                             min_rate, energy, fb});
        }
    }
    write_or_throw(path, body);
}

void write_aggregates_csv(const std::string& path,
                          const std::vector<std::pair<Mode, EpisodeAggregates>>& rows) {
    std::string body = csv_row({"mode", "mean_efficiency_bit_per_j", "mean_min_rate_bit_s",
                                "mean_energy_j_per_s", "fallback_slots"});
    for (const auto& [mode, a] : rows) {
        body += csv_row({mode_name(mode), format_double(a.mean_efficiency_bit_per_j),
                         format_double(a.mean_min_rate_bit_s),
                         format_double(a.mean_energy_j_per_s), std::to_string(a.fallback_slots)});
    }
    write_or_throw(path, body);
}

void write_sweep_csv(const std::string& path, const std::string& param,
                     const std::vector<SweepRow>& rows) {
    std::string body = csv_row({"param", "value", "mode", "seeds", "mean_efficiency_bit_per_j",
                                "sd_efficiency", "mean_min_rate_bit_s", "sd_min_rate",
                                "mean_energy_j_per_s", "sd_energy", "failures"});
    for (const SweepRow& r : rows) {
        body += csv_row({param, format_double(r.value), mode_name(r.mode),
                         std::to_string(r.seeds), format_double(r.mean_efficiency_bit_per_j),
                         format_double(r.sd_efficiency), format_double(r.mean_min_rate_bit_s),
                         format_double(r.sd_min_rate), format_double(r.mean_energy_j_per_s),
                         format_double(r.sd_energy), std::to_string(r.failures)});
    }
    write_or_throw(path, body);
}

void write_solver_trace_csv(const std::string& path, const EpisodeResult& r) {
    std::string body =
        csv_row({"slot", "iteration", "kappa", "f_value", "min_rate_bit_s", "energy_j"});
    for (const SlotSolution& sol : r.slots) {
        for (const SolverTracePoint& p : sol.power_trace) {
            body += csv_row({std::to_string(sol.slot), std::to_string(p.iteration),
                             format_double(p.kappa), format_double(p.f_value),
                             format_double(p.min_rate), format_double(p.denominator_j)});
        }
    }
    write_or_throw(path, body);
}

void write_alternation_csv(const std::string& path, const EpisodeResult& r) {
    std::string body = csv_row({"slot", "round", "objective_bit_per_j"});
    for (const SlotSolution& sol : r.slots) {
        for (std::size_t i = 0; i < sol.alternation_trace.size(); ++i) {
            body += csv_row({std::to_string(sol.slot), std::to_string(i + 1),
                             format_double(sol.alternation_trace[i])});
        }
    }
    write_or_throw(path, body);
}

}  // namespace uavd2d
