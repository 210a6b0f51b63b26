#include "uavd2d/rus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace uavd2d {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<Vec3> sample_sphere(const Vec3& center, double radius, int q, RngStream& rng,
                                double z_min) {
    std::vector<Vec3> out;
    out.reserve(q + 1);
    out.push_back(center);
    for (int i = 0; i < q; ++i) {
        const double u = rng.uniform(-1.0, 1.0);
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        Vec3 p{center.x + radius * s * std::cos(phi), center.y + radius * s * std::sin(phi),
               center.z + radius * u};
        if (p.z < z_min) p.z = z_min;
        out.push_back(p);
    }
    return out;
}

std::vector<int> associate_best_channel(const ChannelSnapshot& snap,
                                        const std::vector<bool>* allowed) {
    std::vector<int> assoc(snap.num_relay, -1);
    for (int m = 0; m < snap.num_relay; ++m) {
        double best = -1.0;
        for (int l = 0; l < snap.num_uavs; ++l) {
            if (allowed && !(*allowed)[l]) continue;
            const double bottleneck = std::min(snap.uplink(m, l), snap.downlink(l, m));
            if (bottleneck > best) {
                best = bottleneck;
                assoc[m] = l;
            }
        }
    }
    return assoc;
}

Allocation uniform_allocation(const Scenario& s, const ChannelSnapshot& snap,
                              const std::vector<int>& assoc) {
    const auto direct = s.direct_indices();
    const auto relay = s.relay_indices();
    Allocation a;
    a.assoc = assoc;
    a.bd_hz = 0.5 * s.radio.total_bandwidth_hz;
    a.br_hz.assign(relay.size(), relay.empty()
                                     ? 0.0
                                     : 0.5 * s.radio.total_bandwidth_hz / relay.size());
    a.d2d_powers_w.resize(direct.size());
    for (std::size_t n = 0; n < direct.size(); ++n)
        a.d2d_powers_w[n] = s.pairs[direct[n]].max_power_w;
    a.uplink_powers_w.assign(relay.size(), 0.0);
    a.downlink_powers_w.assign(relay.size(), 0.0);
    std::vector<int> load(s.uavs.size(), 0);
    for (std::size_t m = 0; m < relay.size(); ++m)
        if (assoc[m] >= 0) ++load[assoc[m]];
    for (std::size_t m = 0; m < relay.size(); ++m) {
        if (assoc[m] < 0) continue;
        a.uplink_powers_w[m] = s.pairs[relay[m]].max_power_w;
        a.downlink_powers_w[m] = s.uavs[assoc[m]].max_tx_power_w / load[assoc[m]];
    }
    return a;
}

SolveBudget scan_budget() {
    SolveBudget b;
    // Ranking works off the recipe floor plus one bandwidth round: the power
    // solve rescales every candidate onto the same flat ratio and erases the
    // geometric signal the scan needs, while tripling its cost.
    b.power.max_sca_iters = 0;
    b.power.sca_tol = 1e-2;
    b.power.f_tol_rel = 1e-3;
    b.power.kappa_tol_rel = 1e-3;
    b.power.barrier_gap = 1e-5;
    b.power.max_root_iters = 24;
    b.bandwidth.max_sca_iters = 1;
    b.bandwidth.sca_tol = 1e-2;
    b.bandwidth.barrier_gap = 1e-5;
    b.alternation_rounds = 1;
    b.alternation_tol = 1e-2;
    return b;
}

SolveBudget commit_budget() { return SolveBudget{}; }

double homeward_reserve_j(const UavSpec& u, const Vec3& pos, const EnergyConstants& ec) {
    const double d = distance(pos, ec.station);
    return d / u.max_speed_m_s * (hover_power(u, u.max_speed_m_s, ec) + u.amp_offset_beta_w);
}

std::vector<SlotEnergy> allocation_slot_energies(const Scenario& s,
                                                 const std::vector<Vec3>& candidate,
                                                 const std::vector<double>& speeds,
                                                 const Allocation& a) {
    const int num_uavs = static_cast<int>(s.uavs.size());
    std::vector<SlotEnergy> es(num_uavs);
    for (int l = 0; l < num_uavs; ++l) {
        const double tx = uav_tx_power(l, a.assoc, a.downlink_powers_w, s.uavs[l].amp_slope_alpha,
                                       s.uavs[l].amp_offset_beta_w);
        es[l] = slot_energy(s.uavs[l], candidate[l], speeds[l], tx, s.time.slot_duration_tau,
                            s.energy);
    }
    return es;
}

namespace {

bool reserve_ok(const Scenario& s, const std::vector<Vec3>& candidate,
                const std::vector<double>& stored_j, const std::vector<SlotEnergy>& es) {
    for (std::size_t l = 0; l < s.uavs.size(); ++l) {
        const double need = homeward_reserve_j(s.uavs[l], candidate[l], s.energy) + es[l].consumed_j;
        if (need > stored_j[l] * (1.0 + 1e-9) + 1e-9) return false;
    }
    return true;
}

}  // namespace

CandidateEvaluation evaluate_candidate(const Scenario& s, const std::vector<Vec3>& candidate,
                                       const std::vector<Vec3>& prev_positions,
                                       const std::vector<double>& stored_j, int t,
                                       const SolveBudget& budget, const Allocation* warm,
                                       const std::vector<bool>* allowed) {
    const int num_uavs = static_cast<int>(s.uavs.size());
    CandidateEvaluation out;
    std::vector<double> speeds(num_uavs, 0.0);
    const double tau = s.time.slot_duration_tau;
    for (int l = 0; l < num_uavs; ++l) {
        const double step = distance(candidate[l], prev_positions[l]);
        const double cap = s.uavs[l].max_speed_m_s * tau;
        if (step > cap * (1.0 + 1e-9)) return out;
        if (candidate[l].z < s.region.uav_z_min - 1e-9 ||
            candidate[l].z > s.region.uav_z_max + 1e-9)
            return out;
        speeds[l] = std::min(step / tau, s.uavs[l].max_speed_m_s);
    }
    // cheapest possible consumption already breaks the bank: reject early
    for (int l = 0; l < num_uavs; ++l) {
        const double gate = station_gate(candidate[l], s.energy.station, s.energy.station_epsilon_m2);
        const double idle =
            tau * gate * (hover_power(s.uavs[l], speeds[l], s.energy) + s.uavs[l].amp_offset_beta_w);
        if (homeward_reserve_j(s.uavs[l], candidate[l], s.energy) + idle >
            stored_j[l] * (1.0 + 1e-9) + 1e-9)
            return out;
    }

    const ChannelSnapshot snap = make_snapshot(s, candidate, t);
    const SlotContext ctx = make_slot_context(s, snap, candidate, speeds);
    const std::vector<int> assoc = associate_best_channel(snap, allowed);

    struct Option {
        double eff;
        Allocation alloc;
    };
    std::vector<Option> floors;
    const Allocation uni = uniform_allocation(s, snap, assoc);
    floors.push_back({efficiency_bit_per_joule(uni, ctx), uni});
    if (warm && allocation_violation(*warm, snap, s).empty())
        floors.push_back({efficiency_bit_per_joule(*warm, ctx), *warm});

    double best_eff = kNegInf;
    Allocation best_alloc;
    for (const auto& f : floors)
        if (f.eff > best_eff) {
            best_eff = f.eff;
            best_alloc = f.alloc;
        }

    Allocation cur = best_alloc;
    double prev_eff = -1.0;
    try {
        for (int round = 0; round < budget.alternation_rounds; ++round) {
            PowerSolveOptions po = budget.power;
            po.warm_start = true;
            PowerSolveResult p1 = sca_power_loop(cur, ctx, po);
            cur = p1.alloc;
            if (budget.record_trace) out.power_trace = p1.root_trace;
            BandwidthSolveResult p2 = solve_bandwidth(cur, ctx, budget.bandwidth);
            cur = p2.alloc;
            const double eff = p2.efficiency;
            ++out.alternation_rounds;
            if (eff > best_eff) {
                best_eff = eff;
                best_alloc = cur;
            }
            out.alternation_trace.push_back(best_eff);
            if (prev_eff >= 0.0 && std::abs(eff - prev_eff) <=
                                       budget.alternation_tol * std::max(prev_eff, 1e-30))
                break;
            prev_eff = eff;
        }
    } catch (const std::exception&) {
        // solver breakdown on this candidate: fall back to the floor options
    }

    std::vector<SlotEnergy> es = allocation_slot_energies(s, candidate, speeds, best_alloc);
    if (!reserve_ok(s, candidate, stored_j, es)) {
        // retry the floors from best to worst before rejecting
        std::sort(floors.begin(), floors.end(),
                  [](const Option& a, const Option& b) { return a.eff > b.eff; });
        bool found = false;
        for (const auto& f : floors) {
            std::vector<SlotEnergy> fe = allocation_slot_energies(s, candidate, speeds, f.alloc);
            if (reserve_ok(s, candidate, stored_j, fe)) {
                best_eff = f.eff;
                best_alloc = f.alloc;
                es = std::move(fe);
                found = true;
                break;
            }
        }
        if (!found) return out;
    }

    out.feasible = true;
    out.objective = std::max(best_eff, 0.0);
    out.alloc = std::move(best_alloc);
    out.energies = std::move(es);
    efficiency_bit_per_joule(out.alloc, ctx, &out.rates);
    return out;
}

namespace {

struct ScanInputs {
    const Scenario* s;
    const std::vector<Vec3>* prev;
    const std::vector<double>* stored;
    int t;
    const SolveBudget* budget;
    const Allocation* warm;
    const std::vector<bool>* allowed;
};

double scan_one(const ScanInputs& in, const std::vector<Vec3>& pos) {
    try {
        const CandidateEvaluation e = evaluate_candidate(*in.s, pos, *in.prev, *in.stored, in.t,
                                                         *in.budget, in.warm, in.allowed);
        return e.feasible ? e.objective : kNegInf;
    } catch (const std::exception&) {
        return kNegInf;
    }
}

// Objectives for a batch of joint candidates; the loop body is pure, so the
// parallel and serial paths fill identical vectors.
std::vector<double> scan_batch(const ScanInputs& in,
                               const std::vector<std::vector<Vec3>>& batch, bool parallel) {
    std::vector<double> obj(batch.size(), kNegInf);
    const int n = static_cast<int>(batch.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) obj[i] = scan_one(in, batch[i]);
    } else {
        for (int i = 0; i < n; ++i) obj[i] = scan_one(in, batch[i]);
    }
    return obj;
}

}  // namespace

TrajectoryDecision rus_step(const Scenario& s, const std::vector<Vec3>& prev_positions,
                            const std::vector<double>& stored_j, int t, const RusOptions& opt,
                            RngStream& rng) {
    const int num_uavs = static_cast<int>(s.uavs.size());
    const double tau = s.time.slot_duration_tau;
    TrajectoryDecision dec;
    dec.returning.assign(num_uavs, false);

    for (int l = 0; l < num_uavs; ++l) {
        const double gate =
            station_gate(prev_positions[l], s.energy.station, s.energy.station_epsilon_m2);
        const double stay_cost =
            tau * gate * (hover_power(s.uavs[l], 0.0, s.energy) + s.uavs[l].amp_offset_beta_w);
        if (homeward_reserve_j(s.uavs[l], prev_positions[l], s.energy) + stay_cost >
            stored_j[l] * (1.0 + 1e-9) + 1e-9)
            dec.returning[l] = true;
    }

    std::vector<Vec3> base = prev_positions;
    std::vector<bool> allowed(num_uavs, true);
    std::vector<int> free_idx;
    for (int l = 0; l < num_uavs; ++l) {
        if (dec.returning[l]) {
            base[l] = step_toward(prev_positions[l], s.energy.station,
                                  s.uavs[l].max_speed_m_s * tau);
            allowed[l] = false;
            dec.any_return_fallback = true;
        } else {
            free_idx.push_back(l);
        }
    }
    const std::vector<bool>* allowed_ptr = dec.any_return_fallback ? &allowed : nullptr;

    ScanInputs in{&s, &prev_positions, &stored_j, t, &opt.scan, nullptr, allowed_ptr};

    CandidateEvaluation incumbent =
        evaluate_candidate(s, base, prev_positions, stored_j, t, opt.scan, nullptr, allowed_ptr);
    double best_obj = incumbent.feasible ? incumbent.objective : kNegInf;
    std::vector<Vec3> best_pos = base;
    CandidateEvaluation best_eval = incumbent;
    Allocation warm_alloc;
    if (incumbent.feasible) {
        warm_alloc = incumbent.alloc;
        in.warm = &warm_alloc;
    }

    if (!free_idx.empty() && incumbent.feasible) {
        std::vector<double> radius(num_uavs);
        for (int l : free_idx) radius[l] = s.uavs[l].max_speed_m_s * tau;
        std::vector<Vec3> centers = base;

        for (int iter = 1; iter <= opt.max_iters; ++iter) {
            double max_radius = 0.0;
            for (int l : free_idx) max_radius = std::max(max_radius, radius[l]);
            if (max_radius < opt.r_min_m) break;

            std::vector<std::vector<Vec3>> lists(num_uavs);
            for (int l = 0; l < num_uavs; ++l) {
                if (dec.returning[l]) {
                    lists[l] = {base[l]};
                    continue;
                }
                lists[l] = sample_sphere(centers[l], radius[l], opt.q_candidates, rng,
                                         s.region.uav_z_min);
                const double cap = s.uavs[l].max_speed_m_s * tau * (1.0 - 1e-12);
                for (Vec3& p : lists[l]) {
                    if (p.z > s.region.uav_z_max) p.z = s.region.uav_z_max;
                    const double d = distance(p, prev_positions[l]);
                    if (d > cap) p = step_toward(prev_positions[l], p, cap);
                }
            }

            double joint = 1.0;
            for (int l = 0; l < num_uavs; ++l) {
                joint *= static_cast<double>(lists[l].size());
                if (joint > 1e18) break;
            }

            bool improved = false;
            if (joint <= static_cast<double>(opt.joint_enum_cap)) {
                std::vector<std::vector<Vec3>> batch;
                std::vector<std::size_t> digits(num_uavs, 0);
                while (true) {
                    std::vector<Vec3> pos(num_uavs);
                    for (int l = 0; l < num_uavs; ++l) pos[l] = lists[l][digits[l]];
                    batch.push_back(std::move(pos));
                    int l = num_uavs - 1;
                    for (; l >= 0; --l) {
                        if (++digits[l] < lists[l].size()) break;
                        digits[l] = 0;
                    }
                    if (l < 0) break;
                }
                const std::vector<double> obj = scan_batch(in, batch, opt.parallel);
                std::size_t arg = 0;
                for (std::size_t i = 1; i < obj.size(); ++i)
                    if (obj[i] > obj[arg]) arg = i;
                if (obj[arg] > best_obj) {
                    improved = true;
                    best_obj = obj[arg];
                    best_pos = batch[arg];
                }
            } else {
                std::vector<Vec3> work = centers;
                double work_obj = best_obj;
                for (int l : free_idx) {
                    std::vector<std::vector<Vec3>> batch;
                    batch.reserve(lists[l].size());
                    for (const Vec3& cand : lists[l]) {
                        std::vector<Vec3> pos = work;
                        pos[l] = cand;
                        batch.push_back(std::move(pos));
                    }
                    const std::vector<double> obj = scan_batch(in, batch, opt.parallel);
                    std::size_t arg = 0;
                    for (std::size_t i = 1; i < obj.size(); ++i)
                        if (obj[i] > obj[arg]) arg = i;
                    if (obj[arg] > work_obj) {
                        work_obj = obj[arg];
                        work = batch[arg];
                    }
                }
                if (work_obj > best_obj) {
                    improved = true;
                    best_obj = work_obj;
                    best_pos = work;
                }
            }

            if (improved) {
                centers = best_pos;
                best_eval = evaluate_candidate(s, best_pos, prev_positions, stored_j, t, opt.scan,
                                               in.warm, allowed_ptr);
                if (best_eval.feasible) {
                    warm_alloc = best_eval.alloc;
                    in.warm = &warm_alloc;
                }
            } else {
                for (int l : free_idx) radius[l] *= 0.5;
            }
            dec.log.push_back({iter, max_radius, best_obj, best_pos});
        }
    }

    dec.waypoints = best_pos;
    dec.speeds.assign(num_uavs, 0.0);
    for (int l = 0; l < num_uavs; ++l)
        dec.speeds[l] = std::min(distance(best_pos[l], prev_positions[l]) / tau,
                                 s.uavs[l].max_speed_m_s);

    CandidateEvaluation final_eval =
        evaluate_candidate(s, best_pos, prev_positions, stored_j, t, opt.commit,
                           best_eval.feasible ? &best_eval.alloc : nullptr, allowed_ptr);
    if (final_eval.feasible &&
        (!best_eval.feasible || final_eval.objective >= best_eval.objective)) {
        dec.eval = std::move(final_eval);
    } else if (best_eval.feasible) {
        dec.eval = std::move(best_eval);
    } else {
        // nothing affordable anywhere, not even the incumbent: head home and
        // let the ledger surface a genuine underflow if there is one
        dec.any_return_fallback = true;
        for (int l = 0; l < num_uavs; ++l) {
            dec.returning[l] = true;
            dec.waypoints[l] =
                step_toward(prev_positions[l], s.energy.station, s.uavs[l].max_speed_m_s * tau);
            dec.speeds[l] = std::min(distance(dec.waypoints[l], prev_positions[l]) / tau,
                                     s.uavs[l].max_speed_m_s);
        }
        const ChannelSnapshot snap = make_snapshot(s, dec.waypoints, t);
        const SlotContext ctx = make_slot_context(s, snap, dec.waypoints, dec.speeds);
        dec.eval.alloc = uniform_allocation(s, snap, std::vector<int>(snap.num_relay, -1));
        dec.eval.objective = efficiency_bit_per_joule(dec.eval.alloc, ctx, &dec.eval.rates);
        dec.eval.energies = allocation_slot_energies(s, dec.waypoints, dec.speeds, dec.eval.alloc);
        dec.eval.feasible = false;
    }
    return dec;
}

}  // namespace uavd2d
