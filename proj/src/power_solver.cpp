#include "uavd2d/power_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uavd2d/convex.hpp"
#include "uavd2d/energy.hpp"

namespace uavd2d {

SlotContext make_slot_context(const Scenario& s, const ChannelSnapshot& snap,
                              const std::vector<Vec3>& positions,
                              const std::vector<double>& speeds) {
    SlotContext ctx;
    ctx.scenario = &s;
    ctx.snap = &snap;
    ctx.tau = s.time.slot_duration_tau;
    const int num_uavs = static_cast<int>(s.uavs.size());
    ctx.gate.resize(num_uavs);
    ctx.hover_w.resize(num_uavs);
    for (int l = 0; l < num_uavs; ++l) {
        ctx.gate[l] = station_gate(positions[l], s.energy.station, s.energy.station_epsilon_m2);
        ctx.hover_w[l] = hover_power(s.uavs[l], speeds[l], s.energy);
        ctx.fixed_energy_j +=
            ctx.tau * ctx.gate[l] * (ctx.hover_w[l] + s.uavs[l].amp_offset_beta_w);
    }
    for (int i : s.direct_indices()) ctx.pu_direct_w.push_back(s.pairs[i].max_power_w);
    for (int i : s.relay_indices()) ctx.pu_relay_w.push_back(s.pairs[i].max_power_w);
    return ctx;
}

double allocation_energy_j(const Allocation& alloc, const SlotContext& ctx) {
    double e = ctx.fixed_energy_j;
    for (double p : alloc.d2d_powers_w) e += ctx.tau * p;
    for (std::size_t m = 0; m < alloc.uplink_powers_w.size(); ++m) {
        const int l = alloc.assoc[m];
        if (l < 0) continue;
        e += ctx.tau * alloc.uplink_powers_w[m];
        e += ctx.tau * ctx.gate[l] * ctx.scenario->uavs[l].amp_slope_alpha *
             alloc.downlink_powers_w[m];
    }
    return e;
}

double efficiency_bit_per_joule(const Allocation& alloc, const SlotContext& ctx,
                                RateReport* report) {
    const RateReport r = evaluate_rates(alloc, *ctx.snap, *ctx.scenario);
    if (report) *report = r;
    const double d = allocation_energy_j(alloc, ctx);
    if (!(d > 0.0)) return 0.0;
    return r.min_rate / d;
}

double interference_penalty_exact(int n, const std::vector<double>& d2d_powers_w, double bd_hz,
                                  const ChannelSnapshot& snap, double n0) {
    double psi = bd_hz * n0;
    for (int k = 0; k < snap.num_direct; ++k)
        if (k != n) psi += d2d_powers_w[k] * snap.d2d(k, n);
    return -bd_hz * std::log2(psi);
}

AffineForm taylor_lower_bound_interference(int n, const std::vector<double>& powers_at_r,
                                           double bd_hz, const ChannelSnapshot& snap, double n0) {
    double psi = bd_hz * n0;
    for (int k = 0; k < snap.num_direct; ++k)
        if (k != n) psi += powers_at_r[k] * snap.d2d(k, n);
    AffineForm f;
    f.coeffs.assign(snap.num_direct, 0.0);
    f.constant = -bd_hz * std::log2(psi);
    const double ln2 = std::log(2.0);
    for (int k = 0; k < snap.num_direct; ++k) {
        if (k == n) continue;
        const double slope = -bd_hz * snap.d2d(k, n) / (ln2 * psi);
        f.coeffs[k] = slope;
        f.constant -= slope * powers_at_r[k];
    }
    return f;
}

namespace {

constexpr double kLn2 = 0.6931471805599453;

struct RelayTerm {
    int idx = 0;  // relay-pair index in the allocation
    int uav = 0;
    double c_up = 0.0;    // W, so uplink power = c_up * (2^(2 rho / br) - 1)
    double c_dn = 0.0;    // W, same for the downlink hop
    double lambda = 0.0;  // 2 ln2 / br
    double cost_w = 0.0;  // joules per unit of (e^(lambda rho) - 1)
};

// Scaled convex core of P1 at one minorant expansion: powers in units of
// their caps, min-rate variable in units of rho_cap.
struct P1Data {
    int n_direct = 0;
    double bd = 0.0;
    double n0 = 0.0;
    double tau = 0.0;
    double fixed_j = 0.0;
    double rho_cap = 0.0;
    std::vector<double> scale_p;
    std::vector<double> rx_gain;      // [n * N + k]: tx of pair k -> rx of pair n
    std::vector<double> minor_c0;     // per pair n
    std::vector<double> minor_slope;  // [n * N + k]
    std::vector<double> x_expansion;  // scaled expansion powers, size N
    std::vector<RelayTerm> relays;
    bool trivial = false;  // no pairs to serve

    double relay_cost_j(double rho) const {
        double c = 0.0;
        for (const auto& r : relays) c += r.cost_w * std::expm1(r.lambda * rho);
        return c;
    }
    double relay_cost_deriv(double rho) const {
        double c = 0.0;
        for (const auto& r : relays) c += r.cost_w * r.lambda * std::exp(r.lambda * rho);
        return c;
    }
    double relay_cost_second(double rho) const {
        double c = 0.0;
        for (const auto& r : relays)
            c += r.cost_w * r.lambda * r.lambda * std::exp(r.lambda * rho);
        return c;
    }
    double denominator_j(const std::vector<double>& x) const {
        double d = fixed_j + relay_cost_j(rho_cap * x[n_direct]);
        for (int n = 0; n < n_direct; ++n) d += tau * scale_p[n] * x[n];
        return d;
    }
};

class P1Program : public ConcaveProgram {
public:
    P1Program(const P1Data& d, double kappa) : d_(d), kappa_(kappa) {}

    int dim() const override { return d_.n_direct + 1; }
    int num_ineq() const override { return d_.n_direct; }

    double objective(const std::vector<double>& x, std::vector<double>* grad,
                     SquareMatrix* hess) const override {
        constexpr double kEta = 1e-10;
        const int n = d_.n_direct;
        const double rho = d_.rho_cap * x[n];
        const double scale = kappa_ / d_.rho_cap;
        double val = x[n] - scale * (d_.fixed_j + d_.relay_cost_j(rho));
        for (int k = 0; k < n; ++k)
            val -= (scale * d_.tau * d_.scale_p[k] + kEta) * x[k];
        if (grad) {
            for (int k = 0; k < n; ++k)
                (*grad)[k] = -(scale * d_.tau * d_.scale_p[k] + kEta);
            (*grad)[n] = 1.0 - kappa_ * d_.relay_cost_deriv(rho);
        }
        if (hess) {
            hess->set_zero();
            (*hess)(n, n) = -kappa_ * d_.rho_cap * d_.relay_cost_second(rho);
        }
        return val;
    }

    double inequality(int i, const std::vector<double>& x, std::vector<double>* grad,
                      SquareMatrix* hess) const override {
        const int n = d_.n_direct;
        const double* gains = &d_.rx_gain[static_cast<std::size_t>(i) * n];
        const double* slopes = &d_.minor_slope[static_cast<std::size_t>(i) * n];
        double a = d_.bd * d_.n0;
        double affine = d_.minor_c0[i];
        for (int k = 0; k < n; ++k) {
            a += gains[k] * d_.scale_p[k] * x[k];
            affine += slopes[k] * d_.scale_p[k] * x[k];
        }
        const double inv_cap = 1.0 / d_.rho_cap;
        const double g = (d_.bd * std::log2(a) + affine) * inv_cap - x[n];
        if (grad) {
            const double c = d_.bd / (kLn2 * a) * inv_cap;
            for (int k = 0; k < n; ++k)
                (*grad)[k] = (c * gains[k] + slopes[k] * inv_cap) * d_.scale_p[k];
            (*grad)[n] = -1.0;
        }
        if (hess) {
            hess->set_zero();
            const double c2 = d_.bd / (kLn2 * a * a) * inv_cap;
            for (int p = 0; p < n; ++p) {
                const double vp = gains[p] * d_.scale_p[p];
                for (int q = 0; q < n; ++q)
                    (*hess)(p, q) = -c2 * vp * gains[q] * d_.scale_p[q];
            }
        }
        return g;
    }

private:
    const P1Data& d_;
    double kappa_;
};

// Largest min-rate any feasible power vector could support, from
// interference-free direct bounds, relay-source caps, and per-UAV budgets.
double p1_rho_cap(const Allocation& alloc, const SlotContext& ctx) {
    const ChannelSnapshot& snap = *ctx.snap;
    const Scenario& s = *ctx.scenario;
    double cap = std::numeric_limits<double>::infinity();
    if (snap.num_direct > 0) {
        if (!(alloc.bd_hz > 0.0)) return 0.0;
        for (int n = 0; n < snap.num_direct; ++n) {
            const double snr = ctx.pu_direct_w[n] * snap.d2d(n, n) /
                               (alloc.bd_hz * s.radio.noise_psd_w_per_hz);
            cap = std::min(cap, alloc.bd_hz * std::log2(1.0 + snr));
        }
    }
    std::vector<std::vector<int>> by_uav(s.uavs.size());
    for (std::size_t m = 0; m < alloc.assoc.size(); ++m) {
        const int l = alloc.assoc[m];
        if (l < 0) continue;
        const double br = alloc.br_hz[m];
        if (!(br > 0.0)) return 0.0;
        const double up_snr = ctx.pu_relay_w[m] * snap.uplink(static_cast<int>(m), l) /
                              (br * s.radio.noise_psd_w_per_hz);
        cap = std::min(cap, 0.5 * br * std::log2(1.0 + up_snr));
        by_uav[l].push_back(static_cast<int>(m));
    }
    for (std::size_t l = 0; l < by_uav.size(); ++l) {
        if (by_uav[l].empty()) continue;
        const double budget = s.uavs[l].max_tx_power_w;
        double hi = std::numeric_limits<double>::infinity();
        std::vector<double> c_dn, lam;
        for (int m : by_uav[l]) {
            const double br = alloc.br_hz[m];
            const double c = br * s.radio.noise_psd_w_per_hz / snap.downlink(static_cast<int>(l), m);
            c_dn.push_back(c);
            lam.push_back(2.0 * kLn2 / br);
            hi = std::min(hi, 0.5 * br * std::log2(1.0 + budget / c));
        }
        auto spend = [&](double rho) {
            double sum = 0.0;
            for (std::size_t i = 0; i < c_dn.size(); ++i) sum += c_dn[i] * std::expm1(lam[i] * rho);
            return sum;
        };
        double lo = 0.0;
        if (spend(hi) > budget) {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (spend(mid) > budget ? hi : lo) = mid;
            }
        } else {
            lo = hi;
        }
        cap = std::min(cap, lo);
    }
    if (!std::isfinite(cap)) return 0.0;  // nothing to serve
    return std::max(cap, 0.0);
}

P1Data build_p1(const Allocation& alloc, const SlotContext& ctx,
                const std::vector<double>& expansion_powers) {
    const ChannelSnapshot& snap = *ctx.snap;
    const Scenario& s = *ctx.scenario;
    P1Data d;
    d.n_direct = snap.num_direct;
    d.bd = alloc.bd_hz;
    d.n0 = s.radio.noise_psd_w_per_hz;
    d.tau = ctx.tau;
    d.fixed_j = ctx.fixed_energy_j;
    d.scale_p = ctx.pu_direct_w;
    d.rho_cap = p1_rho_cap(alloc, ctx);

    const int n = d.n_direct;
    d.rx_gain.resize(static_cast<std::size_t>(n) * n);
    d.minor_c0.resize(n);
    d.minor_slope.resize(static_cast<std::size_t>(n) * n);
    d.x_expansion.resize(n);
    for (int k = 0; k < n; ++k) {
        const double cap = d.scale_p[k];
        const double xk = cap > 0.0 ? expansion_powers[k] / cap : 0.5;
        d.x_expansion[k] = std::min(1.0 - 1e-9, std::max(1e-9, xk));
    }
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) d.rx_gain[static_cast<std::size_t>(i) * n + k] = snap.d2d(k, i);
        const AffineForm m = taylor_lower_bound_interference(i, expansion_powers, d.bd, snap, d.n0);
        d.minor_c0[i] = m.constant;
        for (int k = 0; k < n; ++k) d.minor_slope[static_cast<std::size_t>(i) * n + k] = m.coeffs[k];
    }
    for (std::size_t m = 0; m < alloc.assoc.size(); ++m) {
        const int l = alloc.assoc[m];
        if (l < 0) continue;
        RelayTerm r;
        r.idx = static_cast<int>(m);
        r.uav = l;
        const double br = alloc.br_hz[m];
        r.c_up = br * d.n0 / snap.uplink(static_cast<int>(m), l);
        r.c_dn = br * d.n0 / snap.downlink(l, static_cast<int>(m));
        r.lambda = 2.0 * kLn2 / br;
        r.cost_w = ctx.tau * r.c_up +
                   ctx.tau * ctx.gate[l] * s.uavs[l].amp_slope_alpha * r.c_dn;
        d.relays.push_back(r);
    }
    d.trivial = (n == 0 && d.relays.empty()) || !(d.rho_cap > 0.0);
    return d;
}

struct InnerSolution {
    std::vector<double> x;  // scaled, size N+1
    double rho = 0.0;
    double denom_j = 0.0;
    double f_phys = 0.0;  // rho - kappa * denom
    bool ok = false;
};

// Pulls a start point into the strict interior of the scaled feasible set.
// Tries the hint, then mid-box powers, then the minorant expansion point,
// where the bound touches the true rate and is therefore positive.
std::vector<double> interior_start(const P1Data& d, const std::vector<double>& hint) {
    const int n = d.n_direct;
    P1Program probe(d, 0.0);
    auto headroom = [&](const std::vector<double>& x) {
        if (n == 0) return 1.0;
        double min_g = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            std::vector<double> at = x;
            at[n] = 0.0;
            min_g = std::min(min_g, probe.inequality(i, at, nullptr, nullptr));
        }
        return min_g;
    };

    std::vector<double> x(n + 1, 0.5);
    if (static_cast<int>(hint.size()) == n + 1)
        x = hint;
    for (int k = 0; k <= n; ++k) x[k] = std::min(1.0 - 1e-9, std::max(1e-9, x[k]));
    double min_g = headroom(x);
    if (!(min_g > 1e-12)) {
        std::fill(x.begin(), x.end(), 0.5);
        min_g = headroom(x);
    }
    if (!(min_g > 1e-12) && static_cast<int>(d.x_expansion.size()) == n) {
        for (int k = 0; k < n; ++k) x[k] = d.x_expansion[k];
        min_g = headroom(x);
    }
    if (!(min_g > 1e-12)) min_g = 1e-12;
    x[n] = std::min(0.9 * std::min(min_g, 1.0), 1.0 - 1e-9);
    x[n] = std::max(x[n], 1e-10);
    return x;
}

InnerSolution solve_inner(const P1Data& d, double kappa, double barrier_gap,
                          const std::vector<double>& warm) {
    InnerSolution sol;
    const int n = d.n_direct;
    if (d.trivial) {
        sol.x.assign(n + 1, 0.0);
        sol.rho = 0.0;
        sol.denom_j = d.fixed_j;
        sol.f_phys = -kappa * d.fixed_j;
        sol.ok = true;
        return sol;
    }
    P1Program prog(d, kappa);
    std::vector<double> lo(n + 1, 0.0), hi(n + 1, 1.0);
    BarrierOptions opt;
    opt.gap_tol = barrier_gap;
    BarrierResult res = maximize_concave(prog, lo, hi, interior_start(d, warm), opt);
    if (!res.converged) {
        BarrierOptions retry = opt;
        retry.t0 = 1.0;
        res = maximize_concave(prog, lo, hi, interior_start(d, {}), retry);
        if (!res.converged) return sol;
    }
    sol.x = res.x;
    sol.rho = d.rho_cap * res.x[n];
    sol.denom_j = d.denominator_j(res.x);
    sol.f_phys = sol.rho - kappa * sol.denom_j;
    sol.ok = true;
    return sol;
}

// True-ratio line search along t * powers. Rates barely move with scale when
// interference dominates while spent energy shrinks linearly, so the best
// scale can sit decades below the minorized iterate; jumping there directly
// saves the outer loop from crawling down one re-expansion at a time.
void refine_scale(const P1Data& d, InnerSolution& best) {
    const int n = d.n_direct;
    if (n == 0 || !best.ok) return;
    if (!(d.fixed_j > 0.0) && d.relays.empty()) return;  // ratio unbounded in scale
    if (!(d.rho_cap > 0.0)) return;
    double maxx = 0.0;
    for (int k = 0; k < n; ++k) maxx = std::max(maxx, best.x[k]);
    if (!(maxx > 0.0)) return;

    std::vector<double> xs(n + 1, 0.0);
    auto eval = [&](double t, double& rho_out, double& denom_out) {
        double rho = d.rho_cap;
        for (int i = 0; i < n; ++i) {
            const double* gains = &d.rx_gain[static_cast<std::size_t>(i) * n];
            double psi = d.bd * d.n0;
            double own = 0.0;
            for (int k = 0; k < n; ++k) {
                const double v = t * best.x[k] * d.scale_p[k] * gains[k];
                if (k == i)
                    own = v;
                else
                    psi += v;
            }
            rho = std::min(rho, d.bd * std::log2(1.0 + own / psi));
        }
        if (!(rho > 0.0)) {
            rho_out = 0.0;
            denom_out = 0.0;
            return 0.0;
        }
        for (int k = 0; k < n; ++k) xs[k] = t * best.x[k];
        xs[n] = rho / d.rho_cap;
        const double denom = d.denominator_j(xs);
        rho_out = rho;
        denom_out = denom;
        return denom > 0.0 ? rho / denom : 0.0;
    };

    const double u_hi = std::log(1.0 / maxx);
    const double u_lo = u_hi - std::log(1e9);
    double rho_t, denom_t;
    double best_u = 0.0;
    double best_eff = eval(1.0, rho_t, denom_t);  // current iterate
    constexpr int kSamples = 25;
    for (int i = 0; i <= kSamples; ++i) {
        const double u = u_lo + (u_hi - u_lo) * i / kSamples;
        const double eff = eval(std::exp(u), rho_t, denom_t);
        if (eff > best_eff) {
            best_eff = eff;
            best_u = u;
        }
    }
    const double step = (u_hi - u_lo) / kSamples;
    double a = std::max(u_lo, best_u - step);
    double b = std::min(u_hi, best_u + step);
    constexpr double kInvPhi = 0.6180339887498949;
    double c1 = b - kInvPhi * (b - a), c2 = a + kInvPhi * (b - a);
    double f1 = eval(std::exp(c1), rho_t, denom_t);
    double f2 = eval(std::exp(c2), rho_t, denom_t);
    for (int it = 0; it < 48; ++it) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kInvPhi * (b - a);
            f2 = eval(std::exp(c2), rho_t, denom_t);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kInvPhi * (b - a);
            f1 = eval(std::exp(c1), rho_t, denom_t);
        }
    }
    const double u_star = f1 > f2 ? c1 : c2;
    if (std::max(f1, f2) > best_eff) best_u = u_star;

    const double t_star = std::exp(best_u);
    const double eff = eval(t_star, rho_t, denom_t);
    const double cur = best.denom_j > 0.0 ? best.rho / best.denom_j : 0.0;
    if (!(eff > cur) || !(rho_t > 0.0) || !(denom_t > 0.0)) return;
    for (int k = 0; k < n; ++k) best.x[k] = std::min(1.0, t_star * best.x[k]);
    best.x[n] = rho_t / d.rho_cap;
    best.rho = rho_t;
    best.denom_j = denom_t;
}

void materialize(Allocation& alloc, const P1Data& d, const SlotContext& ctx,
                 const InnerSolution& sol) {
    const int n = d.n_direct;
    alloc.d2d_powers_w.assign(n, 0.0);
    for (int k = 0; k < n; ++k)
        alloc.d2d_powers_w[k] =
            std::min(d.scale_p[k], std::max(0.0, d.scale_p[k] * sol.x[k]));
    alloc.uplink_powers_w.assign(alloc.assoc.size(), 0.0);
    alloc.downlink_powers_w.assign(alloc.assoc.size(), 0.0);
    std::vector<double> uav_sum(ctx.scenario->uavs.size(), 0.0);
    for (const auto& r : d.relays) {
        const double grow = std::expm1(r.lambda * sol.rho);
        alloc.uplink_powers_w[r.idx] =
            std::min(ctx.pu_relay_w[r.idx], std::max(0.0, r.c_up * grow));
        alloc.downlink_powers_w[r.idx] = std::max(0.0, r.c_dn * grow);
        uav_sum[r.uav] += alloc.downlink_powers_w[r.idx];
    }
    for (const auto& r : d.relays) {
        const double budget = ctx.scenario->uavs[r.uav].max_tx_power_w;
        if (uav_sum[r.uav] > budget)
            alloc.downlink_powers_w[r.idx] *= budget / uav_sum[r.uav];
    }
}

}  // namespace

bool solve_inner_convex(double kappa, const Allocation& alloc, const SlotContext& ctx,
                        const std::vector<double>& expansion_powers, double barrier_gap,
                        std::vector<double>& d2d_powers_w, double& rho_bit_s, double& f_value) {
    const P1Data d = build_p1(alloc, ctx, expansion_powers);
    const InnerSolution sol = solve_inner(d, kappa, barrier_gap, {});
    if (!sol.ok) return false;
    Allocation out = alloc;
    materialize(out, d, ctx, sol);
    d2d_powers_w = out.d2d_powers_w;
    rho_bit_s = sol.rho;
    f_value = sol.f_phys;
    return true;
}

bool bisect_efficiency(Allocation& alloc, const SlotContext& ctx,
                       const std::vector<double>& expansion_powers, const PowerSolveOptions& opt,
                       double& kappa_star, std::vector<SolverTracePoint>* trace) {
    const P1Data d = build_p1(alloc, ctx, expansion_powers);
    auto record = [&](double kappa, const InnerSolution& s) {
        if (trace)
            trace->push_back(
                {static_cast<int>(trace->size()) + 1, kappa, s.f_phys, s.rho, s.denom_j});
    };

    InnerSolution best = solve_inner(d, 0.0, opt.barrier_gap, {});
    if (!best.ok) return false;
    record(0.0, best);
    const double f0 = best.f_phys;  // largest supportable min-rate
    if (!(f0 > 0.0)) {
        InnerSolution zero;
        zero.x.assign(d.n_direct + 1, 0.0);
        zero.denom_j = d.fixed_j;
        materialize(alloc, d, ctx, zero);
        kappa_star = 0.0;
        return true;
    }
    const double f_stop = opt.f_tol_rel * f0;
    auto ratio = [](const InnerSolution& s) {
        return s.denom_j > 0.0 ? s.rho / s.denom_j : 0.0;
    };

    double kappa_lo = 0.0;
    double kappa_hi;
    if (d.fixed_j > 0.0) {
        kappa_hi = 1.01 * f0 / d.fixed_j;
    } else {
        kappa_hi = std::max(2.0 * ratio(best), 1.0);
        bool bracketed = false;
        for (int i = 0; i < 60; ++i) {
            InnerSolution probe = solve_inner(d, kappa_hi, opt.barrier_gap, best.x);
            if (!probe.ok) return false;
            record(kappa_hi, probe);
            if (probe.f_phys < f_stop) {
                bracketed = true;
                break;
            }
            if (probe.f_phys >= 0.0 && ratio(probe) > ratio(best)) best = probe;
            kappa_hi *= 2.0;
        }
        if (!bracketed) {
            // ratio plateau with no energy floor: return the best point seen
            refine_scale(d, best);
            materialize(alloc, d, ctx, best);
            kappa_star = ratio(best);
            return true;
        }
    }

    for (int i = 0; i < opt.max_root_iters; ++i) {
        const double q = ratio(best);
        double probe_kappa = q;
        if (!(probe_kappa > kappa_lo * (1.0 + 1e-12)) || probe_kappa >= kappa_hi ||
            i % 3 == 2)
            probe_kappa = 0.5 * (kappa_lo + kappa_hi);
        InnerSolution probe = solve_inner(d, probe_kappa, opt.barrier_gap, best.x);
        if (!probe.ok) return false;
        record(probe_kappa, probe);
        if (probe.f_phys >= 0.0) {
            kappa_lo = probe_kappa;
            best = probe;
            if (probe.f_phys <= f_stop) break;
        } else {
            kappa_hi = probe_kappa;
        }
        if (kappa_hi - kappa_lo <= opt.kappa_tol_rel * kappa_hi) break;
    }

    refine_scale(d, best);
    materialize(alloc, d, ctx, best);
    kappa_star = ratio(best);
    return true;
}

PowerSolveResult sca_power_loop(Allocation alloc, const SlotContext& ctx,
                                const PowerSolveOptions& opt) {
    PowerSolveResult out;
    const int n = ctx.snap->num_direct;
    bool any_active = false;
    for (int a : alloc.assoc) any_active |= (a >= 0);

    if (n == 0 && !any_active) {
        alloc.d2d_powers_w.assign(n, 0.0);
        alloc.uplink_powers_w.assign(alloc.assoc.size(), 0.0);
        alloc.downlink_powers_w.assign(alloc.assoc.size(), 0.0);
        out.alloc = alloc;
        out.efficiency = efficiency_bit_per_joule(alloc, ctx);
        out.trace.push_back(out.efficiency);
        out.converged = true;
        return out;
    }

    std::vector<double> expansion(n);
    bool warm_ok = opt.warm_start && static_cast<int>(alloc.d2d_powers_w.size()) == n;
    if (warm_ok)
        for (int k = 0; k < n; ++k)
            warm_ok = warm_ok && alloc.d2d_powers_w[k] > 0.0 &&
                      alloc.d2d_powers_w[k] <= ctx.pu_direct_w[k];
    for (int k = 0; k < n; ++k)
        expansion[k] = warm_ok ? alloc.d2d_powers_w[k] : 0.5 * ctx.pu_direct_w[k];

    double prev_eff = -1.0;
    if (warm_ok && alloc.uplink_powers_w.size() == alloc.assoc.size() &&
        alloc.downlink_powers_w.size() == alloc.assoc.size() &&
        allocation_violation(alloc, *ctx.snap, *ctx.scenario).empty()) {
        prev_eff = efficiency_bit_per_joule(alloc, ctx);
        out.alloc = alloc;
        out.efficiency = prev_eff;
    }

    double best_eff = prev_eff;
    for (int it = 0; it < opt.max_sca_iters; ++it) {
        Allocation work = alloc;
        double kappa = 0.0;
        if (!bisect_efficiency(work, ctx, expansion, opt, kappa, &out.root_trace)) break;
        const double eff = efficiency_bit_per_joule(work, ctx);
        ++out.sca_iterations;
        if (eff > best_eff) {
            best_eff = eff;
            out.alloc = work;
            out.efficiency = eff;
            out.kappa_star = kappa;
        }
        out.trace.push_back(std::max(best_eff, 0.0));
        if (prev_eff >= 0.0 &&
            std::abs(eff - prev_eff) <= opt.sca_tol * std::max(prev_eff, 1e-30)) {
            out.converged = true;
            break;
        }
        prev_eff = eff;
        for (int k = 0; k < n; ++k)
            expansion[k] = std::max(work.d2d_powers_w[k], 1e-9 * ctx.pu_direct_w[k]);
    }
    if (out.trace.empty()) {
        out.alloc = alloc;
        out.efficiency = std::max(best_eff, 0.0);
        out.trace.push_back(out.efficiency);
    }
    if (out.efficiency < 0.0) out.efficiency = 0.0;
    return out;
}

}  // namespace uavd2d
