#include "uavd2d/bandwidth_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uavd2d/convex.hpp"

namespace uavd2d {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double d2d_rate_convex_part(double bd_hz, const std::vector<double>& d2d_powers_w,
                            const ChannelSnapshot& snap, int n, double n0) {
    double phi = bd_hz * n0;
    for (int k = 0; k < snap.num_direct; ++k) phi += d2d_powers_w[k] * snap.d2d(k, n);
    return bd_hz * std::log2(phi);
}

ScalarAffine taylor_lower_bound_bd(double bd_at_r, const std::vector<double>& d2d_powers_w,
                                   const ChannelSnapshot& snap, int n, double n0) {
    double phi = bd_at_r * n0;
    for (int k = 0; k < snap.num_direct; ++k) phi += d2d_powers_w[k] * snap.d2d(k, n);
    ScalarAffine t;
    t.slope = std::log2(phi) + bd_at_r * n0 / (kLn2 * phi);
    t.constant = bd_at_r * std::log2(phi) - t.slope * bd_at_r;
    return t;
}

double hop_rate_convex_part(double br_hz, double power_w, double gain, double n0) {
    return br_hz * std::log2(br_hz * n0 + power_w * gain);
}

ScalarAffine taylor_lower_bound_hop(double br_at_r, double power_w, double gain, double n0) {
    const double phi = br_at_r * n0 + power_w * gain;
    ScalarAffine t;
    t.slope = std::log2(phi) + br_at_r * n0 / (kLn2 * phi);
    t.constant = br_at_r * std::log2(phi) - t.slope * br_at_r;
    return t;
}

namespace {

struct HopTerm {
    double signal = 0.0;  // P*h of this hop
    ScalarAffine tangent;
};

// Scaled convex core of P2 at one expansion: bandwidths in units of the
// budget, min-rate variable in units of rho_cap.
struct P2Data {
    int n_direct = 0;
    int n_active = 0;  // relay pairs carrying traffic
    bool has_bd = false;
    double b_total = 0.0;
    double n0 = 0.0;
    double rho_cap = 0.0;
    std::vector<int> active_idx;       // active slot -> relay index
    std::vector<double> interference;  // per direct pair, excludes own signal
    std::vector<double> with_signal;   // per direct pair, includes own signal
    std::vector<ScalarAffine> bd_tangent;
    std::vector<HopTerm> up, down;  // per active slot

    int dim() const { return (has_bd ? 1 : 0) + n_active + 1; }
    int rho_slot() const { return dim() - 1; }
    int br_slot(int a) const { return (has_bd ? 1 : 0) + a; }
};

class P2Program : public ConcaveProgram {
public:
    explicit P2Program(const P2Data& d) : d_(d) {}

    int dim() const override { return d_.dim(); }
    int num_ineq() const override { return 1 + d_.n_direct + 2 * d_.n_active; }

    double objective(const std::vector<double>& x, std::vector<double>* grad,
                     SquareMatrix* hess) const override {
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        if (hess) hess->set_zero();
        if (grad) (*grad)[d_.rho_slot()] = 1.0;
        return x[d_.rho_slot()];
    }

    double inequality(int i, const std::vector<double>& x, std::vector<double>* grad,
                      SquareMatrix* hess) const override {
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        if (hess) hess->set_zero();
        if (i == 0) {  // budget slack
            double used = 0.0;
            for (int j = 0; j < dim() - 1; ++j) {
                used += x[j];
                if (grad) (*grad)[j] = -1.0;
            }
            return 1.0 - used;
        }
        i -= 1;
        const double inv_cap = 1.0 / d_.rho_cap;
        const int rho = d_.rho_slot();
        if (i < d_.n_direct) {
            const double bd = d_.b_total * x[0];
            const double base = d_.interference[i] + bd * d_.n0;
            const double log_base = std::log2(base);
            const ScalarAffine& t = d_.bd_tangent[i];
            const double g =
                (t.constant + t.slope * bd - bd * log_base) * inv_cap - x[rho];
            if (grad) {
                const double db =
                    t.slope - log_base - bd * d_.n0 / (kLn2 * base);
                (*grad)[0] = db * d_.b_total * inv_cap;
                (*grad)[rho] = -1.0;
            }
            if (hess) {
                const double d2 = -(d_.n0 / (kLn2 * base) +
                                    d_.n0 * d_.interference[i] / (kLn2 * base * base));
                (*hess)(0, 0) = d2 * d_.b_total * d_.b_total * inv_cap;
            }
            return g;
        }
        i -= d_.n_direct;
        const int a = i / 2;
        const HopTerm& h = (i % 2 == 0) ? d_.up[a] : d_.down[a];
        const int j = d_.br_slot(a);
        const double br = d_.b_total * x[j];
        const double log_noise = std::log2(br * d_.n0);
        const double g =
            0.5 * (h.tangent.constant + h.tangent.slope * br - br * log_noise) * inv_cap -
            x[rho];
        if (grad) {
            const double db = 0.5 * (h.tangent.slope - log_noise - 1.0 / kLn2);
            (*grad)[j] = db * d_.b_total * inv_cap;
            (*grad)[rho] = -1.0;
        }
        if (hess)
            (*hess)(j, j) = -0.5 / (br * kLn2) * d_.b_total * d_.b_total * inv_cap;
        return g;
    }

private:
    const P2Data& d_;
};

P2Data build_p2(const Allocation& alloc, const SlotContext& ctx) {
    const ChannelSnapshot& snap = *ctx.snap;
    P2Data d;
    d.n_direct = snap.num_direct;
    d.has_bd = snap.num_direct > 0;
    d.b_total = ctx.scenario->radio.total_bandwidth_hz;
    d.n0 = ctx.scenario->radio.noise_psd_w_per_hz;
    for (std::size_t m = 0; m < alloc.assoc.size(); ++m)
        if (alloc.assoc[m] >= 0) d.active_idx.push_back(static_cast<int>(m));
    d.n_active = static_cast<int>(d.active_idx.size());

    double cap = std::numeric_limits<double>::infinity();
    for (int n = 0; n < d.n_direct; ++n) {
        double inter = 0.0;
        for (int k = 0; k < d.n_direct; ++k)
            if (k != n) inter += alloc.d2d_powers_w[k] * snap.d2d(k, n);
        const double own = alloc.d2d_powers_w[n] * snap.d2d(n, n);
        d.interference.push_back(inter);
        d.with_signal.push_back(inter + own);
        cap = std::min(cap, d.b_total * std::log2(1.0 + own / (inter + d.b_total * d.n0)));
    }
    for (int m : d.active_idx) {
        const int l = alloc.assoc[m];
        HopTerm up, down;
        up.signal = alloc.uplink_powers_w[m] * snap.uplink(m, l);
        down.signal = alloc.downlink_powers_w[m] * snap.downlink(l, m);
        d.up.push_back(up);
        d.down.push_back(down);
        cap = std::min(cap, 0.5 * d.b_total * std::log2(1.0 + up.signal / (d.b_total * d.n0)));
        cap = std::min(cap, 0.5 * d.b_total * std::log2(1.0 + down.signal / (d.b_total * d.n0)));
    }
    d.rho_cap = std::isfinite(cap) ? std::max(cap, 0.0) : 0.0;
    return d;
}

void expand_tangents(P2Data& d, double bd_at_r, const std::vector<double>& br_at_r) {
    d.bd_tangent.clear();
    for (int n = 0; n < d.n_direct; ++n) {
        const double phi = d.with_signal[n] + bd_at_r * d.n0;
        ScalarAffine t;
        t.slope = std::log2(phi) + bd_at_r * d.n0 / (kLn2 * phi);
        t.constant = bd_at_r * std::log2(phi) - t.slope * bd_at_r;
        d.bd_tangent.push_back(t);
    }
    for (int a = 0; a < d.n_active; ++a) {
        const double br = br_at_r[a];
        const double phi_up = br * d.n0 + d.up[a].signal;
        d.up[a].tangent.slope = std::log2(phi_up) + br * d.n0 / (kLn2 * phi_up);
        d.up[a].tangent.constant = br * std::log2(phi_up) - d.up[a].tangent.slope * br;
        const double phi_dn = br * d.n0 + d.down[a].signal;
        d.down[a].tangent.slope = std::log2(phi_dn) + br * d.n0 / (kLn2 * phi_dn);
        d.down[a].tangent.constant = br * std::log2(phi_dn) - d.down[a].tangent.slope * br;
    }
}

}  // namespace

BandwidthSolveResult solve_bandwidth(Allocation alloc, const SlotContext& ctx,
                                     const BandwidthSolveOptions& opt) {
    BandwidthSolveResult out;
    const double b_total = ctx.scenario->radio.total_bandwidth_hz;
    P2Data d = build_p2(alloc, ctx);

    auto finish = [&](Allocation a) {
        out.alloc = std::move(a);
        out.efficiency = efficiency_bit_per_joule(out.alloc, ctx);
        if (out.trace.empty()) out.trace.push_back(out.efficiency);
        out.converged = true;
        return out;
    };

    // Park unassociated relay pairs on the floor.
    for (std::size_t m = 0; m < alloc.assoc.size(); ++m)
        if (alloc.assoc[m] < 0) alloc.br_hz[m] = opt.floor_hz;

    if (d.n_active == 0) {
        alloc.bd_hz = d.n_direct > 0 ? b_total : 0.0;
        return finish(alloc);
    }
    if (!(d.rho_cap > 0.0)) return finish(alloc);

    // Strictly feasible expansion point for the first round.
    double bd = alloc.bd_hz;
    std::vector<double> br(d.n_active);
    for (int a = 0; a < d.n_active; ++a) br[a] = alloc.br_hz[d.active_idx[a]];
    double used = (d.has_bd ? bd : 0.0);
    for (double b : br) used += b;
    bool sane = used <= b_total && (!d.has_bd || bd >= opt.floor_hz);
    for (double b : br) sane = sane && b >= opt.floor_hz;
    if (!sane) {
        bd = d.has_bd ? 0.5 * b_total : 0.0;
        const double share = (b_total - bd) / d.n_active;
        std::fill(br.begin(), br.end(), share);
        used = b_total;
    }
    if (used >= b_total * (1.0 - 1e-9)) {
        const double shrink = (b_total * (1.0 - 1e-9)) / used;
        bd *= shrink;
        for (double& b : br) b *= shrink;
    }

    Allocation work = alloc;
    double prev_eff = -1.0;
    double best_eff = -1.0;
    P2Program prog(d);
    for (int it = 0; it < opt.max_sca_iters; ++it) {
        expand_tangents(d, bd, br);
        const int nb = d.dim();
        std::vector<double> lo(nb, 0.0), hi(nb, 1.0), x0(nb, 0.0);
        if (d.has_bd) lo[0] = opt.floor_hz / b_total;
        for (int a = 0; a < d.n_active; ++a) lo[d.br_slot(a)] = opt.floor_hz / b_total;
        if (d.has_bd) x0[0] = bd / b_total;
        for (int a = 0; a < d.n_active; ++a) x0[d.br_slot(a)] = br[a] / b_total;
        // true rates at the expansion equal the minorized rates there
        double min_scaled = std::numeric_limits<double>::infinity();
        {
            std::vector<double> probe = x0;
            probe[d.rho_slot()] = 0.0;
            for (int i = 1; i < prog.num_ineq(); ++i)
                min_scaled = std::min(min_scaled, prog.inequality(i, probe, nullptr, nullptr));
        }
        if (!(min_scaled > 1e-12)) break;
        x0[d.rho_slot()] = std::max(1e-10, std::min(0.9 * min_scaled, 1.0 - 1e-9));

        BarrierOptions bopt;
        bopt.gap_tol = opt.barrier_gap;
        BarrierResult res = maximize_concave(prog, lo, hi, x0, bopt);
        if (!res.converged) break;

        double new_bd = d.has_bd ? b_total * res.x[0] : 0.0;
        std::vector<double> new_br(d.n_active);
        double total = new_bd;
        for (int a = 0; a < d.n_active; ++a) {
            new_br[a] = b_total * res.x[d.br_slot(a)];
            total += new_br[a];
        }
        if (total > b_total) {
            const double shrink = b_total / total;
            new_bd *= shrink;
            for (double& b : new_br) b *= shrink;
        }
        work.bd_hz = d.has_bd ? new_bd : alloc.bd_hz;
        for (int a = 0; a < d.n_active; ++a) work.br_hz[d.active_idx[a]] = new_br[a];

        const double eff = efficiency_bit_per_joule(work, ctx);
        ++out.sca_iterations;
        if (eff > best_eff) {
            best_eff = eff;
            out.alloc = work;
            out.efficiency = eff;
        }
        out.trace.push_back(best_eff);
        if (prev_eff >= 0.0 &&
            std::abs(eff - prev_eff) <= opt.sca_tol * std::max(prev_eff, 1e-30)) {
            out.converged = true;
            break;
        }
        prev_eff = eff;
        bd = new_bd;
        br = new_br;
    }
    if (out.trace.empty()) return finish(alloc);
    return out;
}

}  // namespace uavd2d
