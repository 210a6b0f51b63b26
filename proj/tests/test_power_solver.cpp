#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "uavd2d/power_solver.hpp"
#include "uavd2d/rng.hpp"
#include "uavd2d/slot_context.hpp"

#include "test_support.hpp"

using namespace uavd2d;
using namespace uavd2d::testsupport;

namespace {

// Owns the scenario plus the snapshot/context pair so the context's pointers
// stay valid for the fixture's lifetime. Not movable on purpose.
struct SlotFixture {
    Scenario s;
    std::vector<Vec3> pos;
    std::vector<double> speeds;
    ChannelSnapshot snap;
    SlotContext ctx;

    explicit SlotFixture(Scenario sc) : s(std::move(sc)) {
        for (const auto& u : s.uavs) pos.push_back(u.initial_position);
        speeds.assign(s.uavs.size(), 0.0);
        snap = make_snapshot(s, pos, 1);
        ctx = make_slot_context(s, snap, pos, speeds);
    }
    SlotFixture(const SlotFixture&) = delete;
    SlotFixture& operator=(const SlotFixture&) = delete;
};

Allocation caps_allocation(const SlotFixture& fx, double bd_hz, double br_hz) {
    Allocation a;
    a.bd_hz = bd_hz;
    for (int i : fx.s.direct_indices()) a.d2d_powers_w.push_back(fx.s.pairs[i].max_power_w);
    for (int i : fx.s.relay_indices()) {
        a.br_hz.push_back(br_hz);
        a.uplink_powers_w.push_back(fx.s.pairs[i].max_power_w);
        a.downlink_powers_w.push_back(fx.s.uavs[0].max_tx_power_w);
        a.assoc.push_back(0);
    }
    return a;
}

// Efficiency recomputed from scratch with the test's own arithmetic. The
// power vector packs direct powers first, then (uplink, downlink) per relay.
double recompute_efficiency(const SlotFixture& fx, const Allocation& shape,
                            const std::vector<double>& p) {
    const double n0 = fx.s.radio.noise_psd_w_per_hz;
    const int nd = fx.snap.num_direct;
    const int nr = fx.snap.num_relay;
    double min_rate = std::numeric_limits<double>::infinity();
    for (int n = 0; n < nd; ++n) {
        double den = shape.bd_hz * n0;
        for (int k = 0; k < nd; ++k)
            if (k != n) den += p[k] * fx.snap.d2d(k, n);
        const double rate = shape.bd_hz * std::log2(1.0 + p[n] * fx.snap.d2d(n, n) / den);
        min_rate = std::min(min_rate, rate);
    }
    for (int m = 0; m < nr; ++m) {
        const double pu = p[nd + 2 * m];
        const double pl = p[nd + 2 * m + 1];
        const double br = shape.br_hz[m];
        const int l = shape.assoc[m];
        const double up = br * std::log2(1.0 + pu * fx.snap.uplink(m, l) / (br * n0));
        const double dn = br * std::log2(1.0 + pl * fx.snap.downlink(l, m) / (br * n0));
        min_rate = std::min(min_rate, 0.5 * std::min(up, dn));
    }
    double energy = fx.ctx.fixed_energy_j;
    for (int n = 0; n < nd; ++n) energy += fx.ctx.tau * p[n];
    for (int m = 0; m < nr; ++m) {
        const int l = shape.assoc[m];
        energy += fx.ctx.tau * p[nd + 2 * m];
        energy += fx.ctx.tau * fx.ctx.gate[l] * fx.s.uavs[l].amp_slope_alpha * p[nd + 2 * m + 1];
    }
    if (!(energy > 0.0) || !std::isfinite(min_rate)) return 0.0;
    return min_rate / energy;
}

std::vector<double> pack_powers(const Allocation& a) {
    std::vector<double> p(a.d2d_powers_w);
    for (std::size_t m = 0; m < a.uplink_powers_w.size(); ++m) {
        p.push_back(a.uplink_powers_w[m]);
        p.push_back(a.downlink_powers_w[m]);
    }
    return p;
}

std::vector<double> pack_caps(const SlotFixture& fx) {
    std::vector<double> caps;
    for (int i : fx.s.direct_indices()) caps.push_back(fx.s.pairs[i].max_power_w);
    for (int i : fx.s.relay_indices()) {
        caps.push_back(fx.s.pairs[i].max_power_w);
        caps.push_back(fx.s.uavs[0].max_tx_power_w);
    }
    return caps;
}

// Dense search: a log-spaced sweep per dimension (plus exact zero) followed
// by linear zooms around the best joint point.
double grid_best_efficiency(const std::function<double(const std::vector<double>&)>& eval,
                            const std::vector<double>& caps) {
    const int dims = static_cast<int>(caps.size());
    std::vector<std::vector<double>> axes(dims);
    for (int d = 0; d < dims; ++d) {
        axes[d].push_back(0.0);
        const int pts = 25;
        const double lo = caps[d] * 1e-9;
        for (int i = 0; i < pts; ++i)
            axes[d].push_back(lo * std::pow(caps[d] / lo, double(i) / (pts - 1)));
    }
    std::vector<double> p(dims, 0.0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> best_p(dims, 0.0);
    std::function<void(int)> walk = [&](int d) {
        if (d == dims) {
            const double v = eval(p);
            if (v > best) {
                best = v;
                best_p = p;
            }
            return;
        }
        for (double x : axes[d]) {
            p[d] = x;
            walk(d + 1);
        }
    };
    walk(0);

    // Linear zooms: bracket each coordinate by one multiplicative step (or
    // the full low end when the winner sits at zero), then shrink.
    std::vector<double> lo(dims), hi(dims);
    for (int d = 0; d < dims; ++d) {
        if (best_p[d] <= 0.0) {
            lo[d] = 0.0;
            hi[d] = caps[d] * 1e-8;
        } else {
            lo[d] = std::max(0.0, best_p[d] / 2.2);
            hi[d] = std::min(caps[d], best_p[d] * 2.2);
        }
    }
    for (int round = 0; round < 5; ++round) {
        const int pts = 13;
        for (int d = 0; d < dims; ++d) {
            axes[d].assign(1, lo[d]);
            for (int i = 1; i < pts; ++i)
                axes[d].push_back(lo[d] + (hi[d] - lo[d]) * double(i) / (pts - 1));
        }
        walk(0);
        for (int d = 0; d < dims; ++d) {
            const double step = (hi[d] - lo[d]) / (pts - 1);
            lo[d] = std::max(0.0, best_p[d] - step);
            hi[d] = std::min(caps[d], best_p[d] + step);
        }
    }
    return best;
}

Scenario one_uav_scenario(const Vec3& uav_pos) {
    Scenario s = base_scenario(1);
    s.uavs.push_back(uav(1, uav_pos));
    return s;
}

Scenario two_direct_symmetric() {
    // Off the charging station so hovering contributes fixed energy and the
    // ratio has an attained maximum.
    Scenario s = one_uav_scenario({400.0, 330.0, 60.0});
    s.pairs.push_back(direct_pair(2, {380.0, 400.0, 0.0}, {385.0, 400.0, 0.0}, 1));
    s.pairs.push_back(direct_pair(3, {420.0, 400.0, 0.0}, {415.0, 400.0, 0.0}, 1));
    validate_scenario(s);
    return s;
}

Scenario one_relay_generous() {
    Scenario s = one_uav_scenario({420.0, 420.0, 80.0});
    s.uavs[0].max_tx_power_w = 2.0;
    s.pairs.push_back(relay_pair(2, {350.0, 380.0, 0.0}, {520.0, 470.0, 0.0}, 1, 2.0));
    validate_scenario(s);
    return s;
}

Scenario mixed_pair() {
    Scenario s = one_uav_scenario({410.0, 390.0, 70.0});
    s.pairs.push_back(direct_pair(2, {430.0, 380.0, 0.0}, {470.0, 360.0, 0.0}, 1));
    s.pairs.push_back(relay_pair(3, {300.0, 430.0, 0.0}, {560.0, 350.0, 0.0}, 1));
    validate_scenario(s);
    return s;
}

Scenario random_tiny(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, "tiny-p1");
    auto coord = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_double(); };
    Scenario s = one_uav_scenario({coord(300, 500), coord(300, 500), coord(40, 100)});
    const bool with_relay = rng.next_double() < 0.5;
    const int nd = with_relay ? 1 : 2;
    int id = 2;
    for (int n = 0; n < nd; ++n) {
        const Vec3 src{coord(250, 550), coord(250, 550), 0.0};
        const Vec3 dst{src.x + coord(-80, 80), src.y + coord(-80, 80), 0.0};
        s.pairs.push_back(direct_pair(id++, src, dst, 1));
    }
    if (with_relay)
        s.pairs.push_back(relay_pair(id++, {coord(100, 300), coord(100, 300), 0.0},
                                     {coord(500, 700), coord(500, 700), 0.0}, 1));
    validate_scenario(s);
    return s;
}

}  // namespace

TEST_CASE("interference tangent touches the exact penalty and matches its slope") {
    SlotFixture fx(two_direct_symmetric());
    RngStream rng = derive_stream(11, "tangent");
    const double bd = 1.0e7;
    const double n0 = fx.s.radio.noise_psd_w_per_hz;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> r(2);
        for (double& v : r) v = 0.1 * rng.next_double();
        for (int n = 0; n < 2; ++n) {
            const AffineForm f = taylor_lower_bound_interference(n, r, bd, fx.snap, n0);
            const double exact = interference_penalty_exact(n, r, bd, fx.snap, n0);
            CHECK(f.value(r) == doctest::Approx(exact).epsilon(1e-9));
            CHECK(f.coeffs[n] == 0.0);
            // Centered differences on the exact penalty, step sized so the
            // noise term under the log moves 2e-5 relative.
            double psi = bd * n0;
            for (int j = 0; j < 2; ++j)
                if (j != n) psi += r[j] * fx.snap.d2d(j, n);
            for (int k = 0; k < 2; ++k) {
                if (k == n) continue;
                const double h = 2e-5 * psi / fx.snap.d2d(k, n);
                std::vector<double> up = r, dn = r;
                up[k] += h;
                dn[k] -= h;
                const double fd = (interference_penalty_exact(n, up, bd, fx.snap, n0) -
                                   interference_penalty_exact(n, dn, bd, fx.snap, n0)) /
                                  (2.0 * h);
                CHECK(f.coeffs[k] == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("interference tangent stays below the exact penalty everywhere") {
    Scenario s = one_uav_scenario({400.0, 400.0, 60.0});
    RngStream place = derive_stream(23, "minorant-geometry");
    int id = 2;
    for (int n = 0; n < 4; ++n) {
        const double x = 100.0 + 600.0 * place.next_double();
        const double y = 100.0 + 600.0 * place.next_double();
        s.pairs.push_back(direct_pair(id++, {x, y, 0.0},
                                      {x + 40.0 * (place.next_double() - 0.5),
                                       y + 40.0 * (place.next_double() - 0.5), 0.0},
                                      1));
    }
    validate_scenario(s);
    SlotFixture fx(s);
    RngStream rng = derive_stream(29, "minorant-pairs");
    const double bd = 8.0e6;
    const double n0 = fx.s.radio.noise_psd_w_per_hz;
    const int nd = fx.snap.num_direct;
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> r(nd), q(nd);
        for (int k = 0; k < nd; ++k) {
            r[k] = 0.1 * rng.next_double();
            q[k] = 0.1 * rng.next_double();
        }
        const int n = trial % nd;
        const AffineForm f = taylor_lower_bound_interference(n, r, bd, fx.snap, n0);
        const double exact = interference_penalty_exact(n, q, bd, fx.snap, n0);
        CHECK(f.value(q) <= exact + 1e-9 * std::fabs(exact));
        ++checked;
    }
    CHECK(checked == 300);
}

TEST_CASE("inner problem value falls strictly as the ratio parameter rises") {
    SlotFixture fx(mixed_pair());
    Allocation shape = caps_allocation(fx, 1.0e7, 5.0e6);
    const std::vector<double> expansion = shape.d2d_powers_w;
    double f0 = 0.0;
    {
        std::vector<double> p;
        double rho = 0.0;
        REQUIRE(solve_inner_convex(0.0, shape, fx.ctx, expansion, 1e-8, p, rho, f0));
        CHECK(f0 > 0.0);
        CHECK(rho > 0.0);
    }
    const double eff_caps = efficiency_bit_per_joule(shape, fx.ctx);
    double prev = f0;
    for (int j = 1; j <= 8; ++j) {
        const double kappa = eff_caps * 0.3 * j;
        std::vector<double> p;
        double rho = 0.0, f = 0.0;
        REQUIRE(solve_inner_convex(kappa, shape, fx.ctx, expansion, 1e-8, p, rho, f));
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("ratio search drives the inner value to zero") {
    SlotFixture fx(mixed_pair());
    Allocation shape = caps_allocation(fx, 1.0e7, 5.0e6);
    const std::vector<double> expansion = shape.d2d_powers_w;
    double f0 = 0.0;
    {
        std::vector<double> p;
        double rho = 0.0;
        REQUIRE(solve_inner_convex(0.0, shape, fx.ctx, expansion, 1e-8, p, rho, f0));
    }
    Allocation a = shape;
    double kappa_star = 0.0;
    std::vector<SolverTracePoint> trace;
    PowerSolveOptions opt;
    REQUIRE(bisect_efficiency(a, fx.ctx, expansion, opt, kappa_star, &trace));
    CHECK(kappa_star > 0.0);
    std::vector<double> p;
    double rho = 0.0, f_star = 0.0;
    REQUIRE(solve_inner_convex(kappa_star, shape, fx.ctx, expansion, 1e-8, p, rho, f_star));
    CHECK(std::fabs(f_star) < 1e-4 * f0);
    CHECK(allocation_violation(a, fx.snap, fx.s).empty());
    CHECK(!trace.empty());
}

TEST_CASE("successive refinement never lowers the kept objective") {
    for (std::uint64_t seed : {3u, 4u, 5u, 6u}) {
        SlotFixture fx(random_tiny(seed));
        Allocation start = caps_allocation(fx, 1.0e7, 5.0e6);
        PowerSolveResult res = sca_power_loop(start, fx.ctx);
        REQUIRE(res.converged);
        REQUIRE(!res.trace.empty());
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i] >= res.trace[i - 1] * (1.0 - 1e-9));
        CHECK(res.efficiency == doctest::Approx(res.trace.back()).epsilon(1e-12));
    }
}

TEST_CASE("optimized powers never fall below the all-caps baseline") {
    for (std::uint64_t seed : {8u, 9u, 10u}) {
        SlotFixture fx(random_tiny(seed));
        Allocation start = caps_allocation(fx, 1.0e7, 5.0e6);
        const double eff_caps = efficiency_bit_per_joule(start, fx.ctx);
        PowerSolveResult res = sca_power_loop(start, fx.ctx);
        CHECK(res.efficiency >= eff_caps * (1.0 - 1e-9));
        CHECK(allocation_violation(res.alloc, fx.snap, fx.s).empty());
        const double replay = efficiency_bit_per_joule(res.alloc, fx.ctx);
        CHECK(res.efficiency == doctest::Approx(replay).epsilon(1e-12));
    }
}

TEST_CASE("two mirrored pairs receive the same power") {
    SlotFixture fx(two_direct_symmetric());
    Allocation start = caps_allocation(fx, 1.0e7, 0.0);
    PowerSolveResult res = sca_power_loop(start, fx.ctx);
    REQUIRE(res.converged);
    CHECK(res.alloc.d2d_powers_w[0] ==
          doctest::Approx(res.alloc.d2d_powers_w[1]).epsilon(1e-6));
}

TEST_CASE("power search matches a dense grid on tiny instances") {
    int compared = 0;
    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u, 26u}) {
        SlotFixture fx(random_tiny(seed));
        Allocation shape = caps_allocation(fx, 1.0e7, 5.0e6);
        const std::vector<double> caps = pack_caps(fx);
        const double grid = grid_best_efficiency(
            [&](const std::vector<double>& p) { return recompute_efficiency(fx, shape, p); },
            caps);
        PowerSolveResult res = sca_power_loop(shape, fx.ctx);
        REQUIRE(res.converged);
        CHECK(res.efficiency >= grid * 0.98);
        CHECK(res.efficiency <= grid * 1.02);
        // The solver's own ratio agrees with the test's recomputation.
        const double replay = recompute_efficiency(fx, res.alloc, pack_powers(res.alloc));
        CHECK(res.efficiency == doctest::Approx(replay).epsilon(1e-9));
        ++compared;
    }
    CHECK(compared == 6);
}

TEST_CASE("generous relay caps produce an interior downlink power") {
    SlotFixture fx(one_relay_generous());
    Allocation shape = caps_allocation(fx, 1.0e6, 5.0e6);
    const std::vector<double> caps = pack_caps(fx);
    const double grid = grid_best_efficiency(
        [&](const std::vector<double>& p) { return recompute_efficiency(fx, shape, p); }, caps);
    PowerSolveResult res = sca_power_loop(shape, fx.ctx);
    REQUIRE(res.converged);
    CHECK(res.efficiency >= grid * 0.98);
    CHECK(res.efficiency <= grid * 1.02);
    // The exponential downlink cost must pull the optimum off the cap.
    CHECK(res.alloc.downlink_powers_w[0] < 0.9 * fx.s.uavs[0].max_tx_power_w);
    CHECK(res.alloc.downlink_powers_w[0] > 0.0);
}

TEST_CASE("relay hops come out balanced when no cap binds") {
    SlotFixture fx(one_relay_generous());
    Allocation shape = caps_allocation(fx, 1.0e6, 5.0e6);
    PowerSolveResult res = sca_power_loop(shape, fx.ctx);
    REQUIRE(res.converged);
    RateReport rep = evaluate_rates(res.alloc, fx.snap, fx.s);
    CHECK(rep.uplink_rates[0] == doctest::Approx(rep.downlink_rates[0]).epsilon(1e-6));
}

TEST_CASE("no pairs means zero efficiency and a clean exit") {
    Scenario s = one_uav_scenario({400.0, 400.0, 60.0});
    validate_scenario(s);
    SlotFixture fx(s);
    Allocation empty;
    empty.bd_hz = fx.s.radio.total_bandwidth_hz;
    PowerSolveResult res = sca_power_loop(empty, fx.ctx);
    CHECK(res.converged);
    CHECK(res.efficiency == 0.0);
    CHECK(res.alloc.d2d_powers_w.empty());
}

TEST_CASE("repeat solves are bitwise identical") {
    SlotFixture fx(mixed_pair());
    Allocation start = caps_allocation(fx, 1.0e7, 5.0e6);
    PowerSolveResult a = sca_power_loop(start, fx.ctx);
    PowerSolveResult b = sca_power_loop(start, fx.ctx);
    CHECK(a.efficiency == b.efficiency);
    CHECK(a.alloc.d2d_powers_w == b.alloc.d2d_powers_w);
    CHECK(a.alloc.uplink_powers_w == b.alloc.uplink_powers_w);
    CHECK(a.alloc.downlink_powers_w == b.alloc.downlink_powers_w);
}
