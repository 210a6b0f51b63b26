#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "uavd2d/rates.hpp"

using namespace uavd2d;
using namespace uavd2d::testsupport;

namespace {

// two direct pairs, one relay pair, two UAVs; geometry chosen by hand
Scenario small_scenario() {
    const int T = 2;
    Scenario s = base_scenario(T);
    s.uavs.push_back(uav(1, {400, 400, 60}));
    s.uavs.push_back(uav(2, {200, 200, 60}));
    s.pairs.push_back(direct_pair(1, {100, 100, 0}, {150, 100, 0}, T));
    s.pairs.push_back(direct_pair(2, {700, 700, 0}, {650, 700, 0}, T));
    s.pairs.push_back(relay_pair(3, {460, 480, 0}, {300, 300, 0}, T));
    validate_scenario(s);
    return s;
}

ChannelSnapshot snapshot_of(const Scenario& s) {
    std::vector<Vec3> pos;
    for (const UavSpec& u : s.uavs) pos.push_back(u.initial_position);
    return make_snapshot(s, pos, 1);
}

Allocation feasible_allocation(const Scenario& s) {
    Allocation a;
    a.bd_hz = 1.0e7;
    a.br_hz = {1.0e7};
    a.d2d_powers_w = {0.1, 0.1};
    a.uplink_powers_w = {0.1};
    a.downlink_powers_w = {0.3};
    a.assoc = {0};
    return a;
}

}  // namespace

TEST_CASE("hop rate against a reference value") {
    // computed independently with 30-digit arithmetic
    CHECK(relay_uplink_rate(2.0e6, 0.1, 1.0e-8, 2.5e-25) ==
          doctest::Approx(61794705.70941522).epsilon(1e-12));
    CHECK(relay_downlink_rate(2.0e6, 0.1, 1.0e-8, 2.5e-25) ==
          relay_uplink_rate(2.0e6, 0.1, 1.0e-8, 2.5e-25));
}

TEST_CASE("hop rate edge cases and monotonicity") {
    CHECK(relay_uplink_rate(0.0, 0.0, 1e-8, 2.5e-25) == 0.0);
    CHECK_THROWS(relay_uplink_rate(0.0, 0.1, 1e-8, 2.5e-25));
    CHECK(relay_uplink_rate(1e6, 0.0, 1e-8, 2.5e-25) == 0.0);

    double prev = 0.0;
    for (double p = 0.01; p <= 0.3; p += 0.02) {
        const double r = relay_uplink_rate(2e6, p, 1e-8, 2.5e-25);
        CHECK(r > prev);
        prev = r;
    }
    prev = 0.0;
    for (double b = 1e5; b <= 2e7; b *= 2.0) {
        const double r = relay_uplink_rate(b, 0.1, 1e-8, 2.5e-25);
        CHECK(r > prev);  // more bandwidth always helps a noise-limited link
        prev = r;
    }
}

TEST_CASE("decode-and-forward bottleneck") {
    CHECK(df_end_to_end(10.0, 6.0) == doctest::Approx(3.0));
    CHECK(df_end_to_end(6.0, 10.0) == doctest::Approx(3.0));
    CHECK(df_end_to_end(0.0, 10.0) == 0.0);
}

TEST_CASE("d2d rate includes cross interference") {
    const Scenario s = small_scenario();
    const ChannelSnapshot snap = snapshot_of(s);
    Allocation a = feasible_allocation(s);
    const double n0 = s.radio.noise_psd_w_per_hz;

    // closed-form recomputation
    const double wanted = a.d2d_powers_w[0] * snap.d2d(0, 0);
    const double interference = a.d2d_powers_w[1] * snap.d2d(1, 0);
    const double expected =
        a.bd_hz * std::log2(1.0 + wanted / (interference + a.bd_hz * n0));
    CHECK(d2d_rate(0, a, snap, n0) == doctest::Approx(expected).epsilon(1e-12));

    // silencing the interferer raises the rate
    const double with_interference = d2d_rate(0, a, snap, n0);
    a.d2d_powers_w[1] = 0.0;
    CHECK(d2d_rate(0, a, snap, n0) > with_interference);
}

TEST_CASE("interference-dominated rates are scale invariant") {
    const Scenario s = small_scenario();
    const ChannelSnapshot snap = snapshot_of(s);
    Allocation a = feasible_allocation(s);
    const double n0 = s.radio.noise_psd_w_per_hz;
    const double base = d2d_rate(0, a, snap, n0);
    Allocation half = a;
    half.d2d_powers_w[0] *= 0.5;
    half.d2d_powers_w[1] *= 0.5;
    // at these gains the noise floor is ~1e-17 W against ~1e-10 W interference
    CHECK(d2d_rate(0, half, snap, n0) == doctest::Approx(base).epsilon(1e-4));
}

TEST_CASE("violation catalogue") {
    const Scenario s = small_scenario();
    const ChannelSnapshot snap = snapshot_of(s);
    const Allocation good = feasible_allocation(s);
    CHECK(allocation_violation(good, snap, s).empty());

    SUBCASE("shape") {
        Allocation a = good;
        a.d2d_powers_w.pop_back();
        CHECK(allocation_violation(a, snap, s) == "allocation shape does not match the scenario");
    }
    SUBCASE("bandwidth budget counts only served relay pairs") {
        Allocation a = good;
        a.br_hz = {1.5e7};  // bd + br > 20 MHz while served
        CHECK(allocation_violation(a, snap, s) == "bandwidth budget exceeded");
        a.assoc = {-1};
        CHECK(allocation_violation(a, snap, s).empty());
    }
    SUBCASE("direct power cap names the pair") {
        Allocation a = good;
        a.d2d_powers_w[1] = 0.2;
        CHECK(allocation_violation(a, snap, s) ==
              "direct-pair power outside [0, max] for pair 2");
    }
    SUBCASE("uplink power cap names the pair") {
        Allocation a = good;
        a.uplink_powers_w[0] = 0.11;
        CHECK(allocation_violation(a, snap, s) ==
              "relay-source power outside [0, max] for pair 3");
    }
    SUBCASE("downlink budget per UAV") {
        Allocation a = good;
        a.downlink_powers_w[0] = 0.4;  // above 0.3162...
        CHECK(allocation_violation(a, snap, s) == "downlink power budget exceeded at uav 1");
    }
    SUBCASE("association range") {
        Allocation a = good;
        a.assoc[0] = 2;
        CHECK(allocation_violation(a, snap, s) == "association references a missing UAV");
    }
    SUBCASE("negative bandwidth") {
        Allocation a = good;
        a.bd_hz = -1.0;
        CHECK(allocation_violation(a, snap, s) == "negative shared bandwidth");
    }
}

TEST_CASE("rate report assembles the max-min objective") {
    const Scenario s = small_scenario();
    const ChannelSnapshot snap = snapshot_of(s);
    Allocation a = feasible_allocation(s);
    const double n0 = s.radio.noise_psd_w_per_hz;

    const RateReport r = evaluate_rates(a, snap, s);
    CHECK(r.direct_rates.size() == 2);
    CHECK(r.relay_rates.size() == 1);
    CHECK(r.direct_rates[0] == doctest::Approx(d2d_rate(0, a, snap, n0)));
    CHECK(r.uplink_rates[0] ==
          doctest::Approx(relay_uplink_rate(a.br_hz[0], a.uplink_powers_w[0], snap.uplink(0, 0),
                                            n0)));
    CHECK(r.relay_rates[0] == doctest::Approx(df_end_to_end(r.uplink_rates[0],
                                                            r.downlink_rates[0])));
    const double expect_min =
        std::min({r.direct_rates[0], r.direct_rates[1], r.relay_rates[0]});
    CHECK(r.min_rate == doctest::Approx(expect_min));
    CHECK(r.min_rate > 0.0);
}

TEST_CASE("unserved relay pair pins the minimum at zero") {
    const Scenario s = small_scenario();
    const ChannelSnapshot snap = snapshot_of(s);
    Allocation a = feasible_allocation(s);
    a.assoc = {-1};
    const RateReport r = evaluate_rates(a, snap, s);
    CHECK(r.relay_rates[0] == 0.0);
    CHECK(r.min_rate == 0.0);
}

TEST_CASE("invalid allocations do not evaluate") {
    const Scenario s = small_scenario();
    const ChannelSnapshot snap = snapshot_of(s);
    Allocation a = feasible_allocation(s);
    a.bd_hz = 2.5e7;
    CHECK_THROWS(evaluate_rates(a, snap, s));
}

TEST_CASE("empty scenario evaluates to zero") {
    Scenario s = base_scenario(1);
    validate_scenario(s);
    const ChannelSnapshot snap = make_snapshot(s, {}, 1);
    Allocation a;
    const RateReport r = evaluate_rates(a, snap, s);
    CHECK(r.min_rate == 0.0);
}
