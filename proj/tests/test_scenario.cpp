#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "test_support.hpp"
#include "uavd2d/scenario.hpp"

using namespace uavd2d;
using namespace uavd2d::testsupport;

TEST_CASE("dbm conversion") {
    CHECK(dbm_to_watts(20.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(dbm_to_watts(25.0) == doctest::Approx(0.31622776601683794).epsilon(1e-12));
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthesis shape and defaults") {
    const Scenario s = synthesize_random_scenario(3, 2, 5, 42, 4, 0.5);
    CHECK(s.num_direct() == 3);
    CHECK(s.num_relay() == 2);
    CHECK(s.uavs.size() == 5);
    CHECK(s.time.num_slots == 4);
    CHECK(s.time.slot_duration_tau == 0.5);
    CHECK(s.rng_seed == 42);

    // direct pairs come first, ids run 1..N+M
    for (int i = 0; i < 5; ++i) CHECK(s.pairs[i].pair_id == i + 1);
    for (int i = 0; i < 3; ++i) CHECK(s.pairs[i].kind == PairKind::Direct);
    for (int i = 3; i < 5; ++i) CHECK(s.pairs[i].kind == PairKind::Relay);

    for (const UserPair& p : s.pairs) {
        CHECK(p.src_trace.size() == 4);
        CHECK(p.dst_trace.size() == 4);
        CHECK(p.max_power_w == doctest::Approx(0.1));
        for (const auto* tr : {&p.src_trace, &p.dst_trace}) {
            for (std::size_t t = 0; t < tr->size(); ++t) {
                const Vec3& v = (*tr)[t];
                CHECK(v.z == 0.0);
                CHECK(v.x >= s.region.x_min);
                CHECK(v.x <= s.region.x_max);
                CHECK(v.y >= s.region.y_min);
                CHECK(v.y <= s.region.y_max);
                if (t > 0)
                    CHECK(distance(v, (*tr)[t - 1]) <=
                          s.region.user_speed_cap_m_s * s.time.slot_duration_tau * (1 + 1e-9));
            }
        }
    }
    CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("five UAVs take the reference deployment") {
    const Scenario s = synthesize_random_scenario(1, 1, 5, 7);
    CHECK(s.uavs[0].initial_position == Vec3{400, 400, 60});
    CHECK(s.uavs[1].initial_position == Vec3{200, 200, 60});
    CHECK(s.uavs[2].initial_position == Vec3{200, 600, 60});
    CHECK(s.uavs[3].initial_position == Vec3{600, 200, 60});
    CHECK(s.uavs[4].initial_position == Vec3{600, 600, 60});
    CHECK(s.uavs[0].initial_battery_j == doctest::Approx(15000.0));
    for (int l = 1; l < 5; ++l) CHECK(s.uavs[l].initial_battery_j == doctest::Approx(7500.0));
    for (const UavSpec& u : s.uavs) {
        CHECK(u.max_speed_m_s == doctest::Approx(15.0));
        CHECK(u.max_tx_power_w == doctest::Approx(0.31622776601683794));
        CHECK(u.amp_offset_beta_w == doctest::Approx(6.8));
    }
}

TEST_CASE("other UAV counts hover at 60 m with half batteries") {
    const Scenario s = synthesize_random_scenario(1, 1, 3, 7);
    for (const UavSpec& u : s.uavs) {
        CHECK(u.initial_position.z == doctest::Approx(60.0));
        CHECK(u.initial_battery_j == doctest::Approx(7500.0));
    }
}

TEST_CASE("synthesis is deterministic in the seed") {
    const Scenario a = synthesize_random_scenario(4, 3, 2, 11);
    const Scenario b = synthesize_random_scenario(4, 3, 2, 11);
    const Scenario c = synthesize_random_scenario(4, 3, 2, 12);
    CHECK(scenario_digest(a) == scenario_digest(b));
    CHECK(scenario_digest(a) != scenario_digest(c));
    CHECK(scenario_to_json_text(a) == scenario_to_json_text(b));
}

TEST_CASE("json round trip preserves the scenario") {
    const Scenario s = synthesize_random_scenario(2, 2, 5, 3);
    const std::string text = scenario_to_json_text(s);
    const Scenario back = scenario_from_json_text(text);
    CHECK(scenario_digest(back) == scenario_digest(s));
    CHECK(scenario_to_json_text(back) == text);
}

TEST_CASE("file round trip") {
    const Scenario s = synthesize_random_scenario(1, 2, 2, 9);
    const std::string path = "/tmp/uavd2d_test_scenario.json";
    write_scenario(s, path);
    const Scenario back = load_scenario(path);
    CHECK(scenario_digest(back) == scenario_digest(s));
    std::remove(path.c_str());
}

TEST_CASE("missing file is a parse error") {
    CHECK_THROWS_AS(load_scenario("/tmp/uavd2d_no_such_file.json"), ParseError);
}

TEST_CASE("validation names the offending entity") {
    const int T = 3;
    Scenario s = base_scenario(T);
    s.uavs.push_back(uav(1, {400, 400, 60}));
    s.pairs.push_back(direct_pair(5, {100, 100, 0}, {120, 100, 0}, T));
    s.pairs.push_back(relay_pair(6, {200, 200, 0}, {600, 600, 0}, T));
    CHECK_NOTHROW(validate_scenario(s));

    SUBCASE("duplicate pair id") {
        s.pairs.push_back(direct_pair(5, {50, 50, 0}, {60, 50, 0}, T));
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "pair 5"));
            CHECK(message_contains(e, "duplicate"));
        }
    }
    SUBCASE("trace length mismatch") {
        s.pairs[0].src_trace.pop_back();
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "pair 5"));
            CHECK(message_contains(e, "exactly 3 entries"));
        }
    }
    SUBCASE("users live on the ground") {
        s.pairs[1].dst_trace[1].z = 4.0;
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "pair 6"));
            CHECK(message_contains(e, "z must be 0"));
        }
    }
    SUBCASE("user speed cap names the slot") {
        s.pairs[0].src_trace[2] = {150.0, 100.0, 0.0};  // 30 m jump >> 1.5 m/s * 1 s
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "pair 5"));
            CHECK(message_contains(e, "speed cap at slot 3"));
        }
    }
    SUBCASE("bounding region") {
        s.pairs[0].dst_trace[0].x = 805.0;
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "pair 5"));
            CHECK(message_contains(e, "bounding region"));
        }
    }
    SUBCASE("relay pairs need a UAV") {
        s.uavs.clear();
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "relay pairs present but no UAVs"));
        }
    }
    SUBCASE("duplicate uav id") {
        s.uavs.push_back(uav(1, {100, 100, 60}));
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(message_contains(e, "uav 1"));
            CHECK(message_contains(e, "duplicate"));
        }
    }
    SUBCASE("battery above capacity") {
        s.uavs[0].initial_battery_j = 2.0 * s.energy.battery_capacity_j;
        CHECK_THROWS_AS(validate_scenario(s), ValidationError);
    }
}

TEST_CASE("power fields accept watts or dbm but not both") {
    const Scenario s = synthesize_random_scenario(1, 0, 0, 1);
    std::string text = scenario_to_json_text(s);
    // rewrite the pair power as dBm
    const std::string key = "\"max_power_w\": 0.1";
    const std::size_t pos = text.find(key);
    REQUIRE(pos != std::string::npos);

    SUBCASE("dbm only converts") {
        text.replace(pos, key.size(), "\"max_power_dbm\": 20.0");
        const Scenario back = scenario_from_json_text(text);
        CHECK(back.pairs[0].max_power_w == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("both forms rejected") {
        text.replace(pos, key.size(), "\"max_power_w\": 0.1, \"max_power_dbm\": 20.0");
        CHECK_THROWS_AS(scenario_from_json_text(text), ParseError);
    }
}

TEST_CASE("digest is sensitive to content") {
    Scenario s = synthesize_random_scenario(2, 1, 1, 5);
    const std::string before = scenario_digest(s);
    s.pairs[0].max_power_w *= 2.0;
    CHECK(scenario_digest(s) != before);
}
