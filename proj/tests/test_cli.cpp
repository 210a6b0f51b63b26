#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, std::string* out = nullptr) {
    const fs::path out_file = fs::path("cli_stdout.txt");
    const std::string cmd =
        std::string(UAVD2D_BIN) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(out_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        *out = ss.str();
    }
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path only_scenario_file(const fs::path& dir) {
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") return e.path();
    return {};
}

}  // namespace

TEST_CASE("bare invocations and bad flags exit with usage errors") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("run --scenario a.json --synthesize 1,1,1") == 1);
    CHECK(run_cli("run") == 1);
    CHECK(run_cli("sweep --values 1:2:1") == 1);
    CHECK(run_cli("sweep --param pl-dbm --values 9:5:1 --synthesize 1,1,1") == 1);
    CHECK(run_cli("run --synthesize 1,1") == 1);
    CHECK(run_cli("run --synthesize 1,1,1 --mode sideways") == 1);
}

TEST_CASE("synthesized scenarios validate cleanly end to end") {
    const fs::path dir = fresh_dir("synth");
    std::string out;
    CHECK(run_cli("synth --synthesize 2,1,1 --seed 3 --slots 2 --out " + dir.string(), &out) ==
          0);
    const fs::path file = only_scenario_file(dir);
    REQUIRE(!file.empty());
    CHECK(out.find("digest") != std::string::npos);

    CHECK(run_cli("validate --scenario " + file.string(), &out) == 0);
    CHECK(out.find("valid: digest=") != std::string::npos);
    CHECK(out.find("direct=2") != std::string::npos);
    CHECK(out.find("relay=1") != std::string::npos);
}

TEST_CASE("missing and invalid scenario files exit with code two") {
    CHECK(run_cli("run --scenario does_not_exist.json") == 2);
    CHECK(run_cli("validate --scenario does_not_exist.json") == 2);

    const fs::path dir = fresh_dir("invalid");
    CHECK(run_cli("synth --synthesize 1,1,1 --seed 4 --out " + dir.string()) == 0);
    const fs::path file = only_scenario_file(dir);
    REQUIRE(!file.empty());
    nlohmann::json j = nlohmann::json::parse(slurp(file));
    j["uavs"][0]["initial_battery_j"] = 1.0e9;
    std::ofstream(file) << j.dump(2);
    std::string out;
    CHECK(run_cli("validate --scenario " + file.string(), &out) == 2);
    CHECK(out.find("battery") != std::string::npos);
}

TEST_CASE("run writes the result tree and repeats byte for byte") {
    const fs::path dir = fresh_dir("run");
    const std::string cmd = "run --synthesize 1,1,1 --seed 5 --slots 2 --jobs 1 --mode both --out " +
                            dir.string();
    std::string out;
    REQUIRE(run_cli(cmd, &out) == 0);
    CHECK(out.find("proposed") != std::string::npos);
    CHECK(out.find("uniform") != std::string::npos);

    std::vector<fs::path> result_dirs;
    for (const auto& e : fs::directory_iterator(dir)) result_dirs.push_back(e.path());
    REQUIRE(result_dirs.size() == 2);
    std::string first_slots, first_agg, first_echo;
    fs::path proposed_dir;
    for (const auto& d : result_dirs) {
        CHECK(fs::exists(d / "slots.csv"));
        CHECK(fs::exists(d / "aggregates.csv"));
        CHECK(fs::exists(d / "config-echo.json"));
        CHECK(!fs::exists(d / "solver_trace.csv"));
        if (d.string().find("-proposed-") != std::string::npos) proposed_dir = d;
    }
    REQUIRE(!proposed_dir.empty());
    first_slots = slurp(proposed_dir / "slots.csv");
    first_agg = slurp(proposed_dir / "aggregates.csv");
    first_echo = slurp(proposed_dir / "config-echo.json");
    CHECK(first_slots.rfind("slot,uav_id,S_joules,E_c,E_ch,", 0) == 0);

    REQUIRE(run_cli(cmd) == 0);
    CHECK(slurp(proposed_dir / "slots.csv") == first_slots);
    CHECK(slurp(proposed_dir / "aggregates.csv") == first_agg);
    CHECK(slurp(proposed_dir / "config-echo.json") == first_echo);

    // The echoed configuration replays every effective setting.
    nlohmann::json echo = nlohmann::json::parse(first_echo);
    CHECK(echo.contains("flags"));
    CHECK(echo.contains("scenario"));
    CHECK(echo["flags"]["seed"] == 5);
    CHECK(echo["flags"]["slots"] == 2);
    CHECK(echo["flags"]["jobs"] == 1);
}

TEST_CASE("the solver trace lands next to the slots when requested") {
    const fs::path dir = fresh_dir("trace");
    REQUIRE(run_cli("run --synthesize 1,1,1 --seed 6 --slots 1 --jobs 1 --mode proposed "
                    "--dump-solver-trace --out " +
                    dir.string()) == 0);
    fs::path result;
    for (const auto& e : fs::directory_iterator(dir)) result = e.path();
    REQUIRE(!result.empty());
    CHECK(fs::exists(result / "solver_trace.csv"));
    const std::string trace = slurp(result / "solver_trace.csv");
    CHECK(trace.rfind("slot,iteration,kappa,f_value,min_rate_bit_s,energy_j", 0) == 0);
    REQUIRE(fs::exists(result / "alternation_trace.csv"));
    const std::string alt = slurp(result / "alternation_trace.csv");
    CHECK(alt.rfind("slot,round,objective_bit_per_j", 0) == 0);
    CHECK(std::count(alt.begin(), alt.end(), '\n') >= 2);
}

TEST_CASE("parameter sweeps write one csv per user count") {
    const fs::path dir = fresh_dir("sweep");
    std::string out;
    REQUIRE(run_cli("sweep --param pl-dbm --values 25:26:1 --users 2 --seeds 1 --seed 2 "
                    "--synthesize 0,0,1 --slots 1 --jobs 1 --mode proposed --out " +
                    dir.string(),
                    &out) == 0);
    fs::path sweep_dir;
    for (const auto& e : fs::directory_iterator(dir)) sweep_dir = e.path();
    REQUIRE(!sweep_dir.empty());
    CHECK(fs::exists(sweep_dir / "config-echo.json"));
    const fs::path csv = sweep_dir / "sweep-u2.csv";
    REQUIRE(fs::exists(csv));
    std::istringstream lines(slurp(csv));
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "param,value,mode,seeds,mean_efficiency_bit_per_j,sd_efficiency,"
          "mean_min_rate_bit_s,sd_min_rate,mean_energy_j_per_s,sd_energy,failures");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) {
        CHECK(line.rfind("pl-dbm,", 0) == 0);
        ++rows;
    }
    CHECK(rows == 2);
}
