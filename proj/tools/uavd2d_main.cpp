#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "uavd2d/csv.hpp"
#include "uavd2d/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace uavd2d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolverFailure = 3;

struct CliConfig {
    std::string scenario_path;
    std::string synthesize;  // "N,M,L"
    std::uint64_t seed = 1;
    bool seed_given = false;
    int seeds = 1;
    std::string mode = "both";
    std::string param;
    std::string values;
    std::string users;
    std::string out_dir = "results";
    int jobs = 0;
    bool dump_trace = false;
    double tau = 1.0;
    bool tau_given = false;
    double tol = 0.0;
    bool tol_given = false;
    int slots = 10;
    bool slots_given = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    for (const std::string& p : split(text, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(p, &used);
            if (used != p.size()) throw std::invalid_argument(p);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": expected integers, got '" + text + "'");
        }
    }
    return out;
}

std::vector<double> parse_values(const std::string& text) {
    const std::vector<std::string> parts = split(text, ':');
    std::vector<double> out;
    auto parse_one = [&](const std::string& p) {
        try {
            std::size_t used = 0;
            const double v = std::stod(p, &used);
            if (used != p.size()) throw std::invalid_argument(p);
            return v;
        } catch (const std::exception&) {
            throw UsageError("--values: expected numbers, got '" + text + "'");
        }
    };
    if (parts.size() == 1) {
        out.push_back(parse_one(parts[0]));
        return out;
    }
    if (parts.size() != 3) throw UsageError("--values: expected A:B:STEP, got '" + text + "'");
    const double a = parse_one(parts[0]);
    const double b = parse_one(parts[1]);
    const double step = parse_one(parts[2]);
    if (step <= 0.0 || b < a) throw UsageError("--values: need A <= B and STEP > 0");
    for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
    return out;
}

struct SynthShape {
    int direct = 10;
    int relay = 10;
    int uavs = 5;
};

SynthShape parse_synthesize(const std::string& text) {
    const std::vector<int> v = parse_int_list(text, "--synthesize");
    if (v.size() != 3 || v[0] < 0 || v[1] < 0 || v[2] < 0)
        throw UsageError("--synthesize: expected N,M,L with nonnegative counts");
    return {v[0], v[1], v[2]};
}

Scenario input_scenario(const CliConfig& cfg) {
    if (!cfg.scenario_path.empty() && !cfg.synthesize.empty())
        throw UsageError("--scenario and --synthesize are mutually exclusive");
    if (cfg.scenario_path.empty() && cfg.synthesize.empty())
        throw UsageError("one of --scenario or --synthesize is required");
    if (!cfg.synthesize.empty()) {
        const SynthShape shape = parse_synthesize(cfg.synthesize);
        return synthesize_random_scenario(shape.direct, shape.relay, shape.uavs, cfg.seed,
                                          cfg.slots, cfg.tau);
    }
    Scenario s = load_scenario(cfg.scenario_path);
    if (cfg.seed_given) s.rng_seed = cfg.seed;
    if (cfg.tau_given) s.time.slot_duration_tau = cfg.tau;
    if (cfg.slots_given) s.time.num_slots = cfg.slots;
    if (cfg.tau_given || cfg.slots_given) validate_scenario(s);
    return s;
}

RusOptions rus_options(const CliConfig& cfg) {
    RusOptions opt;
    opt.parallel = cfg.jobs != 1;
    if (cfg.tol_given) {
        opt.commit.power.sca_tol = cfg.tol;
        opt.commit.bandwidth.sca_tol = cfg.tol;
        opt.commit.alternation_tol = cfg.tol;
    }
    return opt;
}

std::vector<Mode> selected_modes(const std::string& mode) {
    if (mode == "proposed") return {Mode::Proposed};
    if (mode == "uniform") return {Mode::Uniform};
    if (mode == "both") return {Mode::Proposed, Mode::Uniform};
    throw UsageError("--mode: expected proposed|uniform|both, got '" + mode + "'");
}

ordered_json flags_json(const CliConfig& cfg, const std::string& subcommand) {
    ordered_json j;
    j["subcommand"] = subcommand;
    j["scenario"] = cfg.scenario_path;
    j["synthesize"] = cfg.synthesize;
    j["seed"] = cfg.seed;
    j["seeds"] = cfg.seeds;
    j["mode"] = cfg.mode;
    j["param"] = cfg.param;
    j["values"] = cfg.values;
    j["users"] = cfg.users;
    j["out"] = cfg.out_dir;
    j["jobs"] = cfg.jobs;
    j["dump_solver_trace"] = cfg.dump_trace;
    j["tau"] = cfg.tau;
    j["tol"] = cfg.tol_given ? ordered_json(cfg.tol) : ordered_json();
    j["slots"] = cfg.slots;
    return j;
}

void write_config_echo(const fs::path& path, const CliConfig& cfg, const std::string& subcommand,
                       const Scenario* s) {
    ordered_json echo;
    echo["flags"] = flags_json(cfg, subcommand);
    if (s) echo["scenario"] = ordered_json::parse(scenario_to_json_text(*s));
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << echo.dump(2) << "\n";
}

void print_summary(const std::string& label, const EpisodeAggregates& a, const std::string& dir) {
    std::cout << label << ": efficiency=" << format_double(a.mean_efficiency_bit_per_j)
              << " bit/J min_rate=" << format_double(a.mean_min_rate_bit_s)
              << " bit/s energy=" << format_double(a.mean_energy_j_per_s)
              << " J/s fallback_slots=" << a.fallback_slots;
    if (!dir.empty()) std::cout << " -> " << dir;
    std::cout << "\n";
}

int cmd_run(const CliConfig& cfg) {
    const Scenario s = input_scenario(cfg);
    const std::vector<Mode> modes = selected_modes(cfg.mode);
    bool all_ok = true;
    for (Mode mode : modes) {
        EpisodeOptions opt;
        opt.mode = mode;
        opt.rus = rus_options(cfg);
        opt.record_trace = cfg.dump_trace;
        const EpisodeResult r = run_episode(s, opt);
        const fs::path dir =
            fs::path(cfg.out_dir) / run_id(s, mode, "seed" + std::to_string(s.rng_seed));
        fs::create_directories(dir);
        write_slots_csv((dir / "slots.csv").string(), s, r);
        write_aggregates_csv((dir / "aggregates.csv").string(), {{mode, r.aggregates}});
        write_config_echo(dir / "config-echo.json", cfg, "run", &s);
        if (cfg.dump_trace && mode == Mode::Proposed) {
            write_solver_trace_csv((dir / "solver_trace.csv").string(), r);
            write_alternation_csv((dir / "alternation_trace.csv").string(), r);
        }
        print_summary(mode_name(mode), r.aggregates, dir.string());
        if (!r.ok) {
            std::cerr << "episode infeasible: " << r.error << "\n";
            all_ok = false;
        }
    }
    return all_ok ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const CliConfig& cfg) {
    if (cfg.param != "pl-dbm" && cfg.param != "users")
        throw UsageError("--param: expected pl-dbm or users");
    if (cfg.values.empty()) throw UsageError("--values is required for sweep");
    const std::vector<double> values = parse_values(cfg.values);
    const std::vector<Mode> modes = selected_modes(cfg.mode);

    std::optional<Scenario> base;
    if (!cfg.scenario_path.empty()) base = load_scenario(cfg.scenario_path);
    SynthShape shape;
    if (!cfg.synthesize.empty()) shape = parse_synthesize(cfg.synthesize);

    std::vector<int> user_counts;
    if (cfg.param == "pl-dbm" && !cfg.users.empty()) {
        user_counts = parse_int_list(cfg.users, "--users");
        for (int u : user_counts)
            if (u <= 0 || u % 2 != 0)
                throw UsageError("--users: counts must be positive and even");
    }

    const std::string tag = cfg.param + "-seeds" + std::to_string(cfg.seeds) + "-seed" +
                            std::to_string(cfg.seed);
    const fs::path dir = fs::path(cfg.out_dir) / ("sweep-" + tag);
    fs::create_directories(dir);
    write_config_echo(dir / "config-echo.json", cfg, "sweep", base ? &*base : nullptr);

    auto run_one = [&](const SynthShape& sh, const std::string& file_tag) {
        SweepSpec spec;
        spec.param = cfg.param;
        spec.values = values;
        spec.num_seeds = cfg.seeds;
        spec.seed0 = cfg.seed;
        spec.run_proposed = false;
        spec.run_uniform = false;
        for (Mode m : modes)
            (m == Mode::Proposed ? spec.run_proposed : spec.run_uniform) = true;
        spec.synth_direct = sh.direct;
        spec.synth_relay = sh.relay;
        spec.synth_uavs = sh.uavs;
        spec.num_slots = cfg.slots;
        spec.tau_s = cfg.tau;
        spec.base = base ? &*base : nullptr;
        spec.rus = rus_options(cfg);
        const std::vector<SweepRow> rows = run_sweep(spec);
        const fs::path file = dir / ("sweep" + file_tag + ".csv");
        write_sweep_csv(file.string(), cfg.param, rows);
        for (const SweepRow& row : rows) {
            EpisodeAggregates a;
            a.mean_efficiency_bit_per_j = row.mean_efficiency_bit_per_j;
            a.mean_min_rate_bit_s = row.mean_min_rate_bit_s;
            a.mean_energy_j_per_s = row.mean_energy_j_per_s;
            print_summary(std::string(mode_name(row.mode)) + file_tag + " " + cfg.param + "=" +
                              format_double(row.value),
                          a, "");
        }
        std::cout << "wrote " << file.string() << "\n";
    };

    if (user_counts.empty()) {
        run_one(shape, "");
    } else {
        for (int u : user_counts) {
            SynthShape sh = shape;
            sh.direct = u / 2;
            sh.relay = u / 2;
            run_one(sh, "-u" + std::to_string(u));
        }
    }
    return kExitOk;
}

int cmd_synth(const CliConfig& cfg) {
    if (cfg.synthesize.empty()) throw UsageError("synth requires --synthesize N,M,L");
    const SynthShape shape = parse_synthesize(cfg.synthesize);
    const Scenario s = synthesize_random_scenario(shape.direct, shape.relay, shape.uavs, cfg.seed,
                                                  cfg.slots, cfg.tau);
    fs::create_directories(cfg.out_dir);
    const fs::path file = fs::path(cfg.out_dir) / ("scenario-" + scenario_digest(s) + ".json");
    write_scenario(s, file.string());
    std::cout << "wrote " << file.string() << " (digest " << scenario_digest(s) << ")\n";
    return kExitOk;
}

int cmd_validate(const CliConfig& cfg) {
    if (cfg.scenario_path.empty()) throw UsageError("validate requires --scenario PATH");
    const Scenario s = load_scenario(cfg.scenario_path);
    std::cout << "valid: digest=" << scenario_digest(s) << " direct=" << s.num_direct()
              << " relay=" << s.num_relay() << " uavs=" << s.uavs.size()
              << " slots=" << s.time.num_slots << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CliConfig cfg;
    CLI::App app{"energy-efficient D2D with UAV relays: simulator and sweeps"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run one scenario and write per-slot results");
    CLI::App* sweep = app.add_subcommand("sweep", "sweep a parameter over seeds and modes");
    CLI::App* synth = app.add_subcommand("synth", "synthesize a scenario file");
    CLI::App* validate = app.add_subcommand("validate", "check a scenario file");

    for (CLI::App* sub : {run, sweep, synth, validate}) {
        sub->add_option("--scenario", cfg.scenario_path, "scenario JSON path");
        sub->add_option("--synthesize", cfg.synthesize, "synthesize N,M,L (direct,relay,uavs)");
        sub->add_option("--seed", cfg.seed, "RNG seed")->trigger_on_parse();
        sub->add_option("--seeds", cfg.seeds, "number of seeds (sweep)");
        sub->add_option("--mode", cfg.mode, "proposed|uniform|both");
        sub->add_option("--param", cfg.param, "sweep parameter: pl-dbm or users");
        sub->add_option("--values", cfg.values, "sweep values A:B:STEP or single value");
        sub->add_option("--users", cfg.users, "user counts for density sweeps, e.g. 40,100");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--jobs", cfg.jobs, "worker threads for candidate scans (1 = serial)");
        sub->add_flag("--dump-solver-trace", cfg.dump_trace, "write solver_trace.csv");
        sub->add_option("--tau", cfg.tau, "slot duration in seconds");
        sub->add_option("--tol", cfg.tol, "solver tolerance override");
        sub->add_option("--slots", cfg.slots, "number of slots");
    }

    try {
        app.parse(argc, argv);
        cfg.seed_given = app.get_subcommands()[0]->count("--seed") > 0;
        cfg.tau_given = app.get_subcommands()[0]->count("--tau") > 0;
        cfg.tol_given = app.get_subcommands()[0]->count("--tol") > 0;
        cfg.slots_given = app.get_subcommands()[0]->count("--slots") > 0;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return kExitUsage;
    }

#ifdef _OPENMP
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif

    try {
        if (run->parsed()) return cmd_run(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (synth->parsed()) return cmd_synth(cfg);
        return cmd_validate(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const LedgerError& e) {
        std::cerr << "energy ledger error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    }
}
