// Times the candidate-evaluation kernel that dominates a slot solve, serial
// against the OpenMP batch, and checks the two paths agree bitwise.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "uavd2d/rng.hpp"
#include "uavd2d/rus.hpp"

using namespace uavd2d;

namespace {

double time_batch(const Scenario& s, const std::vector<std::vector<Vec3>>& batch,
                  const std::vector<Vec3>& prev, const std::vector<double>& stored,
                  const SolveBudget& budget, bool parallel, std::vector<double>& obj) {
    obj.assign(batch.size(), 0.0);
    const auto start = std::chrono::steady_clock::now();
    const int n = static_cast<int>(batch.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            const CandidateEvaluation e =
                evaluate_candidate(s, batch[i], prev, stored, 1, budget);
            obj[i] = e.feasible ? e.objective : -1.0;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const CandidateEvaluation e =
                evaluate_candidate(s, batch[i], prev, stored, 1, budget);
            obj[i] = e.feasible ? e.objective : -1.0;
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    int batch_size = 96;
    if (argc > 1) batch_size = std::atoi(argv[1]);

    const Scenario s = synthesize_random_scenario(10, 10, 5, 7);
    const int num_uavs = static_cast<int>(s.uavs.size());
    std::vector<Vec3> prev(num_uavs);
    std::vector<double> stored(num_uavs);
    for (int l = 0; l < num_uavs; ++l) {
        prev[l] = s.uavs[l].initial_position;
        stored[l] = s.uavs[l].initial_battery_j;
    }

    RngStream rng = derive_stream(7, "bench");
    std::vector<std::vector<Vec3>> batch;
    batch.reserve(batch_size);
    while (static_cast<int>(batch.size()) < batch_size) {
        std::vector<Vec3> pos(num_uavs);
        for (int l = 0; l < num_uavs; ++l) {
            const double r = s.uavs[l].max_speed_m_s * s.time.slot_duration_tau;
            pos[l] = sample_sphere(prev[l], r * rng.next_double(), 1, rng,
                                   s.region.uav_z_min)[1];
            if (pos[l].z > s.region.uav_z_max) pos[l].z = s.region.uav_z_max;
        }
        batch.push_back(std::move(pos));
    }

    const SolveBudget budget = scan_budget();
    std::vector<double> serial_obj, parallel_obj;
    const double warm = time_batch(s, batch, prev, stored, budget, false, serial_obj);
    const double t_serial = time_batch(s, batch, prev, stored, budget, false, serial_obj);
    const double t_parallel = time_batch(s, batch, prev, stored, budget, true, parallel_obj);

    int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
#pragma omp single
    threads = omp_get_num_threads();
#endif

    bool identical = serial_obj.size() == parallel_obj.size();
    for (std::size_t i = 0; identical && i < serial_obj.size(); ++i)
        identical = serial_obj[i] == parallel_obj[i];

    std::printf("candidates: %d (warmup %.3fs)\n", batch_size, warm);
    std::printf("serial:   %8.3f s  (%7.1f cand/s)\n", t_serial, batch_size / t_serial);
    std::printf("parallel: %8.3f s  (%7.1f cand/s, %d threads)\n", t_parallel,
                batch_size / t_parallel, threads);
    std::printf("speedup:  %.2fx, results %s\n", t_serial / t_parallel,
                identical ? "identical" : "DIFFER");
    return identical ? 0 : 1;
}
