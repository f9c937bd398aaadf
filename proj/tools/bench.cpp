// Times the Monte Carlo harness in serial and OpenMP-parallel mode on the
// same experiment and checks that both produce identical records.

#include <chrono>
#include <cstdio>
#include <cstring>

#include <omp.h>

#include "mimo/harness.hpp"

using namespace mimo;

namespace {

ExperimentSpec make_spec(int trials) {
    ExperimentSpec spec;
    spec.num_users = 32;
    spec.num_antennas = 128;
    spec.constellation = Constellation::qpsk();
    spec.bank = AdcBank::uniform(spec.num_antennas, AdcSpec::uniform(3, 0.5));
    spec.detector = DetectorKind::DQ;
    spec.trials = trials;
    spec.base_seed = 7;
    spec.snr_grid_db = {0.0, 5.0};
    return spec;
}

double time_run(const ExperimentSpec& spec, RunMode mode, ExperimentResult& out) {
    const auto start = std::chrono::steady_clock::now();
    out = run_monte_carlo(spec, mode);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool identical(const ExperimentResult& a, const ExperimentResult& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        if (std::memcmp(&a.records[i], &b.records[i], sizeof(SnrRecord)) != 0) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const int trials = argc > 1 ? std::atoi(argv[1]) : 100;
    const ExperimentSpec spec = make_spec(trials);

    ExperimentResult serial, parallel;
    const double t_serial = time_run(spec, RunMode::Serial, serial);
    const double t_parallel = time_run(spec, RunMode::Parallel, parallel);

    std::printf("experiment: K=%d N=%d trials=%d snr_points=%zu threads=%d\n", spec.num_users,
                spec.num_antennas, spec.trials, spec.snr_grid_db.size(), omp_get_max_threads());
    std::printf("serial:   %8.3f s\n", t_serial);
    std::printf("parallel: %8.3f s  (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);
    if (!identical(serial, parallel)) {
        std::printf("MISMATCH: serial and parallel results differ\n");
        return 1;
    }
    std::printf("results identical\n");
    return 0;
}
