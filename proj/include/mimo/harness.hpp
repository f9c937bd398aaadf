#pragma once

#include <cstdint>
#include <vector>

#include "mimo/tuning.hpp"

namespace mimo {

enum class RunMode { Parallel, Serial };

struct ExperimentSpec {
    int num_users = 0;
    int num_antennas = 0;
    Constellation constellation = Constellation::qpsk();
    AdcBank bank{std::vector<AdcSpec>{}};
    DetectorKind detector = DetectorKind::DQ;
    GampConfig gamp;
    int trials = 0;
    std::uint64_t base_seed = 0;
    std::vector<double> snr_grid_db;
};

struct SnrRecord {
    double snr_db = 0.0;
    double noise_variance = 0.0;
    double ber = 0.0;
    double ber_stderr = 0.0;
    double mse = 0.0;
    double mse_stderr = 0.0;
    long long bit_errors = 0;
    long long bits_total = 0;
    int trials_run = 0;
    int nonconverged = 0;
};

struct ExperimentResult {
    std::vector<SnrRecord> records;
};

// Builds the detector's measurement model for one antenna bank.
OutputChannel experiment_output_channel(DetectorKind detector, const AdcBank& bank,
                                        double noise_variance);

// Antenna populations of a bank as SE profile entries with lambda = N_kappa/K.
MixedProfile profile_from_bank(const AdcBank& bank, int num_users);

// Runs trials x SNR detections. Trial t of SNR index i draws its channel,
// symbols, and noise from seeds derived from (base_seed, i, t), so results
// are bit-identical for any worker count; the serial mode is the reference
// implementation the parallel path is tested against.
ExperimentResult run_monte_carlo(const ExperimentSpec& spec, RunMode mode = RunMode::Parallel);

struct SeMcRow {
    double snr_db = 0.0;
    double se_ber = 0.0;
    double mc_ber = 0.0;
    double se_mse = 0.0;
    double mc_mse = 0.0;
};

struct TrajectoryPoint {
    int iteration = 0;
    double se_mse = 0.0;
    double mc_mse = 0.0;
};

struct SeMcComparison {
    std::vector<SeMcRow> rows;
    // Per SNR point, the per-iteration MSE of the SE recursion and the
    // trial-averaged algorithm, aligned by iteration index.
    std::vector<std::vector<TrajectoryPoint>> trajectories;
    ExperimentResult mc;
};

SeMcComparison compare_se_vs_mc(const ExperimentSpec& spec, const SeConfig& cfg);

}  // namespace mimo
