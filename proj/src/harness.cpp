#include "mimo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mimo {

namespace {

void validate(const ExperimentSpec& spec) {
    if (spec.num_users < 1 || spec.num_antennas < 1) {
        throw std::invalid_argument("run_monte_carlo: dimensions must be positive");
    }
    if (spec.trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
    if (spec.bank.size() != spec.num_antennas) {
        throw std::invalid_argument("run_monte_carlo: bank length must equal N");
    }
    if (spec.snr_grid_db.empty()) {
        throw std::invalid_argument("run_monte_carlo: empty SNR grid");
    }
}

struct TrialOutcome {
    bool ok = false;
    long long bit_errors = 0;
    long long bits = 0;
    double mse = 0.0;
    // Per-iteration squared error, filled when iterates are recorded.
    std::vector<double> mse_by_iteration;
};

long long count_bit_errors(const VectorC& truth, const VectorC& decided) {
    long long errors = 0;
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
        if ((truth(j).real() > 0.0) != (decided(j).real() > 0.0)) ++errors;
        if ((truth(j).imag() > 0.0) != (decided(j).imag() > 0.0)) ++errors;
    }
    return errors;
}

TrialOutcome run_trial(const ExperimentSpec& spec, double noise_variance, int snr_index,
                       int trial, const InputDenoiser& denoiser) {
    const SystemConfig system(spec.num_users, spec.num_antennas, noise_variance,
                              spec.constellation);
    const std::uint64_t channel_seed = derive_seed(spec.base_seed, snr_index, trial, 0);
    const std::uint64_t symbol_seed = derive_seed(spec.base_seed, snr_index, trial, 1);
    const std::uint64_t noise_seed = derive_seed(spec.base_seed, snr_index, trial, 2);

    const ChannelRealization channel = sample_channel(system, channel_seed);
    const VectorC symbols = sample_symbols(spec.constellation, spec.num_users, symbol_seed);
    const VectorC y = received_signal(channel, symbols, noise_variance, noise_seed);
    const VectorC r = quantize_vector(y, spec.bank);
    const OutputChannel output =
        experiment_output_channel(spec.detector, spec.bank, noise_variance);

    TrialOutcome out;
    GampResult result;
    try {
        result = gamp_run(channel, r, output, denoiser, spec.gamp);
    } catch (const std::runtime_error&) {
        return out;  // detector failure: trial counted as nonconverged
    }
    if (spec.gamp.convergence_tol > 0.0 && !result.converged) return out;

    out.ok = true;
    out.mse = (result.estimate - symbols).squaredNorm() / spec.num_users;
    if (spec.constellation.is_discrete()) {
        const VectorC decided = hard_decision(result.estimate, spec.constellation);
        out.bit_errors = count_bit_errors(symbols, decided);
        out.bits = 2LL * spec.num_users;
    }
    if (spec.gamp.record_iterates) {
        out.mse_by_iteration.reserve(result.iterates.size());
        for (const VectorC& x : result.iterates) {
            out.mse_by_iteration.push_back((x - symbols).squaredNorm() / spec.num_users);
        }
    }
    return out;
}

SnrRecord reduce_trials(const ExperimentSpec& spec, double snr_db, double noise_variance,
                        const std::vector<TrialOutcome>& outcomes,
                        std::vector<double>* mse_trajectory) {
    SnrRecord rec;
    rec.snr_db = snr_db;
    rec.noise_variance = noise_variance;

    std::vector<double> trial_bers, trial_mses;
    trial_bers.reserve(outcomes.size());
    trial_mses.reserve(outcomes.size());
    std::vector<double> traj_sums;
    for (const TrialOutcome& out : outcomes) {
        if (!out.ok) {
            ++rec.nonconverged;
            continue;
        }
        ++rec.trials_run;
        rec.bit_errors += out.bit_errors;
        rec.bits_total += out.bits;
        if (out.bits > 0) {
            trial_bers.push_back(static_cast<double>(out.bit_errors) / out.bits);
        }
        trial_mses.push_back(out.mse);
        if (!out.mse_by_iteration.empty()) {
            if (traj_sums.size() < out.mse_by_iteration.size()) {
                traj_sums.resize(out.mse_by_iteration.size(), 0.0);
            }
            for (std::size_t i = 0; i < out.mse_by_iteration.size(); ++i) {
                traj_sums[i] += out.mse_by_iteration[i];
            }
        }
    }
    if (rec.trials_run == 0) return rec;

    const auto mean_and_stderr = [](const std::vector<double>& v, double& mean, double& se) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        se = v.size() > 1 ? std::sqrt(var / (static_cast<double>(v.size()) - 1.0) /
                                      static_cast<double>(v.size()))
                          : 0.0;
    };
    if (rec.bits_total > 0) {
        mean_and_stderr(trial_bers, rec.ber, rec.ber_stderr);
        rec.ber = static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits_total);
    }
    mean_and_stderr(trial_mses, rec.mse, rec.mse_stderr);
    if (mse_trajectory) {
        mse_trajectory->assign(traj_sums.begin(), traj_sums.end());
        for (double& x : *mse_trajectory) x /= rec.trials_run;
    }
    return rec;
}

ExperimentResult run_all(const ExperimentSpec& spec, RunMode mode,
                         std::vector<std::vector<double>>* trajectories) {
    validate(spec);
    const InputDenoiser denoiser = detector_denoiser(spec.detector, spec.constellation);
    const int num_snr = static_cast<int>(spec.snr_grid_db.size());

    ExperimentResult result;
    result.records.reserve(num_snr);
    if (trajectories) trajectories->resize(num_snr);

    for (int i = 0; i < num_snr; ++i) {
        const double snr_db = spec.snr_grid_db[i];
        const double noise_variance = SystemConfig::noise_variance_from_snr_db(snr_db);
        std::vector<TrialOutcome> outcomes(spec.trials);
        if (mode == RunMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
            for (int t = 0; t < spec.trials; ++t) {
                outcomes[t] = run_trial(spec, noise_variance, i, t, denoiser);
            }
        } else {
            for (int t = 0; t < spec.trials; ++t) {
                outcomes[t] = run_trial(spec, noise_variance, i, t, denoiser);
            }
        }
        std::vector<double>* traj = trajectories ? &(*trajectories)[i] : nullptr;
        result.records.push_back(reduce_trials(spec, snr_db, noise_variance, outcomes, traj));
    }
    return result;
}

}  // namespace

OutputChannel experiment_output_channel(DetectorKind detector, const AdcBank& bank,
                                        double noise_variance) {
    if (detector == DetectorKind::DQ) return OutputChannel::dq(bank, noise_variance);
    return OutputChannel::pdq_from_bank(bank, noise_variance);
}

MixedProfile profile_from_bank(const AdcBank& bank, int num_users) {
    if (num_users < 1) throw std::invalid_argument("profile_from_bank: K must be >= 1");
    std::map<std::pair<int, double>, int> counts;
    for (const AdcSpec& spec : bank.assignment) {
        ++counts[{spec.bits, spec.step}];
    }
    MixedProfile profile;
    for (const auto& [key, count] : counts) {
        profile.entries.push_back({AdcSpec{key.first, key.second},
                                   static_cast<double>(count) / num_users});
    }
    return profile;
}

ExperimentResult run_monte_carlo(const ExperimentSpec& spec, RunMode mode) {
    return run_all(spec, mode, nullptr);
}

SeMcComparison compare_se_vs_mc(const ExperimentSpec& spec, const SeConfig& cfg) {
    ExperimentSpec mc_spec = spec;
    mc_spec.gamp.record_iterates = true;

    std::vector<std::vector<double>> mc_trajectories;
    SeMcComparison cmp;
    cmp.mc = run_all(mc_spec, RunMode::Parallel, &mc_trajectories);

    const MixedProfile profile = profile_from_bank(spec.bank, spec.num_users);
    const SeOutput output = detector_output(spec.detector);
    const InputDenoiser denoiser = detector_denoiser(spec.detector, spec.constellation);
    const bool qpsk = spec.constellation.kind() == ConstellationKind::Qpsk;

    for (std::size_t i = 0; i < cmp.mc.records.size(); ++i) {
        const SnrRecord& rec = cmp.mc.records[i];
        SeConfig traj_cfg = cfg;
        traj_cfg.max_iterations = std::max(cfg.max_iterations, spec.gamp.max_iterations);
        const SeFixedPoint fp = se_fixed_point(profile, rec.noise_variance, output, denoiser,
                                               traj_cfg, /*record_trajectory=*/true);
        SeMcRow row;
        row.snr_db = rec.snr_db;
        row.mc_ber = rec.ber;
        row.mc_mse = rec.mse;
        row.se_ber = qpsk ? ber_qpsk(fp.params) : 0.0;
        row.se_mse = mse_from_se(fp.moments);
        cmp.rows.push_back(row);

        std::vector<TrajectoryPoint> traj;
        const std::size_t len =
            std::min(mc_trajectories[i].size(), fp.trajectory.size());
        traj.reserve(len);
        for (std::size_t t = 0; t < len; ++t) {
            traj.push_back({static_cast<int>(t) + 1, mse_from_se(fp.trajectory[t].moments),
                            mc_trajectories[i][t]});
        }
        cmp.trajectories.push_back(std::move(traj));
    }
    return cmp;
}

}  // namespace mimo
