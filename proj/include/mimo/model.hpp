#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mimo/constellation.hpp"

namespace mimo {

using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using VectorR = Eigen::VectorXd;
using MatrixR = Eigen::MatrixXd;

// Uplink dimensions and noise level. SNR = 1/noise_variance.
struct SystemConfig {
    int num_users;        // K
    int num_antennas;     // N
    double noise_variance;  // sigma_n^2 per complex dimension
    Constellation constellation;

    SystemConfig(int users, int antennas, double noise_var, Constellation constel);

    double snr_db() const;
    static double noise_variance_from_snr_db(double snr_db);
};

// H = H_raw / sqrt(K), entries of H_raw i.i.d. CN(0, 1), so each coefficient
// of H has variance 1/K.
struct ChannelRealization {
    MatrixC matrix;  // N x K
};

ChannelRealization sample_channel(const SystemConfig& config, std::uint64_t seed);

VectorC sample_symbols(const Constellation& constellation, int count, std::uint64_t seed);

// y = H x + n with n i.i.d. CN(0, noise_variance).
VectorC received_signal(const ChannelRealization& channel, const VectorC& symbols,
                        double noise_variance, std::uint64_t seed);

}  // namespace mimo
