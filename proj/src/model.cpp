#include "mimo/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mimo {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

SystemConfig::SystemConfig(int users, int antennas, double noise_var, Constellation constel)
    : num_users(users),
      num_antennas(antennas),
      noise_variance(noise_var),
      constellation(std::move(constel)) {
    if (num_users < 1 || num_antennas < 1) {
        throw std::invalid_argument("SystemConfig: dimensions must be >= 1");
    }
    if (noise_variance < 0.0) {
        throw std::invalid_argument("SystemConfig: noise variance must be >= 0");
    }
}

double SystemConfig::snr_db() const {
    return -10.0 * std::log10(noise_variance);
}

double SystemConfig::noise_variance_from_snr_db(double snr_db) {
    return std::pow(10.0, -snr_db / 10.0);
}

ChannelRealization sample_channel(const SystemConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    const double scale = kInvSqrt2 / std::sqrt(static_cast<double>(config.num_users));
    MatrixC h(config.num_antennas, config.num_users);
    for (int i = 0; i < config.num_antennas; ++i) {
        for (int j = 0; j < config.num_users; ++j) {
            h(i, j) = cplx(rng.next_gaussian() * scale, rng.next_gaussian() * scale);
        }
    }
    return {std::move(h)};
}

VectorC sample_symbols(const Constellation& constellation, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_symbols: count must be >= 1");
    Rng rng(seed);
    VectorC x(count);
    for (int j = 0; j < count; ++j) x(j) = constellation.sample(rng);
    return x;
}

VectorC received_signal(const ChannelRealization& channel, const VectorC& symbols,
                        double noise_variance, std::uint64_t seed) {
    if (channel.matrix.cols() != symbols.size()) {
        throw std::invalid_argument("received_signal: dimension mismatch");
    }
    if (noise_variance < 0.0) {
        throw std::invalid_argument("received_signal: noise variance must be >= 0");
    }
    VectorC y = channel.matrix * symbols;
    if (noise_variance > 0.0) {
        Rng rng(seed);
        const double sd = std::sqrt(noise_variance) * kInvSqrt2;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            y(i) += cplx(rng.next_gaussian() * sd, rng.next_gaussian() * sd);
        }
    }
    return y;
}

}  // namespace mimo
