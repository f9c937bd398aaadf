#pragma once

#include <utility>
#include <vector>

#include "mimo/model.hpp"
#include "mimo/quantizer.hpp"

namespace mimo {

enum class OutputKind { DQ, PDQ };

// Measurement likelihood used in the GAMP output step. DQ keeps the exact
// quantization-cell likelihood; PDQ replaces it by additive Gaussian noise
// of per-antenna effective variance gamma_i = sigma_q,i^2 + sigma_n^2.
struct OutputChannel {
    OutputKind kind;
    double noise_variance = 0.0;       // sigma_n^2 (DQ)
    std::vector<AdcSpec> specs;        // DQ: one per antenna
    std::vector<double> gammas;        // PDQ: one per antenna

    static OutputChannel dq(const AdcBank& bank, double noise_variance);
    static OutputChannel pdq(std::vector<double> gammas);
    // gamma_i = noise_variance + pdq_sigma_q2(step_i, noise_variance) for
    // finite ADCs, noise_variance alone for full-precision antennas.
    static OutputChannel pdq_from_bank(const AdcBank& bank, double noise_variance);

    int size() const {
        return static_cast<int>(kind == OutputKind::DQ ? specs.size() : gammas.size());
    }
};

struct InputDenoiser {
    enum class Kind { Discrete, Gaussian };
    Kind kind;
    Constellation constellation;  // Discrete only

    static InputDenoiser discrete(Constellation c) {
        return {Kind::Discrete, std::move(c)};
    }
    static InputDenoiser gaussian() { return {Kind::Gaussian, Constellation::gaussian()}; }
};

struct GampConfig {
    int max_iterations = 20;
    double variance_floor = 1e-12;
    double damping = 0.0;        // 0 = plain iteration
    double convergence_tol = 0.0;  // 0 = run all iterations
    bool record_iterates = false;
};

struct GampIterationSummary {
    int iteration;
    double delta;      // ||x^t - x^{t-1}||^2 / K
    double mean_vx;
    double mean_vs;
    int clamped;       // variances clipped to the floor this iteration
};

struct GampResult {
    VectorC estimate;
    VectorR variance;
    std::vector<GampIterationSummary> trace;
    std::vector<VectorC> iterates;  // filled when record_iterates is set
    int iterations = 0;
    bool converged = false;
};

// Additive-quantization-noise variance of a uniform step. The step^2/12 rule
// is applied to the normalized step sqrt(2) * step / sqrt(1 + sigma_n^2),
// i.e. the step measured against the unit-variance quantizer input.
double pdq_sigma_q2(double step, double noise_variance);

// Output-step scores (g, g') for one antenna.
std::pair<cplx, double> dq_nonlinearity(cplx r, cplx p, double v_p, const AdcSpec& spec,
                                        double noise_variance);
std::pair<cplx, double> pdq_nonlinearity(cplx r, cplx p, double v_p, double gamma);

// Posterior mean and variance of the input under a scalar CN(s; x, v_s)
// observation.
std::pair<cplx, double> discrete_denoiser(cplx s, double v_s, const Constellation& c);
std::pair<cplx, double> gaussian_denoiser(cplx s, double v_s);

GampResult gamp_run(const ChannelRealization& channel, const VectorC& r,
                    const OutputChannel& output, const InputDenoiser& denoiser,
                    const GampConfig& config);

// (H*H + gamma I)^{-1} H* r; gamma = 0 requires full column rank.
VectorC linear_mmse_direct(const ChannelRealization& channel, const VectorC& r, double gamma);

VectorC hard_decision(const VectorC& estimate, const Constellation& c);

}  // namespace mimo
