#pragma once

#include <optional>
#include <vector>

#include "mimo/gamp.hpp"
#include "mimo/gauss_hermite.hpp"
#include "mimo/quantizer.hpp"

namespace mimo {

// Scalar parameters of the large-system equivalent channel
//   s = (D/E) x + (sqrt(A)/E) z,  z ~ CN(0, 1).
struct SeParams {
    double a = 0.0;
    double d = 0.0;
    double e = 0.0;
};

// Moments of the input and its scalar posterior estimate. v_xxhat is real
// for the QPSK and Gaussian inputs handled here. posterior_var (c_xhat -
// v_xhat) and mismatch_gap (v_x - v_xxhat^2 / v_xhat) are also tracked in
// forms that stay accurate when v_xhat approaches v_x and the differences
// underflow to cancellation noise.
struct SeMoments {
    double v_x = 1.0;
    double c_xhat = 1.0;
    double v_xhat = 0.0;
    double v_xxhat = 0.0;
    double posterior_var = 1.0;
    double mismatch_gap = 1.0;
};

struct SeConfig {
    int gauss_hermite_nodes = 40;
    int max_iterations = 200;
    double fixed_point_tol = 1e-10;
};

// One ADC population of the mixed architecture with its antenna fraction
// lambda_kappa = N_kappa / K.
struct ProfileEntry {
    AdcSpec spec;
    double lambda;
};

struct MixedProfile {
    std::vector<ProfileEntry> entries;

    double lambda() const {
        double sum = 0.0;
        for (const auto& entry : entries) sum += entry.lambda;
        return sum;
    }
};

// Postulated likelihood for the SE recursion. For PDQ the per-population
// effective variance is gamma = sigma_n^2 + sigma_q2(step, sigma_n^2) unless
// overridden (the override drives the regularization study).
struct SeOutput {
    OutputKind kind = OutputKind::DQ;
    std::optional<double> sigma_q2_override;

    static SeOutput dq() { return {OutputKind::DQ, std::nullopt}; }
    static SeOutput pdq() { return {OutputKind::PDQ, std::nullopt}; }
    static SeOutput pdq_with_sigma_q2(double sigma_q2) {
        return {OutputKind::PDQ, sigma_q2};
    }
};

double se_gamma(const SeOutput& output, const AdcSpec& spec, double noise_variance);

// Probability that the true channel emits level r when the conditioning
// variable of the SE integrand equals vartheta. Thresholds carry the sqrt(2)
// real-to-complex correction.
double psi_eval(double level, double vartheta, const AdcSpec& spec, double noise_variance,
                const SeMoments& moments);
double psi_deriv(double level, double vartheta, const AdcSpec& spec, double noise_variance,
                 const SeMoments& moments);

struct ThetaValue {
    double value;  // Theta(r | vartheta)
    double deriv;  // -d Theta / d vartheta
};

// Postulated-likelihood score of the SE output step. DQ uses the truncated
// Gaussian kernel; PDQ reduces to a linear residual.
ThetaValue theta_eval(double level, double vartheta, const SeOutput& output,
                      const AdcSpec& spec, double noise_variance, const SeMoments& moments);

struct SeStepResult {
    SeParams params;
    SeMoments moments;
};

SeStepResult se_step_generic(const SeMoments& moments, const MixedProfile& profile,
                             double noise_variance, const SeOutput& output,
                             const InputDenoiser& denoiser, const SeConfig& cfg);

struct SeFixedPoint {
    SeParams params;
    SeMoments moments;
    int iterations = 0;
    bool converged = false;
    std::vector<SeStepResult> trajectory;  // filled when requested
};

SeFixedPoint se_fixed_point(const MixedProfile& profile, double noise_variance,
                            const SeOutput& output, const InputDenoiser& denoiser,
                            const SeConfig& cfg, bool record_trajectory = false);

// Q(D / sqrt(A)) for a QPSK input.
double ber_qpsk(const SeParams& params);

// v_x - 2 Re{v_xxhat} + v_xhat.
double mse_from_se(const SeMoments& moments);

}  // namespace mimo
