#include "mimo/state_evolution.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mimo/trunc_normal.hpp"

namespace mimo {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double effective_sigma2(double noise_variance, const SeMoments& m) {
    const double sigma2 = noise_variance + m.mismatch_gap;
    if (!(sigma2 > 0.0)) {
        throw std::runtime_error("state evolution: nonpositive effective variance " +
                                 std::to_string(sigma2));
    }
    return sigma2;
}

double postulated_variance(const SeOutput& output, const AdcSpec& spec,
                           double noise_variance, const SeMoments& m) {
    const double gamma =
        output.kind == OutputKind::DQ ? noise_variance : se_gamma(output, spec, noise_variance);
    const double total = gamma + std::max(m.posterior_var, 0.0);
    if (!(total > 0.0)) {
        throw std::runtime_error("state evolution: degenerate score denominator");
    }
    return total;
}

// The output-step integrand develops features of width ~sqrt(sigma_n^2) in
// the quadrature variable as the recursion sharpens, so low-noise runs need
// proportionally more nodes to resolve them.
int effective_nodes(const SeConfig& cfg, double noise_variance) {
    const int from_noise =
        noise_variance > 0.0 ? static_cast<int>(std::ceil(4.0 / noise_variance)) : 800;
    return std::clamp(from_noise, cfg.gauss_hermite_nodes, 800);
}

}  // namespace

double se_gamma(const SeOutput& output, const AdcSpec& spec, double noise_variance) {
    if (spec.is_infinite()) return noise_variance;
    const double sigma_q2 = output.sigma_q2_override ? *output.sigma_q2_override
                                                     : pdq_sigma_q2(spec.step, noise_variance);
    return noise_variance + sigma_q2;
}

double psi_eval(double level, double vartheta, const AdcSpec& spec, double noise_variance,
                const SeMoments& moments) {
    const QuantInterval cell = interval_of(level, spec);
    const double sigma2 = effective_sigma2(noise_variance, moments);
    const double lo = (cell.low == -kInf) ? -kInf : kSqrt2 * cell.low;
    const double hi = (cell.high == kInf) ? kInf : kSqrt2 * cell.high;
    return normal_cell_prob(vartheta, sigma2, lo, hi);
}

double psi_deriv(double level, double vartheta, const AdcSpec& spec, double noise_variance,
                 const SeMoments& moments) {
    const QuantInterval cell = interval_of(level, spec);
    const double sigma = std::sqrt(effective_sigma2(noise_variance, moments));
    double out = 0.0;
    if (cell.low != -kInf) out += normal_pdf((kSqrt2 * cell.low - vartheta) / sigma);
    if (cell.high != kInf) out -= normal_pdf((kSqrt2 * cell.high - vartheta) / sigma);
    return out / sigma;
}

ThetaValue theta_eval(double level, double vartheta, const SeOutput& output,
                      const AdcSpec& spec, double noise_variance, const SeMoments& moments) {
    const double total = postulated_variance(output, spec, noise_variance, moments);
    if (output.kind == OutputKind::PDQ || spec.is_infinite()) {
        return {(kSqrt2 * level - vartheta) / total, 1.0 / total};
    }
    // DQ: truncated-Gaussian score per real dimension, expressed in the
    // complex-moment units of the recursion.
    const QuantInterval cell = interval_of(level, spec);
    const TruncatedMoments tm =
        trunc_normal_moments(vartheta / kSqrt2, 0.5 * total, cell.low, cell.high);
    const double theta = kSqrt2 * (tm.mean - vartheta / kSqrt2) / total;
    const double deriv = (1.0 - tm.var / (0.5 * total)) / total;
    return {theta, deriv};
}

namespace {

struct OutputSums {
    double a = 0.0;
    double d = 0.0;
    double e = 0.0;
};

// Contribution of one finite-resolution ADC population, integrating the
// Psi/Theta products over the Gaussian measure.
void accumulate_quantized(OutputSums& sums, const ProfileEntry& entry, double noise_variance,
                          const SeOutput& output, const SeMoments& m,
                          const GaussHermiteRule& rule) {
    const double sigma = std::sqrt(effective_sigma2(noise_variance, m));
    const double total = postulated_variance(output, entry.spec, noise_variance, m);
    const double psi_scale = (m.v_xhat > 0.0) ? m.v_xxhat / std::sqrt(m.v_xhat) : 0.0;
    const double theta_scale = (m.v_xhat > 0.0) ? std::sqrt(m.v_xhat) : 0.0;

    const int num_levels = entry.spec.num_levels();
    const std::vector<double> levels = entry.spec.levels();
    const bool prune = entry.spec.bits > 8;

    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double u = rule.nodes[q];
        const double w = rule.weights[q];
        const double psi_mean = psi_scale * u;
        const double theta_arg = theta_scale * u;

        // Cell probabilities share their boundary cdf values.
        double cdf_prev = 0.0;
        double pdf_prev = 0.0;
        for (int idx = 0; idx < num_levels; ++idx) {
            const double level = levels[idx];
            const double upper = level + 0.5 * entry.spec.step;
            double cdf_up = 1.0, pdf_up = 0.0;
            if (idx + 1 < num_levels) {
                const double t = (kSqrt2 * upper - psi_mean) / sigma;
                cdf_up = normal_cdf(t);
                pdf_up = normal_pdf(t);
            }
            const double psi = cdf_up - cdf_prev;
            const double psi_d = (pdf_prev - pdf_up) / sigma;
            cdf_prev = cdf_up;
            pdf_prev = pdf_up;
            if (prune && psi < 1e-14) continue;

            ThetaValue theta;
            if (output.kind == OutputKind::PDQ) {
                theta = ThetaValue{(kSqrt2 * level - theta_arg) / total, 1.0 / total};
            } else {
                const QuantInterval cell = interval_of(level, entry.spec);
                const TruncatedMoments tm = trunc_normal_moments(
                    theta_arg / kSqrt2, 0.5 * total, cell.low, cell.high);
                theta.value = kSqrt2 * (tm.mean - theta_arg / kSqrt2) / total;
                theta.deriv = (1.0 - tm.var / (0.5 * total)) / total;
            }

            sums.a += entry.lambda * w * psi * theta.value * theta.value;
            sums.d += entry.lambda * w * psi_d * theta.value;
            sums.e += entry.lambda * w * psi * theta.deriv;
        }
    }
}

// Full-precision antennas observe the unquantized signal; their SE
// contribution is available in closed form.
void accumulate_full_precision(OutputSums& sums, const ProfileEntry& entry,
                               double noise_variance, const SeMoments& m) {
    const double mse = m.v_x - 2.0 * m.v_xxhat + m.v_xhat;
    const double denom = noise_variance + std::max(m.posterior_var, 0.0);
    sums.a += entry.lambda * (noise_variance + mse) / (denom * denom);
    sums.d += entry.lambda / denom;
    sums.e += entry.lambda / denom;
}

SeMoments update_moments(const SeParams& p, const InputDenoiser& denoiser,
                         const GaussHermiteRule& rule) {
    SeMoments m;
    m.v_x = 1.0;
    if (denoiser.kind == InputDenoiser::Kind::Gaussian) {
        const double shrink = 1.0 + p.e;
        m.v_xxhat = p.d / shrink;
        m.v_xhat = (p.a + p.d * p.d) / (shrink * shrink);
        m.posterior_var = 1.0 / shrink;
        m.c_xhat = m.v_xhat + m.posterior_var;
        const double power = p.a + p.d * p.d;
        m.mismatch_gap = power > 0.0 ? p.a / power : 1.0;
        return m;
    }
    if (denoiser.constellation.kind() != ConstellationKind::Qpsk) {
        throw std::invalid_argument(
            "state evolution: discrete inputs are supported for QPSK only");
    }
    const double sqrt_a = std::sqrt(std::max(p.a, 0.0));
    double first = 0.0, second = 0.0, comp = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double arg = sqrt_a * rule.nodes[q] + p.d;
        const double t = std::tanh(arg);
        const double s = 1.0 / std::cosh(arg);
        first += rule.weights[q] * t;
        second += rule.weights[q] * t * t;
        comp += rule.weights[q] * s * s;  // E[sech^2] = 1 - E[tanh^2], no cancellation
    }
    double spread = 0.0;  // Var[tanh], again formed without cancellation
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = std::tanh(sqrt_a * rule.nodes[q] + p.d);
        spread += rule.weights[q] * (t - first) * (t - first);
    }
    m.c_xhat = 1.0;
    m.v_xxhat = first;
    m.v_xhat = second;
    m.posterior_var = std::max(comp, 0.0);
    m.mismatch_gap = second > 0.0 ? std::max(spread, 0.0) / second : 1.0;
    return m;
}

}  // namespace

SeStepResult se_step_generic(const SeMoments& moments, const MixedProfile& profile,
                             double noise_variance, const SeOutput& output,
                             const InputDenoiser& denoiser, const SeConfig& cfg) {
    if (profile.entries.empty()) {
        throw std::invalid_argument("se_step_generic: empty profile");
    }
    const GaussHermiteRule& rule = cached_gauss_hermite(effective_nodes(cfg, noise_variance));
    OutputSums sums;
    for (const ProfileEntry& entry : profile.entries) {
        if (entry.lambda < 0.0) {
            throw std::invalid_argument("se_step_generic: negative lambda");
        }
        if (entry.lambda == 0.0) continue;
        if (entry.spec.is_infinite()) {
            accumulate_full_precision(sums, entry, noise_variance, moments);
        } else {
            accumulate_quantized(sums, entry, noise_variance, output, moments, rule);
        }
    }
    if (!std::isfinite(sums.a) || !std::isfinite(sums.d) || !std::isfinite(sums.e)) {
        throw std::runtime_error("se_step_generic: non-finite output-step sums");
    }
    SeStepResult result;
    result.params = {sums.a, sums.d, sums.e};
    result.moments = update_moments(result.params, denoiser, rule);
    return result;
}

SeFixedPoint se_fixed_point(const MixedProfile& profile, double noise_variance,
                            const SeOutput& output, const InputDenoiser& denoiser,
                            const SeConfig& cfg, bool record_trajectory) {
    SeFixedPoint fp;
    SeMoments moments;  // v_xhat = v_xxhat = 0, c_xhat = v_x: mirrors x^0 = 0
    SeParams prev{};
    double prev_delta = 0.0;
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        SeStepResult step = se_step_generic(moments, profile, noise_variance, output,
                                            denoiser, cfg);
        const double delta = step.params.a - prev.a;
        if (t > 2 && delta * prev_delta < 0.0) {
            // Oscillation guard: relax the parameter update and keep the
            // moments consistent with the damped parameters.
            step.params.a = 0.5 * (step.params.a + prev.a);
            step.params.d = 0.5 * (step.params.d + prev.d);
            step.params.e = 0.5 * (step.params.e + prev.e);
            step.moments = update_moments(
                step.params, denoiser,
                cached_gauss_hermite(effective_nodes(cfg, noise_variance)));
        }
        moments = step.moments;
        fp.iterations = t;
        if (record_trajectory) fp.trajectory.push_back(step);

        const double scale = std::max({1.0, std::abs(step.params.a), std::abs(step.params.e)});
        const double change = std::max({std::abs(step.params.a - prev.a),
                                        std::abs(step.params.d - prev.d),
                                        std::abs(step.params.e - prev.e)});
        prev_delta = delta;
        prev = step.params;
        fp.params = step.params;
        fp.moments = step.moments;
        if (t > 1 && change < cfg.fixed_point_tol * scale) {
            fp.converged = true;
            break;
        }
    }
    return fp;
}

double ber_qpsk(const SeParams& params) {
    if (params.a < 0.0) throw std::invalid_argument("ber_qpsk: A must be >= 0");
    if (params.a == 0.0) {
        if (params.d > 0.0) return 0.0;
        throw std::invalid_argument("ber_qpsk: degenerate parameters (A = 0, D <= 0)");
    }
    return normal_tail(params.d / std::sqrt(params.a));
}

double mse_from_se(const SeMoments& moments) {
    const double mse = moments.v_x - 2.0 * moments.v_xxhat + moments.v_xhat;
    if (mse < -1e-12) {
        throw std::runtime_error("mse_from_se: inconsistent moments (mse = " +
                                 std::to_string(mse) + ")");
    }
    return std::max(mse, 0.0);
}

}  // namespace mimo
