#include "mimo/gamp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mimo/trunc_normal.hpp"

namespace mimo {

OutputChannel OutputChannel::dq(const AdcBank& bank, double noise_variance) {
    if (noise_variance < 0.0) throw std::invalid_argument("OutputChannel: negative noise");
    OutputChannel ch;
    ch.kind = OutputKind::DQ;
    ch.noise_variance = noise_variance;
    ch.specs = bank.assignment;
    return ch;
}

OutputChannel OutputChannel::pdq(std::vector<double> gammas) {
    for (double g : gammas) {
        if (!(g > 0.0)) throw std::invalid_argument("OutputChannel: gamma must be > 0");
    }
    OutputChannel ch;
    ch.kind = OutputKind::PDQ;
    ch.gammas = std::move(gammas);
    return ch;
}

OutputChannel OutputChannel::pdq_from_bank(const AdcBank& bank, double noise_variance) {
    std::vector<double> gammas;
    gammas.reserve(bank.assignment.size());
    for (const AdcSpec& spec : bank.assignment) {
        const double sigma_q2 =
            spec.is_infinite() ? 0.0 : pdq_sigma_q2(spec.step, noise_variance);
        gammas.push_back(noise_variance + sigma_q2);
    }
    return pdq(std::move(gammas));
}

double pdq_sigma_q2(double step, double noise_variance) {
    const double normalized2 = 2.0 * step * step / (1.0 + noise_variance);
    return normalized2 / 12.0;
}

std::pair<cplx, double> dq_nonlinearity(cplx r, cplx p, double v_p, const AdcSpec& spec,
                                        double noise_variance) {
    if (!(v_p > 0.0)) throw std::invalid_argument("dq_nonlinearity: v_p must be > 0");
    const double total = v_p + noise_variance;
    if (spec.is_infinite()) {
        return {(r - p) / total, 1.0 / total};
    }
    const QuantInterval cell_re = interval_of(r.real(), spec);
    const QuantInterval cell_im = interval_of(r.imag(), spec);
    // The likelihood factorizes over real/imaginary parts with half the
    // total variance in each dimension.
    const TruncatedMoments mre =
        trunc_normal_moments(p.real(), 0.5 * total, cell_re.low, cell_re.high);
    const TruncatedMoments mim =
        trunc_normal_moments(p.imag(), 0.5 * total, cell_im.low, cell_im.high);
    const cplx posterior_mean(mre.mean, mim.mean);
    const double posterior_var = mre.var + mim.var;
    const cplx g = (posterior_mean - p) / total;
    const double gprime = (1.0 - posterior_var / total) / total;
    return {g, gprime};
}

std::pair<cplx, double> pdq_nonlinearity(cplx r, cplx p, double v_p, double gamma) {
    if (!(v_p > 0.0) || !(gamma > 0.0)) {
        throw std::invalid_argument("pdq_nonlinearity: v_p and gamma must be > 0");
    }
    const double total = v_p + gamma;
    return {(r - p) / total, 1.0 / total};
}

std::pair<cplx, double> discrete_denoiser(cplx s, double v_s, const Constellation& c) {
    if (!(v_s > 0.0)) throw std::invalid_argument("discrete_denoiser: v_s must be > 0");
    const auto& points = c.points();
    const auto& probs = c.probabilities();
    double max_logw = -kInf;
    std::vector<double> logw(points.size());
    for (std::size_t m = 0; m < points.size(); ++m) {
        logw[m] = std::log(probs[m]) - std::norm(s - points[m]) / v_s;
        max_logw = std::max(max_logw, logw[m]);
    }
    double wsum = 0.0, second = 0.0;
    cplx mean(0.0, 0.0);
    for (std::size_t m = 0; m < points.size(); ++m) {
        const double w = std::exp(logw[m] - max_logw);
        wsum += w;
        mean += w * points[m];
        second += w * std::norm(points[m]);
    }
    mean /= wsum;
    second /= wsum;
    return {mean, std::max(second - std::norm(mean), 0.0)};
}

std::pair<cplx, double> gaussian_denoiser(cplx s, double v_s) {
    if (!(v_s > 0.0)) throw std::invalid_argument("gaussian_denoiser: v_s must be > 0");
    return {s / (1.0 + v_s), v_s / (1.0 + v_s)};
}

namespace {

std::pair<cplx, double> output_score(const OutputChannel& output, int antenna, cplx r, cplx p,
                                     double v_p) {
    if (output.kind == OutputKind::DQ) {
        return dq_nonlinearity(r, p, v_p, output.specs[antenna], output.noise_variance);
    }
    return pdq_nonlinearity(r, p, v_p, output.gammas[antenna]);
}

std::pair<cplx, double> denoise(const InputDenoiser& denoiser, cplx s, double v_s) {
    if (denoiser.kind == InputDenoiser::Kind::Gaussian) return gaussian_denoiser(s, v_s);
    return discrete_denoiser(s, v_s, denoiser.constellation);
}

[[noreturn]] void fail(int iteration, const char* line) {
    throw std::runtime_error("gamp_run: non-finite value at iteration " +
                             std::to_string(iteration) + ", " + line);
}

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

}  // namespace

GampResult gamp_run(const ChannelRealization& channel, const VectorC& r,
                    const OutputChannel& output, const InputDenoiser& denoiser,
                    const GampConfig& config) {
    const MatrixC& h = channel.matrix;
    const int n = static_cast<int>(h.rows());
    const int k = static_cast<int>(h.cols());
    if (r.size() != n || output.size() != n) {
        throw std::invalid_argument("gamp_run: dimension mismatch");
    }
    if (config.max_iterations < 1) {
        throw std::invalid_argument("gamp_run: max_iterations must be >= 1");
    }
    const double floor = config.variance_floor;
    if (!(floor > 0.0)) throw std::invalid_argument("gamp_run: variance floor must be > 0");

    const MatrixR abs_h2 = h.cwiseAbs2();
    const MatrixR abs_h2_t = abs_h2.transpose();
    const MatrixC h_adj = h.adjoint();

    VectorC x = VectorC::Zero(k);
    VectorR v_x = VectorR::Ones(k);
    VectorC p = VectorC::Zero(n);
    VectorC z(n);
    VectorR v_z(n);
    VectorC s(k);
    VectorR v_s(k);

    GampResult result;
    result.trace.reserve(config.max_iterations);

    for (int t = 1; t <= config.max_iterations; ++t) {
        int clamped = 0;
        VectorR v_p = abs_h2 * v_x;
        for (int i = 0; i < n; ++i) {
            if (v_p(i) < floor) {
                v_p(i) = floor;
                ++clamped;
            }
        }
        // Onsager-corrected prediction; the score is taken at the previous p
        // with the current variance.
        VectorC p_new = h * x;
        for (int i = 0; i < n; ++i) {
            p_new(i) -= v_p(i) * output_score(output, i, r(i), p(i), v_p(i)).first;
        }
        if (config.damping > 0.0 && t > 1) {
            p_new = (1.0 - config.damping) * p_new + config.damping * p;
        }
        p = std::move(p_new);
        for (int i = 0; i < n; ++i) {
            if (!finite(p(i))) fail(t, "line 2 (p update)");
            const auto [g, gp] = output_score(output, i, r(i), p(i), v_p(i));
            z(i) = g;
            v_z(i) = gp;
            if (!finite(z(i)) || !std::isfinite(v_z(i))) fail(t, "lines 3-4 (output score)");
        }

        const VectorR denom = abs_h2_t * v_z;
        for (int j = 0; j < k; ++j) {
            if (!(denom(j) > 0.0) || 1.0 / denom(j) < floor) {
                v_s(j) = (denom(j) > 0.0) ? floor : 1.0 / floor;
                ++clamped;
            } else {
                v_s(j) = 1.0 / denom(j);
            }
        }
        s = x + (v_s.array() * (h_adj * z).array()).matrix();

        const VectorC x_prev = x;
        for (int j = 0; j < k; ++j) {
            if (!finite(s(j))) fail(t, "line 6 (s update)");
            auto [mean, var] = denoise(denoiser, s(j), v_s(j));
            if (!finite(mean) || !std::isfinite(var)) fail(t, "lines 7-8 (denoiser)");
            x(j) = mean;
            if (var < floor) {
                var = floor;
                ++clamped;
            }
            v_x(j) = var;
        }
        if (config.damping > 0.0 && t > 1) {
            x = (1.0 - config.damping) * x + config.damping * x_prev;
        }

        const double delta = (x - x_prev).squaredNorm() / k;
        result.trace.push_back({t, delta, v_x.mean(), v_s.mean(), clamped});
        if (config.record_iterates) result.iterates.push_back(x);
        result.iterations = t;
        if (config.convergence_tol > 0.0 && delta < config.convergence_tol) {
            result.converged = true;
            break;
        }
    }

    result.estimate = std::move(x);
    result.variance = std::move(v_x);
    return result;
}

VectorC linear_mmse_direct(const ChannelRealization& channel, const VectorC& r, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("linear_mmse_direct: gamma must be >= 0");
    const MatrixC& h = channel.matrix;
    if (r.size() != h.rows()) throw std::invalid_argument("linear_mmse_direct: size mismatch");
    MatrixC gram = h.adjoint() * h;
    gram.diagonal().array() += gamma;
    if (gamma == 0.0) {
        Eigen::FullPivLU<MatrixC> lu(gram);
        if (!lu.isInvertible()) {
            throw std::runtime_error("linear_mmse_direct: singular system at gamma = 0");
        }
        return lu.solve(h.adjoint() * r);
    }
    return gram.ldlt().solve(h.adjoint() * r);
}

VectorC hard_decision(const VectorC& estimate, const Constellation& c) {
    VectorC out(estimate.size());
    for (Eigen::Index j = 0; j < estimate.size(); ++j) {
        out(j) = c.hard_decision(estimate(j));
    }
    return out;
}

}  // namespace mimo
