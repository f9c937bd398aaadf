#include "mimo/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mimo {

InputDenoiser detector_denoiser(DetectorKind detector, const Constellation& constellation) {
    if (detector == DetectorKind::Linear) return InputDenoiser::gaussian();
    if (constellation.kind() == ConstellationKind::Gaussian) return InputDenoiser::gaussian();
    return InputDenoiser::discrete(constellation);
}

SeOutput detector_output(DetectorKind detector) {
    return detector == DetectorKind::DQ ? SeOutput::dq() : SeOutput::pdq();
}

double evaluate_se_metric(Metric metric, DetectorKind detector,
                          const Constellation& constellation, const MixedProfile& profile,
                          double noise_variance, const SeConfig& cfg,
                          std::optional<double> sigma_q2_override) {
    if (metric == Metric::BER && constellation.kind() != ConstellationKind::Qpsk) {
        throw std::invalid_argument("evaluate_se_metric: BER requires a QPSK constellation");
    }
    SeOutput output = detector_output(detector);
    if (sigma_q2_override) {
        if (detector == DetectorKind::DQ) {
            throw std::invalid_argument(
                "evaluate_se_metric: sigma_q2 override applies to PDQ-style outputs only");
        }
        output = SeOutput::pdq_with_sigma_q2(*sigma_q2_override);
    }
    const InputDenoiser denoiser = detector_denoiser(detector, constellation);
    const SeFixedPoint fp = se_fixed_point(profile, noise_variance, output, denoiser, cfg);
    return metric == Metric::BER ? ber_qpsk(fp.params) : mse_from_se(fp.moments);
}

double normalize_step(double delta, double noise_variance) {
    if (!(delta > 0.0)) throw std::invalid_argument("normalize_step: delta must be > 0");
    return std::numbers::sqrt2 * delta / std::sqrt(1.0 + noise_variance);
}

namespace {

double step_metric(const TuneObjective& objective, double delta, const SeConfig& cfg) {
    MixedProfile profile;
    profile.entries.push_back({AdcSpec::uniform(objective.bits, delta), objective.lambda});
    return evaluate_se_metric(objective.metric, objective.detector, objective.constellation,
                              profile, objective.noise_variance, cfg);
}

}  // namespace

StepSizeResult optimize_step_size(const TuneObjective& objective, const StepSearch& search,
                                  const SeConfig& cfg) {
    if (objective.bits < 1) {
        throw std::invalid_argument("optimize_step_size: finite resolution required");
    }
    if (!(search.lo > 0.0) || !(search.hi > search.lo) || !(search.tol > 0.0)) {
        throw std::invalid_argument("optimize_step_size: invalid search bracket");
    }

    StepSizeResult result;
    if (objective.detector == DetectorKind::DQ && objective.bits == 1) {
        // One-bit cells are (-inf, 0] and (0, inf) up to level labels, so the
        // exact-likelihood detector cannot depend on the step.
        result.irrelevant = true;
        result.delta = std::numeric_limits<double>::quiet_NaN();
        result.metric_value = step_metric(objective, 1.0, cfg);
        return result;
    }

    const auto f = [&](double delta) { return step_metric(objective, delta, cfg); };
    // The exact-likelihood detector resolves the quantizer per real dimension;
    // its step is reported against the complex envelope, i.e. scaled by
    // sqrt(2) relative to the per-dimension step the recursion works with.
    const double report_scale =
        objective.detector == DetectorKind::DQ ? std::numbers::sqrt2 : 1.0;

    // Coarse scan to bracket the minimizer before refining.
    constexpr int kCoarse = 33;
    std::vector<double> xs(kCoarse), ys(kCoarse);
    for (int i = 0; i < kCoarse; ++i) {
        xs[i] = search.lo + (search.hi - search.lo) * i / (kCoarse - 1);
        ys[i] = f(xs[i]);
    }
    int best = static_cast<int>(std::min_element(ys.begin(), ys.end()) - ys.begin());

    int interior_minima = 0;
    for (int i = 1; i + 1 < kCoarse; ++i) {
        if (ys[i] < ys[i - 1] && ys[i] < ys[i + 1]) ++interior_minima;
    }
    if (interior_minima > 1) {
        // Non-unimodal objective: fall back to a dense grid.
        constexpr int kDense = 400;
        double best_x = xs[best], best_y = ys[best];
        for (int i = 0; i < kDense; ++i) {
            const double x = search.lo + (search.hi - search.lo) * i / (kDense - 1);
            const double y = f(x);
            if (y < best_y) {
                best_y = y;
                best_x = x;
            }
        }
        result.grid_fallback = true;
        result.delta = report_scale * best_x;
        result.metric_value = best_y;
        return result;
    }

    double a = xs[std::max(best - 1, 0)];
    double b = xs[std::min(best + 1, kCoarse - 1)];
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > search.tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    const double delta = 0.5 * (a + b);
    result.delta = report_scale * delta;
    result.metric_value = f(delta);
    return result;
}

SigmaQSweepResult sweep_sigma_q(const std::vector<double>& sigma_q2_grid, double lambda,
                                int bits, double step, double noise_variance,
                                const SeConfig& cfg) {
    if (sigma_q2_grid.empty()) throw std::invalid_argument("sweep_sigma_q: empty grid");
    MixedProfile profile;
    profile.entries.push_back({AdcSpec::uniform(bits, step), lambda});
    const Constellation gaussian = Constellation::gaussian();

    SigmaQSweepResult result;
    result.grid.reserve(sigma_q2_grid.size());
    result.optimum = {0.0, kInf};
    for (double sigma_q2 : sigma_q2_grid) {
        const double mse = evaluate_se_metric(Metric::MSE, DetectorKind::PDQ, gaussian,
                                              profile, noise_variance, cfg, sigma_q2);
        result.grid.push_back({sigma_q2, mse});
        if (mse < result.optimum.metric) result.optimum = {sigma_q2, mse};
    }
    std::sort(result.grid.begin(), result.grid.end(),
              [](const SweepPoint& p, const SweepPoint& q) { return p.parameter < q.parameter; });
    result.heuristic_sigma_q2 = pdq_sigma_q2(step, noise_variance);
    result.heuristic_metric =
        evaluate_se_metric(Metric::MSE, DetectorKind::PDQ, gaussian, profile, noise_variance,
                           cfg, result.heuristic_sigma_q2);
    return result;
}

std::vector<MixedSweepPoint> sweep_mixed_profile(const std::vector<double>& fractions,
                                                 const MixedSweepContext& context,
                                                 const SeConfig& cfg) {
    std::vector<MixedSweepPoint> out;
    out.reserve(fractions.size());
    for (double f : fractions) {
        if (f < 0.0 || f > 1.0) {
            throw std::invalid_argument("sweep_mixed_profile: fraction outside [0, 1]");
        }
        MixedProfile profile;
        profile.entries.push_back({context.base_spec, context.lambda * (1.0 - f)});
        profile.entries.push_back({AdcSpec::infinite(), context.lambda * f});
        MixedSweepPoint point;
        point.fraction = f;
        point.metric_dq = evaluate_se_metric(context.metric, DetectorKind::DQ,
                                             context.constellation, profile,
                                             context.noise_variance, cfg);
        point.metric_pdq = evaluate_se_metric(context.metric, DetectorKind::PDQ,
                                              context.constellation, profile,
                                              context.noise_variance, cfg);
        out.push_back(point);
    }
    std::sort(out.begin(), out.end(), [](const MixedSweepPoint& p, const MixedSweepPoint& q) {
        return p.fraction < q.fraction;
    });
    return out;
}

}  // namespace mimo
