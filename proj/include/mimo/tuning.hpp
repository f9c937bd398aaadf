#pragma once

#include <optional>
#include <vector>

#include "mimo/state_evolution.hpp"

namespace mimo {

enum class Metric { BER, MSE };
enum class DetectorKind { DQ, PDQ, Linear };

InputDenoiser detector_denoiser(DetectorKind detector, const Constellation& constellation);
SeOutput detector_output(DetectorKind detector);

// SE-predicted metric of a detector on a mixed profile; the single point of
// truth used by every optimization routine below.
double evaluate_se_metric(Metric metric, DetectorKind detector,
                          const Constellation& constellation, const MixedProfile& profile,
                          double noise_variance, const SeConfig& cfg,
                          std::optional<double> sigma_q2_override = std::nullopt);

struct TuneObjective {
    Metric metric;
    DetectorKind detector;
    Constellation constellation;
    double lambda;
    double noise_variance;
    int bits;
};

struct StepSearch {
    double lo = 0.01;
    double hi = 8.0;
    double tol = 1e-3;
};

struct StepSizeResult {
    bool irrelevant = false;   // DQ with 1-bit ADCs: the metric does not depend on the step
    double delta = 0.0;        // DQ steps are reported in complex-envelope units
    double metric_value = 0.0;
    bool grid_fallback = false;  // golden section rejected, dense grid used
};

// Minimizes the SE-predicted metric over the quantizer step via golden
// section search, with a dense-grid fallback when the bracket turns out not
// to be unimodal.
StepSizeResult optimize_step_size(const TuneObjective& objective, const StepSearch& search,
                                  const SeConfig& cfg);

// Delta_norm = sqrt(2) * Delta / sqrt(1 + sigma_n^2).
double normalize_step(double delta, double noise_variance);

struct SweepPoint {
    double parameter;
    double metric;
};

struct SweepResult {
    std::vector<SweepPoint> grid;
    SweepPoint optimum;
};

// MSE of the PDQ detector (Gaussian input) as sigma_q^2 varies, together
// with the pdq_sigma_q2 heuristic value for comparison.
struct SigmaQSweepResult : SweepResult {
    double heuristic_sigma_q2 = 0.0;
    double heuristic_metric = 0.0;
};

SigmaQSweepResult sweep_sigma_q(const std::vector<double>& sigma_q2_grid, double lambda,
                                int bits, double step, double noise_variance,
                                const SeConfig& cfg);

struct MixedSweepPoint {
    double fraction;   // share of full-precision antennas
    double metric_dq;
    double metric_pdq;
};

struct MixedSweepContext {
    AdcSpec base_spec;
    double lambda;
    double noise_variance;
    Metric metric;
    Constellation constellation;
};

std::vector<MixedSweepPoint> sweep_mixed_profile(const std::vector<double>& fractions,
                                                 const MixedSweepContext& context,
                                                 const SeConfig& cfg);

}  // namespace mimo
