#include "mimo/constellation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mimo {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

Constellation Constellation::qpsk() {
    Constellation c;
    c.kind_ = ConstellationKind::Qpsk;
    c.points_ = {cplx(kInvSqrt2, kInvSqrt2), cplx(kInvSqrt2, -kInvSqrt2),
                 cplx(-kInvSqrt2, kInvSqrt2), cplx(-kInvSqrt2, -kInvSqrt2)};
    c.probabilities_ = {0.25, 0.25, 0.25, 0.25};
    c.cumulative_ = {0.25, 0.5, 0.75, 1.0};
    return c;
}

Constellation Constellation::gaussian() {
    Constellation c;
    c.kind_ = ConstellationKind::Gaussian;
    return c;
}

Constellation Constellation::discrete(std::vector<cplx> points,
                                      std::vector<double> probabilities) {
    if (points.empty() || points.size() != probabilities.size()) {
        throw std::invalid_argument("discrete constellation: size mismatch");
    }
    double psum = 0.0, power = 0.0;
    for (std::size_t m = 0; m < points.size(); ++m) {
        if (probabilities[m] < 0.0) {
            throw std::invalid_argument("discrete constellation: negative probability");
        }
        psum += probabilities[m];
        power += probabilities[m] * std::norm(points[m]);
    }
    if (std::abs(psum - 1.0) > 1e-9) {
        throw std::invalid_argument("discrete constellation: probabilities must sum to 1");
    }
    if (std::abs(power - 1.0) > 1e-9) {
        throw std::invalid_argument("discrete constellation: average power must be 1");
    }
    Constellation c;
    c.kind_ = ConstellationKind::DiscreteSet;
    c.points_ = std::move(points);
    c.probabilities_ = std::move(probabilities);
    c.cumulative_.resize(c.probabilities_.size());
    double acc = 0.0;
    for (std::size_t m = 0; m < c.probabilities_.size(); ++m) {
        acc += c.probabilities_[m];
        c.cumulative_[m] = acc;
    }
    c.cumulative_.back() = 1.0;
    return c;
}

cplx Constellation::sample(Rng& rng) const {
    if (kind_ == ConstellationKind::Gaussian) {
        return cplx(rng.next_gaussian() * kInvSqrt2, rng.next_gaussian() * kInvSqrt2);
    }
    const double u = rng.next_double();
    for (std::size_t m = 0; m < cumulative_.size(); ++m) {
        if (u <= cumulative_[m]) return points_[m];
    }
    return points_.back();
}

cplx Constellation::hard_decision(cplx estimate) const {
    if (!is_discrete()) {
        throw std::invalid_argument("hard_decision: no decision rule for a Gaussian input");
    }
    std::size_t best = 0;
    double best_d = std::norm(estimate - points_[0]);
    for (std::size_t m = 1; m < points_.size(); ++m) {
        const double d = std::norm(estimate - points_[m]);
        if (d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return points_[best];
}

}  // namespace mimo
