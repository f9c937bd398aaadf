#pragma once

#include <complex>
#include <vector>

#include "mimo/rng.hpp"

namespace mimo {

using cplx = std::complex<double>;

enum class ConstellationKind { Qpsk, Gaussian, DiscreteSet };

// Input distribution of the transmitted symbols. Discrete sets must have
// unit average power; the Gaussian kind is the standard circular complex
// Gaussian with unit variance.
class Constellation {
public:
    static Constellation qpsk();
    static Constellation gaussian();
    static Constellation discrete(std::vector<cplx> points, std::vector<double> probabilities);

    ConstellationKind kind() const { return kind_; }
    bool is_discrete() const { return kind_ != ConstellationKind::Gaussian; }

    // Points and probabilities in canonical order (discrete kinds only).
    const std::vector<cplx>& points() const { return points_; }
    const std::vector<double>& probabilities() const { return probabilities_; }

    cplx sample(Rng& rng) const;

    // Nearest point in Euclidean distance; ties go to the smaller index.
    cplx hard_decision(cplx estimate) const;

private:
    Constellation() = default;
    ConstellationKind kind_ = ConstellationKind::Qpsk;
    std::vector<cplx> points_;
    std::vector<double> probabilities_;
    std::vector<double> cumulative_;
};

}  // namespace mimo
