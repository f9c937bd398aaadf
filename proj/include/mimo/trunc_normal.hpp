#pragma once

#include <limits>

namespace mimo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// exp(x^2) * erfc(x), computed without overflow for large positive x.
double erfcx(double x);

// Standard normal pdf / cdf / upper tail.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_tail(double x);  // Q(x) = 1 - Phi(x)

// Inverse of Q restricted to (0, 0.5]; used for SNR interpolation checks.
double normal_tail_inv(double p);

struct TruncatedMoments {
    double mean;
    double var;
};

// Mean and variance of N(mu, var) restricted to the interval (lo, hi].
// Stable for cells arbitrarily deep in either tail: ratios of pdf to cell
// probability are evaluated through erfcx so no 0/0 occurs.
TruncatedMoments trunc_normal_moments(double mu, double var, double lo, double hi);

// P{ lo < X <= hi } for X ~ N(mu, var).
double normal_cell_prob(double mu, double var, double lo, double hi);

}  // namespace mimo
