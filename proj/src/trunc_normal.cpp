#include "mimo/trunc_normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mimo {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrt2OverPi = 0.7978845608028653558798921;  // sqrt(2/pi)
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// Asymptotic series for erfcx at large argument.
double erfcx_asymptotic(double x) {
    const double ix2 = 1.0 / (x * x);
    // 1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + 105/(16x^8)
    double series = 1.0 + ix2 * (-0.5 + ix2 * (0.75 + ix2 * (-1.875 + ix2 * 6.5625)));
    return series / (x * std::sqrt(std::numbers::pi));
}

}  // namespace

double erfcx(double x) {
    if (x < 0.0) {
        // Only safe for moderately negative arguments; callers keep tails on
        // the positive side.
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x <= 25.0) {
        return std::exp(x * x) * std::erfc(x);
    }
    return erfcx_asymptotic(x);
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_tail_inv(double p) {
    if (!(p > 0.0) || p > 0.5) {
        throw std::invalid_argument("normal_tail_inv: p must be in (0, 0.5]");
    }
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (normal_tail(mid) > p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double normal_cell_prob(double mu, double var, double lo, double hi) {
    const double sd = std::sqrt(var);
    const double a = (lo - mu) / sd;
    const double b = (hi - mu) / sd;
    if (a == -kInf && b == kInf) return 1.0;
    if (a == -kInf) return normal_cdf(b);
    if (b == kInf) return normal_tail(a);
    if (a >= 0.0) return normal_tail(a) - normal_tail(b);
    if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
    return 0.5 * (std::erf(b / kSqrt2) - std::erf(a / kSqrt2));
}

namespace {

struct Ratios {
    double h1;  // (phi(a) - phi(b)) / Z
    double h2;  // (a phi(a) - b phi(b)) / Z
};

// Two-sided cell with both standardized bounds nonnegative (right tail).
Ratios ratios_right_tail(double a, double b) {
    if (b == kInf) {
        const double t = kSqrt2OverPi / erfcx(a / kSqrt2);
        return {t, a * t};
    }
    const double log_d = -0.5 * (b - a) * (b + a);
    const double d = std::exp(log_d);
    const double den = erfcx(a / kSqrt2) - erfcx(b / kSqrt2) * d;
    const double h1 = kSqrt2OverPi * (-std::expm1(log_d)) / den;
    // h2 = sqrt(2/pi) (a - b d) / den with a - b d = (a - b) - b (d - 1)
    const double h2 = kSqrt2OverPi * ((a - b) - b * std::expm1(log_d)) / den;
    return {h1, h2};
}

Ratios ratios_standardized(double a, double b) {
    if (a == -kInf && b == kInf) return {0.0, 0.0};
    if (a == -kInf) {
        // (-inf, b]
        if (b <= 0.0) {
            const double t = kSqrt2OverPi / erfcx(-b / kSqrt2);
            return {-t, -b * t};
        }
        const double t = normal_pdf(b) / normal_cdf(b);
        return {-t, -b * t};
    }
    if (b == kInf) {
        if (a >= 0.0) return ratios_right_tail(a, kInf);
        const double t = normal_pdf(a) / normal_tail(a);
        return {t, a * t};
    }
    if (a >= 0.0) return ratios_right_tail(a, b);
    if (b <= 0.0) {
        Ratios m = ratios_right_tail(-b, -a);
        return {-m.h1, m.h2};
    }
    // Cell straddles the mean; factor out the larger pdf so the exp stays
    // bounded (the other form produces 0 * inf when one bound is far out).
    const double z = 0.5 * (std::erf(b / kSqrt2) - std::erf(a / kSqrt2));
    const double log_ratio = 0.5 * (a - b) * (a + b);  // log(phi(b)/phi(a))
    if (log_ratio <= 0.0) {
        const double pa = normal_pdf(a);
        const double h1 = -pa * std::expm1(log_ratio) / z;
        const double h2 = pa * ((a - b) - b * std::expm1(log_ratio)) / z;
        return {h1, h2};
    }
    const double pb = normal_pdf(b);
    const double h1 = pb * std::expm1(-log_ratio) / z;
    const double h2 = pb * ((a - b) + a * std::expm1(-log_ratio)) / z;
    return {h1, h2};
}

}  // namespace

TruncatedMoments trunc_normal_moments(double mu, double var, double lo, double hi) {
    if (!(var > 0.0)) throw std::invalid_argument("trunc_normal_moments: var must be > 0");
    if (!(lo < hi)) throw std::invalid_argument("trunc_normal_moments: empty interval");
    const double sd = std::sqrt(var);
    const double a = (lo == -kInf) ? -kInf : (lo - mu) / sd;
    const double b = (hi == kInf) ? kInf : (hi - mu) / sd;
    const Ratios r = ratios_standardized(a, b);
    const double mean = mu + sd * r.h1;
    double v = var * (1.0 + r.h2 - r.h1 * r.h1);
    v = std::clamp(v, 0.0, var);
    return {mean, v};
}

}  // namespace mimo
