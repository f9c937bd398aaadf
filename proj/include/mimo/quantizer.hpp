#pragma once

#include <vector>

#include "mimo/model.hpp"
#include "mimo/trunc_normal.hpp"

namespace mimo {

// A uniform midrise ADC: 2^bits output levels at odd multiples of step/2,
// saturating beyond the extreme levels. bits == kInfiniteBits models a
// full-precision converter (identity map).
struct AdcSpec {
    static constexpr int kInfiniteBits = -1;

    int bits = kInfiniteBits;
    double step = 0.0;

    static AdcSpec infinite() { return AdcSpec{kInfiniteBits, 0.0}; }
    static AdcSpec uniform(int bits, double step);

    bool is_infinite() const { return bits == kInfiniteBits; }
    int num_levels() const { return 1 << bits; }
    double level(int index) const;  // index in [0, 2^bits)
    std::vector<double> levels() const;

    bool operator==(const AdcSpec& other) const = default;
};

// Half-open decision interval (low, high] of a quantizer level.
struct QuantInterval {
    double low;
    double high;
};

// Per-antenna ADC assignment for a mixed-resolution receiver.
struct AdcBank {
    std::vector<AdcSpec> assignment;

    explicit AdcBank(std::vector<AdcSpec> specs) : assignment(std::move(specs)) {}
    int size() const { return static_cast<int>(assignment.size()); }

    // Convention used by the CLI: high-resolution antennas first.
    static AdcBank uniform(int antennas, const AdcSpec& spec);
    static AdcBank mixed(int antennas, const AdcSpec& low_res, int num_full_precision);
};

double quantize_real(double value, const AdcSpec& spec);
cplx quantize_complex(cplx value, const AdcSpec& spec);
VectorC quantize_vector(const VectorC& y, const AdcBank& bank);

// Decision interval of a level in the output alphabet; extreme levels extend
// to -inf / +inf.
QuantInterval interval_of(double level, const AdcSpec& spec);

}  // namespace mimo
