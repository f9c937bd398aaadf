#include "mimo/quantizer.hpp"

#include <cmath>
#include <stdexcept>

namespace mimo {

AdcSpec AdcSpec::uniform(int bits, double step) {
    if (bits < 1 || bits > 30) throw std::invalid_argument("AdcSpec: bits must be in [1, 30]");
    if (!(step > 0.0)) throw std::invalid_argument("AdcSpec: step must be > 0");
    return AdcSpec{bits, step};
}

double AdcSpec::level(int index) const {
    const int half = num_levels() / 2;
    return (static_cast<double>(index - half) + 0.5) * step;
}

std::vector<double> AdcSpec::levels() const {
    std::vector<double> out(num_levels());
    for (int i = 0; i < num_levels(); ++i) out[i] = level(i);
    return out;
}

AdcBank AdcBank::uniform(int antennas, const AdcSpec& spec) {
    return AdcBank(std::vector<AdcSpec>(antennas, spec));
}

AdcBank AdcBank::mixed(int antennas, const AdcSpec& low_res, int num_full_precision) {
    if (num_full_precision < 0 || num_full_precision > antennas) {
        throw std::invalid_argument("AdcBank: invalid full-precision count");
    }
    std::vector<AdcSpec> specs(antennas, low_res);
    for (int i = 0; i < num_full_precision; ++i) specs[i] = AdcSpec::infinite();
    return AdcBank(std::move(specs));
}

double quantize_real(double value, const AdcSpec& spec) {
    if (std::isnan(value)) throw std::invalid_argument("quantize_real: NaN input");
    if (spec.is_infinite()) return value;
    const int half = spec.num_levels() / 2;
    // Cell of level (m + 1/2)*step is (m*step, (m+1)*step].
    double m = std::ceil(value / spec.step) - 1.0;
    m = std::min(std::max(m, static_cast<double>(-half)), static_cast<double>(half - 1));
    return (m + 0.5) * spec.step;
}

cplx quantize_complex(cplx value, const AdcSpec& spec) {
    return cplx(quantize_real(value.real(), spec), quantize_real(value.imag(), spec));
}

VectorC quantize_vector(const VectorC& y, const AdcBank& bank) {
    if (y.size() != bank.size()) {
        throw std::invalid_argument("quantize_vector: length mismatch");
    }
    VectorC r(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        r(i) = quantize_complex(y(i), bank.assignment[i]);
    }
    return r;
}

QuantInterval interval_of(double level, const AdcSpec& spec) {
    if (spec.is_infinite()) {
        throw std::invalid_argument("interval_of: infinite-resolution spec has no cells");
    }
    const int half = spec.num_levels() / 2;
    const double m = std::round(level / spec.step - 0.5);
    const double reconstructed = (m + 0.5) * spec.step;
    if (std::abs(level - reconstructed) > 1e-9 * spec.step || m < -half || m > half - 1) {
        throw std::invalid_argument("interval_of: level is not in the output alphabet");
    }
    QuantInterval cell{level - 0.5 * spec.step, level + 0.5 * spec.step};
    if (m == -half) cell.low = -kInf;
    if (m == half - 1) cell.high = kInf;
    return cell;
}

}  // namespace mimo
