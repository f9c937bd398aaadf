#pragma once

#include <vector>

namespace mimo {

// Quadrature rule for integrals against the standard normal measure:
//   integral Du f(u) ~= sum_i weight[i] * f(node[i]).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermiteRule(int n);
};

// Shared, lazily built rules; construction costs an eigendecomposition, so
// hot paths should fetch instead of rebuilding.
const GaussHermiteRule& cached_gauss_hermite(int n);

}  // namespace mimo
