#include "mimo/gauss_hermite.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Dense>

namespace mimo {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// probabilists' Hermite recurrence (off-diagonal sqrt(j)), weights the
// squared first eigenvector components. Stable at any order, unlike the
// Newton-on-recurrence construction whose polynomial values overflow for
// large n.
GaussHermiteRule::GaussHermiteRule(int n) {
    if (n < 1) throw std::invalid_argument("GaussHermiteRule: order must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j < n; ++j) {
        const double beta = std::sqrt(static_cast<double>(j));
        jacobi(j, j - 1) = beta;
        jacobi(j - 1, j) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("GaussHermiteRule: eigensolver failed");
    }
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        weights[i] = v0 * v0;
    }
}

const GaussHermiteRule& cached_gauss_hermite(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(n);
    return *slot;
}

}  // namespace mimo
