#pragma once

#include "drmdp/error.hpp"
#include "drmdp/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace drmdp {

/// Unique stationary distribution of an ergodic price chain, from the
/// balance equations pi (P - I) = 0 with one equation swapped for sum(pi) = 1.
inline std::vector<double> stationary_distribution(const PriceChain& chain, double tol = 1e-12) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(j, i) = chain.transition[i][j] - (i == j ? 1.0 : 0.0);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd x = a.fullPivLu().solve(b);

    std::vector<double> pi(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        pi[i] = std::max(0.0, x(i));
        sum += pi[i];
    }
    for (auto& v : pi) v /= sum;

    double residual = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += pi[i] * chain.transition[i][j];
        residual = std::max(residual, std::abs(acc - pi[j]));
    }
    if (!(residual <= tol))
        throw ConvergenceError("stationary distribution residual above tolerance", residual, 1);
    return pi;
}

} // namespace drmdp
