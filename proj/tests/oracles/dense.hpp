#pragma once

// Dense reference matrices and eigensolves (Eigen), used only by tests.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pklab/grid.hpp"

namespace pklab::oracle {

/// Assembles the matrix of a linear operator column by column.
template <class Apply>
Eigen::MatrixXd dense_matrix(std::size_t n, Apply&& apply) {
    Eigen::MatrixXd m(n, n);
    std::vector<double> e(n, 0.0), y(n);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        apply(std::span<const double>(e), std::span<double>(y));
        for (std::size_t i = 0; i < n; ++i) m(i, j) = y[i];
        e[j] = 0.0;
    }
    return m;
}

inline double smallest_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace pklab::oracle
