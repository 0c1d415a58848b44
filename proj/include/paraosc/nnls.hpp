#pragma once

// Lawson-Hanson active-set solver for min ||Ax - b|| subject to x >= 0,
// plus a variant adding the simplex face constraint sum(x) <= 1 via a
// heavily weighted penalty row activated only when the unconstrained
// optimum violates it.

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace paraosc {

inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            int max_iter = 0, double tol = 0.0) {
    const int n = static_cast<int>(A.cols());
    if (max_iter <= 0) max_iter = 3 * n + 30;
    if (tol <= 0.0) tol = 1e-12 * A.cwiseAbs().maxCoeff() * std::max(1.0, b.cwiseAbs().maxCoeff());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<size_t>(n), false);
    Eigen::VectorXd w = A.transpose() * (b - A * x);

    const auto solve_passive = [&](void) -> Eigen::VectorXd {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (passive[static_cast<size_t>(j)]) idx.push_back(j);
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
        const Eigen::VectorXd zp =
            Ap.colPivHouseholderQr().solve(b);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        for (size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[static_cast<Eigen::Index>(k)];
        return z;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        int best = -1;
        double best_w = tol;
        for (int j = 0; j < n; ++j)
            if (!passive[static_cast<size_t>(j)] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        if (best < 0) break;
        passive[static_cast<size_t>(best)] = true;

        Eigen::VectorXd z = solve_passive();
        while (true) {
            double alpha = 1.0;
            int blocker = -1;
            for (int j = 0; j < n; ++j) {
                if (!passive[static_cast<size_t>(j)] || z[j] > 0.0) continue;
                const double a = x[j] / (x[j] - z[j]);
                if (a < alpha) {
                    alpha = a;
                    blocker = j;
                }
            }
            if (blocker < 0) break;
            x += alpha * (z - x);
            for (int j = 0; j < n; ++j)
                if (passive[static_cast<size_t>(j)] && x[j] <= tol) {
                    passive[static_cast<size_t>(j)] = false;
                    x[j] = 0.0;
                }
            z = solve_passive();
        }
        x = z;
        w = A.transpose() * (b - A * x);
    }
    return x.cwiseMax(0.0);
}

// min ||Ax - b|| s.t. x >= 0 and sum(x) <= cap
inline Eigen::VectorXd nnls_capped_sum(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double cap) {
    Eigen::VectorXd x = nnls(A, b);
    if (x.sum() <= cap + 1e-12) return x;
    const double weight = 1e6 * std::max(1.0, A.cwiseAbs().maxCoeff());
    Eigen::MatrixXd Aw(A.rows() + 1, A.cols());
    Eigen::VectorXd bw(b.size() + 1);
    Aw.topRows(A.rows()) = A;
    Aw.bottomRows(1).setConstant(weight);
    bw.head(b.size()) = b;
    bw[b.size()] = weight * cap;
    return nnls(Aw, bw);
}

}  // namespace paraosc
