#pragma once

// Numerical kernels for time evolution: dense matrix exponential
// (scaling-and-squaring), a Lanczos propagator for large Hermitian
// generators, and a fixed-step RK4 driver.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fockspace.hpp"

namespace paraosc {

// exp(A) by degree-13 Pade approximation with scaling and squaring
inline DenseMat expm(const DenseMat& A) {
    static const double b[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const double theta13 = 5.371920351148152;
    const auto n = A.rows();
    const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    if (nrm > theta13)
        s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    const DenseMat As = A * std::pow(2.0, -s);
    const DenseMat A2 = As * As;
    const DenseMat A4 = A2 * A2;
    const DenseMat A6 = A4 * A2;
    const DenseMat I = DenseMat::Identity(n, n);
    const DenseMat U =
        As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
              b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    const DenseMat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
                       b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    DenseMat F = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) F = F * F;
    return F;
}

namespace detail {

inline void check_times(const std::vector<double>& times) {
    if (times.empty())
        throw std::invalid_argument("evolution: times must be nonempty");
    double prev = 0.0;
    for (double t : times) {
        if (t < prev)
            throw std::invalid_argument("evolution: times must be sorted and nonnegative");
        prev = t;
    }
}

// exp(-i tau T) e1 for a real symmetric tridiagonal T given by alpha/beta
inline Eigen::VectorXcd tridiag_expm_e1(const std::vector<double>& alpha,
                                        const std::vector<double>& beta, double tau) {
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[static_cast<size_t>(i)];
        if (i + 1 < m) {
            T(i, i + 1) = beta[static_cast<size_t>(i)];
            T(i + 1, i) = beta[static_cast<size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd q1 = es.eigenvectors().row(0);
    Eigen::VectorXcd phases(m);
    for (int i = 0; i < m; ++i)
        phases[i] = std::exp(Cx(0.0, -tau * es.eigenvalues()[i])) * q1[i];
    return es.eigenvectors() * phases;
}

}  // namespace detail

// exp(-i t H) v for Hermitian sparse H via Lanczos with full
// reorthogonalization.  Splits the step in half when the a-posteriori
// estimate does not reach tol within m_max basis vectors.
inline Vec krylov_propagate(const SparseMat& H, const Vec& v, double t,
                            int m_max = 40, double tol = 1e-12, int depth = 0) {
    if (depth > 30)
        throw std::runtime_error("krylov_propagate: step subdivision failed to converge");
    const double beta0 = v.norm();
    if (beta0 == 0.0 || t == 0.0) return v;

    const int m_cap = std::min<int>(m_max, static_cast<int>(v.size()));
    std::vector<Vec> basis;
    basis.reserve(static_cast<size_t>(m_cap) + 1);
    basis.push_back(v / beta0);
    std::vector<double> alpha, beta;
    Eigen::VectorXcd small;
    bool converged = false;

    for (int j = 0; j < m_cap; ++j) {
        Vec w = H * basis[static_cast<size_t>(j)];
        const double a = basis[static_cast<size_t>(j)].dot(w).real();
        alpha.push_back(a);
        w -= a * basis[static_cast<size_t>(j)];
        if (j > 0) w -= beta[static_cast<size_t>(j - 1)] * basis[static_cast<size_t>(j - 1)];
        for (const Vec& q : basis) w -= q.dot(w) * q;
        const double b = w.norm();

        small = detail::tridiag_expm_e1(alpha, beta, t);
        if (b < 1e-14) { converged = true; break; }  // invariant subspace
        const double err = std::abs(b * t * std::abs(small[j]));
        if (err < tol * std::max(1.0, beta0)) { converged = true; break; }
        beta.push_back(b);
        basis.push_back(w / b);
    }

    if (!converged && static_cast<int>(basis.size()) >= m_cap) {
        Vec half = krylov_propagate(H, v, 0.5 * t, m_max, tol, depth + 1);
        return krylov_propagate(H, half, 0.5 * t, m_max, tol, depth + 1);
    }

    Vec out = Vec::Zero(v.size());
    for (size_t j = 0; j < alpha.size(); ++j) out += (beta0 * small[static_cast<Eigen::Index>(j)]) * basis[j];
    return out;
}

// Fixed-step classical RK4 for y' = f(t, y) on any Eigen-like state with
// vector-space semantics.  Steps from t0 to t1 in n equal substeps.
template <typename State, typename Deriv>
State rk4_integrate(State y, double t0, double t1, int n, Deriv&& f) {
    const double h = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) {
        const double t = t0 + i * h;
        const State k1 = f(t, y);
        const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
        const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
        const State k4 = f(t + h, State(y + h * k3));
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

inline int substep_count(double gap, double max_step) {
    if (gap <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(gap / max_step)));
}

}  // namespace paraosc
