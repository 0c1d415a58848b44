#pragma once

// Composite Hilbert space of one spin-1/2 qubit and two truncated bosonic
// modes, ordered spin (x) mode_x (x) mode_y.  Basis index convention:
//     index = spin * (d_x * d_y) + n_x * d_y + n_y,   spin: down = 0, up = 1.
// Truncation is hard: the raising operator annihilates the top Fock level.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace paraosc {

using Cx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using DenseMat = Eigen::MatrixXcd;
using SparseMat = Eigen::SparseMatrix<Cx>;

enum class Spin { down = 0, up = 1 };
enum class Mode { x, y };

inline const char* to_string(Spin s) { return s == Spin::down ? "down" : "up"; }
inline const char* to_string(Mode m) { return m == Mode::x ? "x" : "y"; }

struct BasisLabel {
    Spin spin;
    int n_x;
    int n_y;
};

struct SpaceSpec {
    int d_x = 0;  // Fock levels kept in mode x
    int d_y = 0;  // Fock levels kept in mode y

    int dim() const { return 2 * d_x * d_y; }

    int index(Spin spin, int n_x, int n_y) const {
        if (n_x < 0 || n_x >= d_x || n_y < 0 || n_y >= d_y)
            throw std::invalid_argument("SpaceSpec::index: Fock label outside truncation");
        return static_cast<int>(spin) * d_x * d_y + n_x * d_y + n_y;
    }

    BasisLabel label(int index) const {
        if (index < 0 || index >= dim())
            throw std::invalid_argument("SpaceSpec::label: index out of range");
        const int block = d_x * d_y;
        return BasisLabel{index < block ? Spin::down : Spin::up,
                          (index % block) / d_y, index % d_y};
    }

    friend bool operator==(const SpaceSpec& a, const SpaceSpec& b) {
        return a.d_x == b.d_x && a.d_y == b.d_y;
    }
    friend bool operator!=(const SpaceSpec& a, const SpaceSpec& b) { return !(a == b); }
};

inline SpaceSpec make_space(int d_x, int d_y) {
    if (d_x < 1 || d_y < 1)
        throw std::invalid_argument("make_space: truncation must keep at least one Fock level per mode");
    return SpaceSpec{d_x, d_y};
}

inline void require_same_space(const SpaceSpec& a, const SpaceSpec& b, const char* where) {
    if (a != b) throw std::invalid_argument(std::string(where) + ": space mismatch");
}

// ---------------------------------------------------------------------------
// Operator: complex square matrix on a SpaceSpec.  Sparse storage; the only
// contract is element access and products, so conversions stay cheap.
// ---------------------------------------------------------------------------

class Operator {
public:
    Operator() = default;
    Operator(SpaceSpec space, SparseMat m) : space_(space), m_(std::move(m)) {
        if (m_.rows() != space_.dim() || m_.cols() != space_.dim())
            throw std::invalid_argument("Operator: matrix does not match space dimension");
        m_.makeCompressed();
    }

    static Operator zero(const SpaceSpec& space) {
        return Operator(space, SparseMat(space.dim(), space.dim()));
    }

    static Operator identity(const SpaceSpec& space) {
        SparseMat m(space.dim(), space.dim());
        m.setIdentity();
        return Operator(space, std::move(m));
    }

    static Operator diagonal(const SpaceSpec& space, const Vec& d) {
        if (d.size() != space.dim())
            throw std::invalid_argument("Operator::diagonal: size mismatch");
        SparseMat m(space.dim(), space.dim());
        m.reserve(Eigen::VectorXi::Constant(space.dim(), 1));
        for (int i = 0; i < space.dim(); ++i)
            if (d[i] != Cx(0.0)) m.insert(i, i) = d[i];
        return Operator(space, std::move(m));
    }

    const SpaceSpec& space() const { return space_; }
    const SparseMat& matrix() const { return m_; }
    int dim() const { return space_.dim(); }

    Cx coeff(int i, int j) const { return m_.coeff(i, j); }
    DenseMat dense() const { return DenseMat(m_); }

    Operator adjoint() const { return Operator(space_, SparseMat(m_.adjoint())); }

    double max_abs() const {
        double r = 0.0;
        for (int k = 0; k < m_.outerSize(); ++k)
            for (SparseMat::InnerIterator it(m_, k); it; ++it)
                r = std::max(r, std::abs(it.value()));
        return r;
    }

    // max row sum of |entries|; cheap upper bound on the spectral radius
    double inf_norm() const {
        std::vector<double> row(static_cast<size_t>(m_.rows()), 0.0);
        for (int k = 0; k < m_.outerSize(); ++k)
            for (SparseMat::InnerIterator it(m_, k); it; ++it)
                row[static_cast<size_t>(it.row())] += std::abs(it.value());
        double r = 0.0;
        for (double v : row) r = std::max(r, v);
        return r;
    }

    bool is_hermitian(double tol = 1e-12) const {
        SparseMat diff = m_ - SparseMat(m_.adjoint());
        double r = 0.0;
        for (int k = 0; k < diff.outerSize(); ++k)
            for (SparseMat::InnerIterator it(diff, k); it; ++it)
                r = std::max(r, std::abs(it.value()));
        return r <= tol;
    }

    Vec apply(const Vec& v) const { return m_ * v; }

    friend Operator operator+(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "Operator+");
        return Operator(a.space_, SparseMat(a.m_ + b.m_));
    }
    friend Operator operator-(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "Operator-");
        return Operator(a.space_, SparseMat(a.m_ - b.m_));
    }
    friend Operator operator*(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "Operator*");
        return Operator(a.space_, SparseMat(a.m_ * b.m_));
    }
    friend Operator operator*(Cx s, const Operator& a) {
        return Operator(a.space_, SparseMat(s * a.m_));
    }
    friend Operator operator*(double s, const Operator& a) { return Cx(s) * a; }

private:
    SpaceSpec space_;
    SparseMat m_;
};

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }
inline Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

struct StateVector {
    SpaceSpec space;
    Vec amplitudes;

    StateVector() = default;
    StateVector(SpaceSpec s, Vec a) : space(s), amplitudes(std::move(a)) {
        if (amplitudes.size() != space.dim())
            throw std::invalid_argument("StateVector: amplitude size does not match space");
    }

    double norm() const { return amplitudes.norm(); }
};

struct DensityMatrix {
    SpaceSpec space;
    DenseMat rho;

    DensityMatrix() = default;
    DensityMatrix(SpaceSpec s, DenseMat r) : space(s), rho(std::move(r)) {
        if (rho.rows() != space.dim() || rho.cols() != space.dim())
            throw std::invalid_argument("DensityMatrix: matrix does not match space");
    }

    static DensityMatrix from_state(const StateVector& psi) {
        return DensityMatrix(psi.space, psi.amplitudes * psi.amplitudes.adjoint());
    }

    double trace_real() const { return rho.trace().real(); }

    double hermiticity_residual() const {
        return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (rho + rho.adjoint()),
                                                   Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    // trace within 1e-8 of one, Hermitian within 1e-10, spectrum >= -1e-8
    void validate() const {
        if (std::abs(trace_real() - 1.0) > 1e-8)
            throw std::invalid_argument("DensityMatrix: trace deviates from one");
        if (hermiticity_residual() > 1e-10)
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        if (min_eigenvalue() < -1e-8)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
};

inline StateVector basis_state(const SpaceSpec& space, Spin spin, int n_x, int n_y) {
    Vec v = Vec::Zero(space.dim());
    v[space.index(spin, n_x, n_y)] = 1.0;
    return StateVector(space, std::move(v));
}

// ---------------------------------------------------------------------------
// Elementary operators
// ---------------------------------------------------------------------------

enum class LadderDir { lower, raise };
enum class SpinOp { plus, minus, z };

inline Operator mode_op(const SpaceSpec& space, Mode mode, LadderDir dir) {
    const int d = space.dim();
    SparseMat m(d, d);
    std::vector<Eigen::Triplet<Cx>> trips;
    trips.reserve(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
        const BasisLabel l = space.label(i);
        const int n = mode == Mode::x ? l.n_x : l.n_y;
        const int lim = mode == Mode::x ? space.d_x : space.d_y;
        if (dir == LadderDir::lower) {
            if (n >= 1) {
                const int j = mode == Mode::x ? space.index(l.spin, l.n_x - 1, l.n_y)
                                              : space.index(l.spin, l.n_x, l.n_y - 1);
                trips.emplace_back(j, i, std::sqrt(static_cast<double>(n)));
            }
        } else {
            if (n + 1 < lim) {  // hard truncation: no amplitude out of the top level
                const int j = mode == Mode::x ? space.index(l.spin, l.n_x + 1, l.n_y)
                                              : space.index(l.spin, l.n_x, l.n_y + 1);
                trips.emplace_back(j, i, std::sqrt(static_cast<double>(n + 1)));
            }
        }
    }
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(space, std::move(m));
}

inline Operator number_op(const SpaceSpec& space, Mode mode) {
    Vec d(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        d[i] = static_cast<double>(mode == Mode::x ? l.n_x : l.n_y);
    }
    return Operator::diagonal(space, d);
}

inline Operator spin_op(const SpaceSpec& space, SpinOp which) {
    const int d = space.dim();
    const int block = space.d_x * space.d_y;
    SparseMat m(d, d);
    std::vector<Eigen::Triplet<Cx>> trips;
    trips.reserve(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
        const bool up = i >= block;
        switch (which) {
            case SpinOp::plus:   // |up><down|
                if (!up) trips.emplace_back(i + block, i, 1.0);
                break;
            case SpinOp::minus:  // |down><up|
                if (up) trips.emplace_back(i - block, i, 1.0);
                break;
            case SpinOp::z:      // -1 on |down>, +1 on |up>
                trips.emplace_back(i, i, up ? 1.0 : -1.0);
                break;
        }
    }
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(space, std::move(m));
}

inline Operator spin_up_projector(const SpaceSpec& space) {
    Vec d = Vec::Zero(space.dim());
    const int block = space.d_x * space.d_y;
    for (int i = block; i < space.dim(); ++i) d[i] = 1.0;
    return Operator::diagonal(space, d);
}

// ---------------------------------------------------------------------------
// Expectation values.  Real output requires a Hermitian observable; any
// imaginary residue below 1e-9 is discarded, larger residue is an error.
// ---------------------------------------------------------------------------

inline constexpr double kImagResidueTol = 1e-9;

inline Cx expectation_complex(const Operator& obs, const StateVector& psi) {
    require_same_space(obs.space(), psi.space, "expectation");
    return psi.amplitudes.dot(obs.matrix() * psi.amplitudes);
}

inline Cx expectation_complex(const Operator& obs, const DensityMatrix& rho) {
    require_same_space(obs.space(), rho.space, "expectation");
    return (obs.matrix() * rho.rho).trace();
}

namespace detail {
inline double real_checked(Cx v, const char* where) {
    if (std::abs(v.imag()) >= kImagResidueTol)
        throw std::runtime_error(std::string(where) + ": imaginary residue above tolerance");
    return v.real();
}
}  // namespace detail

inline double expectation(const Operator& obs, const StateVector& psi) {
    if (!obs.is_hermitian())
        throw std::invalid_argument("expectation: observable is not Hermitian");
    return detail::real_checked(expectation_complex(obs, psi), "expectation");
}

inline double expectation(const Operator& obs, const DensityMatrix& rho) {
    if (!obs.is_hermitian())
        throw std::invalid_argument("expectation: observable is not Hermitian");
    return detail::real_checked(expectation_complex(obs, rho), "expectation");
}

}  // namespace paraosc
