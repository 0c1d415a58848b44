#pragma once

// Experimental-sequence layer: Fock-state preparation plans, pulse-sequence
// simulation, spin reset, blue-sideband readout scans, and the two fitting
// procedures used on scan data.
//
// Pulse conventions: the flopped-state probability follows cos^2(W t) with
// W = Omega01 * sqrt(level) on sidebands and Omega01 on the carrier, so a
// pi-pulse lasts pi / (2 W).  Step Hamiltonians carry the eta*Omega = 2*Omega01
// prefactor that produces exactly that Rabi frequency.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hamiltonian.hpp"
#include "nnls.hpp"
#include "numeric.hpp"
#include "rng.hpp"

namespace paraosc {

enum class PulseKind { carrier, rsb_x, rsb_y, bsb_x, bsb_y };

inline const char* to_string(PulseKind k) {
    switch (k) {
        case PulseKind::carrier: return "carrier";
        case PulseKind::rsb_x: return "rsb_x";
        case PulseKind::rsb_y: return "rsb_y";
        case PulseKind::bsb_x: return "bsb_x";
        case PulseKind::bsb_y: return "bsb_y";
    }
    return "?";
}

struct PulseStep {
    PulseKind kind = PulseKind::carrier;
    double duration = 0.0;  // seconds
    double phase = 0.0;     // radians

    void validate() const {
        if (duration <= 0.0)
            throw std::invalid_argument("PulseStep: duration must be positive");
    }
};

inline Operator step_hamiltonian(const SpaceSpec& space, const PulseStep& step,
                                 double omega01) {
    if (omega01 <= 0.0)
        throw std::invalid_argument("step_hamiltonian: omega01 must be positive");
    const double eta_omega = 2.0 * omega01;
    switch (step.kind) {
        case PulseKind::carrier: {
            const Operator sp = spin_op(space, SpinOp::plus);
            const Operator half = std::exp(Cx(0.0, step.phase)) * sp;
            return omega01 * (half + half.adjoint());
        }
        case PulseKind::rsb_x:
            return sideband_hamiltonian(space, Mode::x, SidebandColor::red, eta_omega, step.phase);
        case PulseKind::rsb_y:
            return sideband_hamiltonian(space, Mode::y, SidebandColor::red, eta_omega, step.phase);
        case PulseKind::bsb_x:
            return sideband_hamiltonian(space, Mode::x, SidebandColor::blue, eta_omega, step.phase);
        case PulseKind::bsb_y:
            return sideband_hamiltonian(space, Mode::y, SidebandColor::blue, eta_omega, step.phase);
    }
    throw std::invalid_argument("step_hamiltonian: unknown pulse kind");
}

struct PrepPlan {
    Mode mode = Mode::x;
    int target_n = 0;
    double omega01 = 0.0;  // rad/s
    std::vector<PulseStep> steps;

    // Nominal state after step k (1-based) when starting from |down,0,0>.
    StateVector waypoint(const SpaceSpec& space, size_t k) const {
        if (k == 0) return basis_state(space, Spin::down, 0, 0);
        const bool is_carrier = k == steps.size() && steps.back().kind == PulseKind::carrier;
        const int level = is_carrier ? target_n : static_cast<int>(k);
        const Spin spin = is_carrier ? Spin::down : (k % 2 == 1 ? Spin::up : Spin::down);
        return mode == Mode::x ? basis_state(space, spin, level, 0)
                               : basis_state(space, spin, 0, level);
    }
};

// Alternating blue/red sideband pi-pulses walking |down,0> -> |up,1> ->
// |down,2> -> ..., closed by a carrier pi-pulse when the walk ends spin-up.
inline PrepPlan plan_fock_prep(Mode mode, int n, double omega01) {
    if (n < 0) throw std::invalid_argument("plan_fock_prep: n must be nonnegative");
    if (omega01 <= 0.0)
        throw std::invalid_argument("plan_fock_prep: omega01 must be positive");
    using std::numbers::pi;
    PrepPlan plan;
    plan.mode = mode;
    plan.target_n = n;
    plan.omega01 = omega01;
    for (int level = 1; level <= n; ++level) {
        PulseStep s;
        const bool blue = level % 2 == 1;
        s.kind = mode == Mode::x ? (blue ? PulseKind::bsb_x : PulseKind::rsb_x)
                                 : (blue ? PulseKind::bsb_y : PulseKind::rsb_y);
        s.duration = pi / (2.0 * omega01 * std::sqrt(static_cast<double>(level)));
        plan.steps.push_back(s);
    }
    if (n % 2 == 1) {
        PulseStep s;
        s.kind = PulseKind::carrier;
        s.duration = pi / (2.0 * omega01);
        plan.steps.push_back(s);
    }
    return plan;
}

struct SequenceResult {
    StateVector final_state;
    std::vector<StateVector> intermediates;  // state after each step
    std::vector<double> waypoint_fidelities; // vs the plan's nominal walk
    std::vector<std::string> warnings;
};

inline SequenceResult simulate_sequence_detailed(const SpaceSpec& space, const PrepPlan& plan,
                                                 const StateVector& initial) {
    require_same_space(space, initial.space, "simulate_sequence");
    if (std::abs(initial.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("simulate_sequence: initial state is not normalized");
    const int need = plan.target_n + 1;
    if ((plan.mode == Mode::x ? space.d_x : space.d_y) < need)
        throw std::invalid_argument("simulate_sequence: target level exceeds truncation");

    SequenceResult res;
    res.final_state = initial;
    Vec psi = initial.amplitudes;
    size_t k = 0;
    for (const PulseStep& step : plan.steps) {
        step.validate();
        const Operator H = step_hamiltonian(space, step, plan.omega01);
        if (space.dim() <= 512) {
            const DenseMat U = expm(DenseMat(Cx(0.0, -step.duration) * H.dense()));
            psi = U * psi;
        } else {
            psi = krylov_propagate(H.matrix(), psi, step.duration);
        }
        ++k;
        StateVector now(space, psi);
        res.waypoint_fidelities.push_back(
            std::norm(plan.waypoint(space, k).amplitudes.dot(psi)));
        res.intermediates.push_back(now);

        double leak = 0.0;
        for (int i = 0; i < space.dim(); ++i) {
            const BasisLabel l = space.label(i);
            if (l.n_x >= space.d_x - 2 || l.n_y >= space.d_y - 2)
                leak += std::norm(psi[i]);
        }
        if (leak > 1e-4)
            res.warnings.push_back("truncation leakage above 1e-4 after step " +
                                   std::to_string(k));
    }
    res.final_state = StateVector(space, psi);
    return res;
}

inline StateVector simulate_sequence(const SpaceSpec& space, const PrepPlan& plan,
                                     const StateVector& initial) {
    return simulate_sequence_detailed(space, plan, initial).final_state;
}

inline double fidelity(const StateVector& a, const StateVector& b) {
    require_same_space(a.space, b.space, "fidelity");
    return std::norm(a.amplitudes.dot(b.amplitudes));
}

// Measure-and-discard the spin, reprepare |down>; motional marginal intact.
inline DensityMatrix spin_reset(const DensityMatrix& rho) {
    const int block = rho.space.d_x * rho.space.d_y;
    DenseMat out = DenseMat::Zero(rho.space.dim(), rho.space.dim());
    out.topLeftCorner(block, block) = rho.rho.topLeftCorner(block, block) +
                                      rho.rho.bottomRightCorner(block, block);
    return DensityMatrix(rho.space, std::move(out));
}

inline std::vector<double> motional_populations(const DensityMatrix& rho, Mode mode) {
    const int levels = mode == Mode::x ? rho.space.d_x : rho.space.d_y;
    std::vector<double> p(static_cast<size_t>(levels), 0.0);
    for (int i = 0; i < rho.space.dim(); ++i) {
        const BasisLabel l = rho.space.label(i);
        p[static_cast<size_t>(mode == Mode::x ? l.n_x : l.n_y)] += rho.rho(i, i).real();
    }
    return p;
}

// ---------------------------------------------------------------------------
// Blue-sideband readout scans and population fitting
// ---------------------------------------------------------------------------

enum class SignalPolarity { as_printed, complemented };

inline const char* to_string(SignalPolarity p) {
    return p == SignalPolarity::as_printed ? "as_printed" : "complemented";
}

struct ReadoutScan {
    Mode mode = Mode::x;
    std::vector<double> times;  // seconds
    std::vector<double> p_up;   // measured (or exact) signal per time
    int shots = 0;              // 0 records the exact analytic curve
    std::uint64_t seed = 0;
    double omega01 = 0.0;
    double gamma = 0.0;
    SignalPolarity polarity = SignalPolarity::as_printed;
};

// Signal model: P(t) = 1/2 (1 + sum_n P_n e^{-gamma sqrt(n+1) t}
//                                      cos(Omega01 sqrt(n+1) t)),
// so P(0) = 1 for a flop-to-bright detector; `complemented` flips it.
inline double scan_signal(const std::vector<double>& populations, double omega01,
                          double gamma, double t, SignalPolarity polarity) {
    double acc = 0.0;
    for (size_t n = 0; n < populations.size(); ++n) {
        const double s = std::sqrt(static_cast<double>(n) + 1.0);
        acc += populations[n] * std::exp(-gamma * s * t) * std::cos(omega01 * s * t);
    }
    const double p = 0.5 * (1.0 + acc);
    return polarity == SignalPolarity::as_printed ? p : 1.0 - p;
}

// Default scan grid: `points` samples ending after `periods` base Rabi
// periods, excluding t = 0.
inline std::vector<double> default_scan_times(double omega01, int points = 40,
                                              double periods = 3.0) {
    if (omega01 <= 0.0 || points < 2)
        throw std::invalid_argument("default_scan_times: invalid parameters");
    const double total = periods * 2.0 * std::numbers::pi / omega01;
    std::vector<double> t(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i)
        t[static_cast<size_t>(i)] = total * (i + 1) / points;
    return t;
}

inline ReadoutScan simulate_bsb_scan(const DensityMatrix& rho, Mode mode, double omega01,
                                     double gamma, const std::vector<double>& times,
                                     int shots, std::uint64_t seed,
                                     SignalPolarity polarity = SignalPolarity::as_printed) {
    if (omega01 <= 0.0) throw std::invalid_argument("simulate_bsb_scan: omega01 must be positive");
    if (gamma < 0.0) throw std::invalid_argument("simulate_bsb_scan: gamma must be nonnegative");
    if (shots < 0) throw std::invalid_argument("simulate_bsb_scan: shots must be nonnegative");
    detail::check_times(times);
    rho.validate();
    const int block = rho.space.d_x * rho.space.d_y;
    double up_pop = 0.0;
    for (int i = block; i < rho.space.dim(); ++i) up_pop += rho.rho(i, i).real();
    if (up_pop > 1e-9)
        throw std::invalid_argument("simulate_bsb_scan: density matrix must be spin-reset first");

    const std::vector<double> pops = motional_populations(rho, mode);
    ReadoutScan scan;
    scan.mode = mode;
    scan.times = times;
    scan.shots = shots;
    scan.seed = seed;
    scan.omega01 = omega01;
    scan.gamma = gamma;
    scan.polarity = polarity;
    scan.p_up.reserve(times.size());
    SampleRng rng(seed);
    for (double t : times) {
        const double p = std::clamp(scan_signal(pops, omega01, gamma, t, polarity), 0.0, 1.0);
        scan.p_up.push_back(shots == 0 ? p : static_cast<double>(rng.binomial(shots, p)) / shots);
    }
    return scan;
}

struct PopulationFit {
    std::vector<double> populations;  // P_0 .. P_nmax
    double residual_rms = 0.0;
    double condition_number = 0.0;
    double omega01 = 0.0;
    double gamma = 0.0;
    std::vector<std::string> warnings;
};

inline PopulationFit fit_populations(const ReadoutScan& scan, double omega01, double gamma,
                                     int n_max) {
    if (n_max < 0) throw std::invalid_argument("fit_populations: n_max must be nonnegative");
    if (scan.times.empty() || scan.times.size() != scan.p_up.size())
        throw std::invalid_argument("fit_populations: scan is empty or inconsistent");
    const int rows = static_cast<int>(scan.times.size());
    const int cols = n_max + 1;

    Eigen::MatrixXd M(rows, cols);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
        const double t = scan.times[static_cast<size_t>(i)];
        for (int n = 0; n < cols; ++n) {
            const double s = std::sqrt(n + 1.0);
            M(i, n) = 0.5 * std::exp(-gamma * s * t) * std::cos(omega01 * s * t);
        }
        const double p = scan.p_up[static_cast<size_t>(i)];
        y[i] = scan.polarity == SignalPolarity::as_printed ? p - 0.5 : 0.5 - p;
    }

    PopulationFit fit;
    fit.omega01 = omega01;
    fit.gamma = gamma;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double smin = svd.singularValues().minCoeff();
    fit.condition_number = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                                      : std::numeric_limits<double>::infinity();
    if (fit.condition_number > 1e6)
        fit.warnings.push_back("ill-conditioned design matrix, condition number " +
                               std::to_string(fit.condition_number));

    const Eigen::VectorXd x = nnls_capped_sum(M, y, 1.0);
    fit.populations.assign(x.data(), x.data() + x.size());
    fit.residual_rms = (M * x - y).norm() / std::sqrt(static_cast<double>(rows));
    return fit;
}

// Smallest n with cumulative population above 0.999 (capped by truncation).
inline int default_fit_n_max(const std::vector<double>& populations) {
    double acc = 0.0;
    for (size_t n = 0; n < populations.size(); ++n) {
        acc += populations[n];
        if (acc > 0.999) return static_cast<int>(n);
    }
    return static_cast<int>(populations.size()) - 1;
}

// ---------------------------------------------------------------------------
// Damped-cos^2 Rabi fits and the frequency-ratio report
// ---------------------------------------------------------------------------

struct RabiFit {
    double omega = 0.0;   // fitted W in cos^2(W t)
    double gamma = 0.0;
    bool converged = false;
    double rms = 0.0;
};

// Levenberg-Marquardt fit of p(t) ~ e^{-gamma t} cos^2(omega t).
inline RabiFit fit_damped_cos2(const std::vector<double>& times, const std::vector<double>& p,
                               double omega_init, double gamma_init) {
    if (times.size() != p.size() || times.size() < 3)
        throw std::invalid_argument("fit_damped_cos2: need at least 3 samples");
    const int m = static_cast<int>(times.size());

    const auto residuals = [&](double w, double g, Eigen::VectorXd& r) {
        for (int i = 0; i < m; ++i) {
            const double t = times[static_cast<size_t>(i)];
            const double c = std::cos(w * t);
            r[i] = std::exp(-g * t) * c * c - p[static_cast<size_t>(i)];
        }
    };

    double w = omega_init, g = std::max(0.0, gamma_init);
    Eigen::VectorXd r(m), rt(m);
    residuals(w, g, r);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < 200; ++iter) {
        Eigen::MatrixXd J(m, 2);
        for (int i = 0; i < m; ++i) {
            const double t = times[static_cast<size_t>(i)];
            const double e = std::exp(-g * t);
            J(i, 0) = -e * t * std::sin(2.0 * w * t);  // d/dw of e^{-gt} cos^2(wt)
            J(i, 1) = -t * e * std::cos(w * t) * std::cos(w * t);
        }
        const Eigen::Matrix2d JtJ = J.transpose() * J;
        const Eigen::Vector2d Jtr = J.transpose() * r;
        Eigen::Matrix2d A = JtJ;
        A(0, 0) += lambda * std::max(JtJ(0, 0), 1e-30);
        A(1, 1) += lambda * std::max(JtJ(1, 1), 1e-30);
        Eigen::Vector2d step = A.ldlt().solve(-Jtr);
        if (!step.allFinite()) break;
        if (g == 0.0 && step[1] < 0.0) {
            // gamma is pinned at its lower bound and the joint step pushes
            // further negative; drop that direction and move in w only.
            step[0] = -Jtr[0] / A(0, 0);
            step[1] = 0.0;
        }
        const double w_try = w + step[0];
        const double g_try = std::max(0.0, g + step[1]);
        residuals(w_try, g_try, rt);
        const double cost_try = rt.squaredNorm();
        if (cost_try < cost) {
            const double rel = std::abs(cost - cost_try) / std::max(cost, 1e-300);
            w = w_try;
            g = g_try;
            r = rt;
            cost = cost_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-12 || step.norm() < 1e-9 * std::max(1.0, std::abs(w))) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                // No descent direction even under maximal damping: the fit is
                // at a numerical local minimum (typically the shot-noise floor).
                converged = true;
                break;
            }
        }
    }

    RabiFit fit;
    fit.omega = std::abs(w);
    fit.gamma = g;
    fit.converged = converged || cost < 1e-20;
    fit.rms = std::sqrt(cost / m);
    return fit;
}

struct RabiRatioReport {
    std::vector<RabiFit> fits;        // index = prepared Fock level n
    std::vector<double> ratios;       // fitted omega_n / omega_0
    std::vector<double> expected;     // sqrt(n+1)
    double max_rel_error = 0.0;
    std::vector<std::string> warnings;
};

// One scan per prepared Fock state n = 0..N, each fitted to the damped cos^2
// model; ratios are relative to the n = 0 fit.
inline RabiRatioReport rabi_ratio_report(const std::vector<ReadoutScan>& scans) {
    if (scans.empty())
        throw std::invalid_argument("rabi_ratio_report: need at least one scan");
    RabiRatioReport rep;
    for (size_t n = 0; n < scans.size(); ++n) {
        const ReadoutScan& scan = scans[n];
        if (scan.omega01 <= 0.0)
            throw std::invalid_argument("rabi_ratio_report: scan lacks omega01 metadata");
        // cos^2(Wt) oscillates at 2W; the scan model oscillates at
        // Omega01 sqrt(n+1), so the expected fit is W = Omega01 sqrt(n+1)/2.
        const double w0 = 0.5 * scan.omega01 * std::sqrt(static_cast<double>(n) + 1.0);
        std::vector<double> signal = scan.p_up;
        if (scan.polarity == SignalPolarity::complemented)
            for (double& v : signal) v = 1.0 - v;
        RabiFit fit = fit_damped_cos2(scan.times, signal, w0, scan.gamma);
        if (!fit.converged)
            rep.warnings.push_back("fit for n = " + std::to_string(n) + " did not converge");
        rep.fits.push_back(fit);
    }
    const double base = rep.fits.front().omega;
    if (base <= 0.0)
        throw std::runtime_error("rabi_ratio_report: base frequency fit collapsed to zero");
    for (size_t n = 0; n < rep.fits.size(); ++n) {
        const double ratio = rep.fits[n].omega / base;
        const double want = std::sqrt(static_cast<double>(n) + 1.0);
        rep.ratios.push_back(ratio);
        rep.expected.push_back(want);
        rep.max_rel_error = std::max(rep.max_rel_error, std::abs(ratio - want) / want);
    }
    return rep;
}

}  // namespace paraosc
