#pragma once

// Open-system evolution under motional heating, written with the factor-2
// dissipator D[O] rho = 2 O rho O^dag - O^dag O rho - rho O^dag O.
//
// The user-facing number is the heating rate r (phonons/s) per mode: the
// channel coefficients are calibrated so that d<n>/dt at vacuum equals r.
// In the n_th >> 1 limit both channels carry r/2; a finite n_th keeps the
// detailed-balance ratio (n_th + 1)/n_th on the cooling channel.

#include <optional>
#include <vector>

#include "evolution.hpp"

namespace paraosc {

struct NoiseSpec {
    bool enabled = false;
    double heating_rate_x = 0.0;          // phonons/s
    double heating_rate_y = 0.0;
    std::optional<double> n_th;           // omit for the n_th >> 1 limit

    void validate() const {
        if (heating_rate_x < 0.0 || heating_rate_y < 0.0)
            throw std::invalid_argument("NoiseSpec: heating rates must be nonnegative");
        if (n_th && *n_th <= 0.0)
            throw std::invalid_argument("NoiseSpec: n_th must be positive");
    }

    bool active() const {
        return enabled && (heating_rate_x > 0.0 || heating_rate_y > 0.0);
    }
};

namespace detail {

struct LindbladChannel {
    double coefficient;   // kappa multiplying the factor-2 dissipator
    SparseMat op;         // O
    SparseMat op_dag;     // O^dag
    SparseMat op_dag_op;  // O^dag O
};

inline std::vector<LindbladChannel> heating_channels(const SpaceSpec& space,
                                                     const NoiseSpec& noise) {
    std::vector<LindbladChannel> out;
    const double balance = noise.n_th ? (*noise.n_th + 1.0) / *noise.n_th : 1.0;
    for (Mode mode : {Mode::x, Mode::y}) {
        const double r = mode == Mode::x ? noise.heating_rate_x : noise.heating_rate_y;
        if (r <= 0.0) continue;
        const Operator a = mode_op(space, mode, LadderDir::lower);
        const Operator ad = a.adjoint();
        out.push_back({0.5 * r, ad.matrix(), a.matrix(), SparseMat(a.matrix() * ad.matrix())});
        out.push_back({0.5 * r * balance, a.matrix(), ad.matrix(),
                       SparseMat(ad.matrix() * a.matrix())});
    }
    return out;
}

}  // namespace detail

inline Trajectory evolve_master(const Operator& H, const DensityMatrix& rho0,
                                const std::vector<double>& times, const NoiseSpec& noise,
                                const EvolveOptions& opt = {}) {
    require_same_space(H.space(), rho0.space, "evolve_master");
    noise.validate();
    const double hnorm = H.inf_norm();
    if (!H.is_hermitian(1e-12 * std::max(1.0, hnorm)))
        throw std::invalid_argument("evolve_master: Hamiltonian is not Hermitian");
    rho0.validate();
    detail::check_times(times);

    const std::vector<detail::LindbladChannel> channels =
        detail::heating_channels(H.space(), noise.enabled ? noise : NoiseSpec{});

    // Dissipator rate scale for the step bound
    double rate_scale = 0.0;
    for (const auto& c : channels) {
        double row = 0.0;
        std::vector<double> sums(static_cast<size_t>(c.op_dag_op.rows()), 0.0);
        for (int k = 0; k < c.op_dag_op.outerSize(); ++k)
            for (SparseMat::InnerIterator it(c.op_dag_op, k); it; ++it)
                sums[static_cast<size_t>(it.row())] += std::abs(it.value());
        for (double s : sums) row = std::max(row, s);
        rate_scale += 2.0 * c.coefficient * row;
    }

    double step = std::numeric_limits<double>::infinity();
    if (hnorm > 0.0) step = std::min(step, 0.005 / hnorm);
    if (rate_scale > 0.0) step = std::min(step, 0.025 / rate_scale);
    if (opt.max_step > 0.0) step = std::min(step, opt.max_step);

    const SparseMat& Hm = H.matrix();
    const bool have_h = hnorm > 0.0;
    const auto rhs = [&](double, const DenseMat& rho) {
        DenseMat d = DenseMat::Zero(rho.rows(), rho.cols());
        if (have_h) d.noalias() = Cx(0.0, -1.0) * (Hm * rho - rho * Hm);
        for (const auto& c : channels) {
            d.noalias() += (2.0 * c.coefficient) * (c.op * (rho * c.op_dag));
            const DenseMat k = c.op_dag_op * rho;
            d.noalias() -= c.coefficient * k;
            d.noalias() -= c.coefficient * k.adjoint();
        }
        return d;
    };

    const detail::ObservableContext ctx(H.space(), opt.model);
    Trajectory tr;
    tr.space = H.space();
    tr.has_n_para = opt.model.has_value();

    DenseMat rho = rho0.rho;
    double t_now = 0.0;
    for (double t : times) {
        const double gap = t - t_now;
        if (gap > 0.0) {
            const int n = std::isfinite(step) ? substep_count(gap, step) : 1;
            rho = rk4_integrate(rho, t_now, t, n, rhs);
            if (!rho.allFinite())
                throw std::runtime_error("evolve_master: step-size failure, non-finite state at t = " +
                                         std::to_string(t));
            t_now = t;
        }
        ctx.record_density(tr, t, rho);
        if (opt.record_snapshots) tr.density_snapshots.push_back(rho);

        const double trace_err = std::abs(rho.trace().real() - 1.0);
        if (trace_err > 1e-6)
            throw std::runtime_error("evolve_master: trace drift " + std::to_string(trace_err) +
                                     " exceeds budget at t = " + std::to_string(t));
        if (trace_err > 1e-8)
            detail::note_once(tr, "trace drift", "trace drift above 1e-8 at t = " + std::to_string(t));
        const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-8)
            detail::note_once(tr, "hermiticity", "hermiticity residual above 1e-8 at t = " +
                                                     std::to_string(t));
        if (tr.leakage.back() > opt.leakage_threshold) {
            if (opt.strict_leakage)
                throw std::runtime_error("evolve_master: truncation leakage above threshold at t = " +
                                         std::to_string(t));
            detail::note_once(tr, "truncation leakage",
                              "truncation leakage above " + std::to_string(opt.leakage_threshold) +
                                  " at t = " + std::to_string(t));
        }
    }
    return tr;
}

// Adjoint-equation check value: with H = 0 the vacuum phonon growth rate is
// exactly the configured heating rate.
inline double vacuum_heating_slope(const NoiseSpec& noise, Mode mode) {
    return mode == Mode::x ? noise.heating_rate_x : noise.heating_rate_y;
}

}  // namespace paraosc
