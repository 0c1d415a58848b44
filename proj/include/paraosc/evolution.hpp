#pragma once

// Closed-system time evolution with observable recording.
//
// Method selection follows the size of the problem: matrix_exponential uses a
// cached dense propagator per distinct time gap up to dense_dim_limit and a
// Lanczos propagator above it; ode_rk is a fixed-step RK4 whose step keeps
// ||H|| * h <= 0.005 so the norm budget (1e-9 over a full run) holds without
// renormalization.

#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hamiltonian.hpp"
#include "numeric.hpp"

namespace paraosc {

enum class EvolveMethod { matrix_exponential, ode_rk };

inline const char* to_string(EvolveMethod m) {
    return m == EvolveMethod::matrix_exponential ? "matrix_exponential" : "ode_rk";
}

struct EvolveOptions {
    std::optional<ParaModel> model;   // enables the para-number column
    double max_step = 0.0;            // seconds; 0 selects the automatic step
    bool record_snapshots = false;
    bool strict_leakage = false;      // escalate the leakage warning to an error
    double leakage_threshold = 1e-4;  // population allowed in the top two levels
    int krylov_dim = 40;
    int dense_dim_limit = 512;
};

struct Trajectory {
    SpaceSpec space;
    std::vector<double> times;
    std::vector<double> p_up;
    std::vector<double> n_x;
    std::vector<double> n_y;
    std::vector<double> n_para;       // zeros when no model was supplied
    std::vector<double> leakage;      // population of the top two Fock levels
    bool has_n_para = false;
    double max_leakage = 0.0;
    std::vector<std::string> warnings;
    std::vector<Vec> state_snapshots;
    std::vector<DenseMat> density_snapshots;

    size_t size() const { return times.size(); }
};

namespace detail {

struct ObservableContext {
    SpaceSpec space;
    std::optional<ParaModel> model;
    Eigen::VectorXd nx_diag, ny_diag;
    std::vector<char> up_mask, leak_mask;

    explicit ObservableContext(const SpaceSpec& s, std::optional<ParaModel> m)
        : space(s), model(m), nx_diag(s.dim()), ny_diag(s.dim()),
          up_mask(static_cast<size_t>(s.dim())), leak_mask(static_cast<size_t>(s.dim())) {
        for (int i = 0; i < s.dim(); ++i) {
            const BasisLabel l = s.label(i);
            nx_diag[i] = l.n_x;
            ny_diag[i] = l.n_y;
            up_mask[static_cast<size_t>(i)] = l.spin == Spin::up;
            leak_mask[static_cast<size_t>(i)] =
                l.n_x >= s.d_x - 2 || l.n_y >= s.d_y - 2;
        }
    }

    double para_number_of(double nx, double ny) const {
        if (!model) return 0.0;
        const double half = 0.5 * model->order;
        return model->kind == ParaKind::para_fermi ? nx - ny + half
                                                   : nx + ny + 1.0 - half;
    }

    void record_weights(Trajectory& tr, double t, const Eigen::VectorXd& w) const {
        double pu = 0.0, nx = 0.0, ny = 0.0, leak = 0.0;
        for (int i = 0; i < space.dim(); ++i) {
            const double wi = w[i];
            if (up_mask[static_cast<size_t>(i)]) pu += wi;
            nx += nx_diag[i] * wi;
            ny += ny_diag[i] * wi;
            if (leak_mask[static_cast<size_t>(i)]) leak += wi;
        }
        tr.times.push_back(t);
        tr.p_up.push_back(pu);
        tr.n_x.push_back(nx);
        tr.n_y.push_back(ny);
        tr.n_para.push_back(para_number_of(nx, ny));
        tr.leakage.push_back(leak);
        tr.max_leakage = std::max(tr.max_leakage, leak);
    }

    void record_state(Trajectory& tr, double t, const Vec& psi) const {
        record_weights(tr, t, psi.cwiseAbs2());
    }

    void record_density(Trajectory& tr, double t, const DenseMat& rho) const {
        record_weights(tr, t, rho.diagonal().real());
    }
};

inline void note_once(Trajectory& tr, const std::string& prefix, const std::string& msg) {
    for (const std::string& w : tr.warnings)
        if (w.rfind(prefix, 0) == 0) return;
    tr.warnings.push_back(msg);
}

inline void check_budgets(Trajectory& tr, double t, double norm_error, double leak,
                          const EvolveOptions& opt) {
    if (norm_error > 1e-6)
        throw std::runtime_error("evolution: norm drift " + std::to_string(norm_error) +
                                 " exceeds budget at t = " + std::to_string(t));
    if (norm_error > 1e-9)
        note_once(tr, "norm drift", "norm drift above 1e-9 at t = " + std::to_string(t));
    if (leak > opt.leakage_threshold) {
        if (opt.strict_leakage)
            throw std::runtime_error("evolution: truncation leakage " + std::to_string(leak) +
                                     " above threshold at t = " + std::to_string(t));
        note_once(tr, "truncation leakage",
                  "truncation leakage above " + std::to_string(opt.leakage_threshold) +
                      " at t = " + std::to_string(t));
    }
}

inline uint64_t double_key(double x) {
    uint64_t k;
    std::memcpy(&k, &x, sizeof k);
    return k;
}

}  // namespace detail

inline Trajectory evolve_unitary(const Operator& H, const StateVector& psi0,
                                 const std::vector<double>& times,
                                 EvolveMethod method = EvolveMethod::matrix_exponential,
                                 const EvolveOptions& opt = {}) {
    require_same_space(H.space(), psi0.space, "evolve_unitary");
    const double hnorm = H.inf_norm();
    if (!H.is_hermitian(1e-12 * std::max(1.0, hnorm)))
        throw std::invalid_argument("evolve_unitary: Hamiltonian is not Hermitian");
    if (std::abs(psi0.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("evolve_unitary: initial state is not normalized");
    detail::check_times(times);

    const detail::ObservableContext ctx(H.space(), opt.model);
    Trajectory tr;
    tr.space = H.space();
    tr.has_n_para = opt.model.has_value();

    const bool dense_path = method == EvolveMethod::matrix_exponential &&
                            H.dim() <= opt.dense_dim_limit;
    DenseMat Hd;
    if (dense_path) Hd = H.dense();
    std::map<uint64_t, DenseMat> propagators;

    double rk_step = opt.max_step;
    if (method == EvolveMethod::ode_rk) {
        const double auto_step = hnorm > 0.0 ? 0.005 / hnorm
                                             : std::numeric_limits<double>::infinity();
        rk_step = opt.max_step > 0.0 ? std::min(opt.max_step, auto_step) : auto_step;
    }

    Vec psi = psi0.amplitudes;
    double t_now = 0.0;
    for (double t : times) {
        const double gap = t - t_now;
        if (gap > 0.0) {
            if (method == EvolveMethod::matrix_exponential) {
                if (dense_path) {
                    const uint64_t key = detail::double_key(gap);
                    auto it = propagators.find(key);
                    if (it == propagators.end()) {
                        DenseMat U = expm(DenseMat(Cx(0.0, -gap) * Hd));
                        it = propagators.emplace(key, std::move(U)).first;
                    }
                    psi = it->second * psi;
                } else {
                    psi = krylov_propagate(H.matrix(), psi, gap, opt.krylov_dim);
                }
            } else {
                const int n = std::isfinite(rk_step) ? substep_count(gap, rk_step) : 1;
                const SparseMat& Hm = H.matrix();
                psi = rk4_integrate(psi, t_now, t, n, [&Hm](double, const Vec& y) {
                    return Vec(Cx(0.0, -1.0) * (Hm * y));
                });
            }
            t_now = t;
        }
        ctx.record_state(tr, t, psi);
        if (opt.record_snapshots) tr.state_snapshots.push_back(psi);
        detail::check_budgets(tr, t, std::abs(psi.norm() - 1.0), tr.leakage.back(), opt);
    }
    return tr;
}

// Coupling-uncertainty bounds: evolve the para_driven model at
// g_pm = (omega_r + omega_b)/2 +- |omega_r - omega_b|/2 from the same state.
inline std::pair<Trajectory, Trajectory> anisotropy_envelope(
    const SpaceSpec& space, const ParaModel& model, const StateVector& psi0,
    const std::vector<double>& times, double omega_r, double omega_b,
    EvolveMethod method = EvolveMethod::matrix_exponential, const EvolveOptions& opt = {}) {
    if (omega_r <= 0.0 || omega_b <= 0.0)
        throw std::invalid_argument("anisotropy_envelope: sideband frequencies must be positive");
    const double mean = 0.5 * (omega_r + omega_b);
    const double delta = 0.5 * std::abs(omega_r - omega_b);
    EvolveOptions o = opt;
    o.model = model;
    HamiltonianSpec hs;
    hs.form = HamiltonianForm::para_driven;
    hs.model = model;
    hs.coupling = mean + delta;
    Trajectory hi = evolve_unitary(build_hamiltonian(space, hs), psi0, times, method, o);
    hs.coupling = mean - delta;
    Trajectory lo = evolve_unitary(build_hamiltonian(space, hs), psi0, times, method, o);
    return {std::move(hi), std::move(lo)};
}

}  // namespace paraosc
