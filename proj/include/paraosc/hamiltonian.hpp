#pragma once

// Hamiltonian builders (hbar = 1 throughout) and the Lamb-Dicke helper.
//
// Forms:
//   para_driven   H = (g/2)(A + A^dag) for a chosen para model
//   sideband      H = (eta Omega / 2)(a_j s_- e^{i phi} + a_j^dag s_+ e^{-i phi})   [blue]
//                 H = (eta Omega / 2)(a_j s_+ e^{i phi} + a_j^dag s_- e^{-i phi})   [red]
//   ion_pF        red on x + red on y (both phi = 0): matches para_driven for
//                 the para-Fermi model when eta Omega = sqrt(2) g on both modes
//   ion_pB        blue on x (phi = 0) + red on y (phi = pi), same strength rule

#include <cmath>
#include <numbers>
#include <optional>

#include "paraalgebra.hpp"

namespace paraosc {

enum class HamiltonianForm { para_driven, ion_pF, ion_pB, sideband };
enum class SidebandColor { red, blue };

struct SidebandParams {
    Mode mode = Mode::x;
    SidebandColor color = SidebandColor::blue;
    double phase = 0.0;  // radians
};

struct HamiltonianSpec {
    HamiltonianForm form = HamiltonianForm::para_driven;
    double coupling = 0.0;                  // g for para_driven; eta*Omega for ion/sideband
    std::optional<ParaModel> model;         // required by para_driven
    std::optional<SidebandParams> sideband; // required by sideband
};

inline Operator sideband_hamiltonian(const SpaceSpec& space, Mode mode, SidebandColor color,
                                     double eta_omega, double phase) {
    const Operator a = mode_op(space, mode, LadderDir::lower);
    const Operator sp = spin_op(space, SpinOp::plus);
    const Operator sm = spin_op(space, SpinOp::minus);
    const Cx eip = std::exp(Cx(0.0, phase));
    const Operator half = color == SidebandColor::blue ? (eip * (a * sm)) : (eip * (a * sp));
    return (0.5 * eta_omega) * (half + half.adjoint());
}

inline Operator build_hamiltonian(const SpaceSpec& space, const HamiltonianSpec& spec) {
    using std::numbers::pi;
    switch (spec.form) {
        case HamiltonianForm::para_driven: {
            if (!spec.model)
                throw std::invalid_argument("build_hamiltonian: para_driven needs a para model");
            const Operator A = para_lowering(space, *spec.model);
            return (0.5 * spec.coupling) * (A + A.adjoint());
        }
        case HamiltonianForm::sideband: {
            if (!spec.sideband)
                throw std::invalid_argument("build_hamiltonian: sideband needs sideband parameters");
            const SidebandParams& sb = *spec.sideband;
            return sideband_hamiltonian(space, sb.mode, sb.color, spec.coupling, sb.phase);
        }
        case HamiltonianForm::ion_pF:
            return sideband_hamiltonian(space, Mode::x, SidebandColor::red, spec.coupling, 0.0) +
                   sideband_hamiltonian(space, Mode::y, SidebandColor::red, spec.coupling, 0.0);
        case HamiltonianForm::ion_pB:
            return sideband_hamiltonian(space, Mode::x, SidebandColor::blue, spec.coupling, 0.0) +
                   sideband_hamiltonian(space, Mode::y, SidebandColor::red, spec.coupling, pi);
    }
    throw std::invalid_argument("build_hamiltonian: unknown form");
}

// Coupling conversion making ion_* reproduce para_driven(g): eta * Omega = sqrt(2) * g.
inline double ion_coupling_for_g(double g) { return std::sqrt(2.0) * g; }

namespace constants {
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double atomic_mass_kg = 1.66053906892e-27;
inline constexpr double yb171_mass_kg = 171.0 * atomic_mass_kg;
}  // namespace constants

// eta = delta_k * sqrt(hbar / (M omega)) for effective wavevector delta_k,
// ion mass M (kg) and motional angular frequency omega (rad/s).
inline double lamb_dicke(double delta_k, double mass_kg, double omega_rad_s) {
    if (mass_kg <= 0.0 || omega_rad_s <= 0.0)
        throw std::invalid_argument("lamb_dicke: mass and frequency must be positive");
    return delta_k * std::sqrt(constants::hbar / (mass_kg * omega_rad_s));
}

// Effective wavevector of two counter-propagating beams of wavelength lambda.
inline double counterpropagating_delta_k(double lambda_m) {
    if (lambda_m <= 0.0)
        throw std::invalid_argument("counterpropagating_delta_k: wavelength must be positive");
    return 2.0 * (2.0 * std::numbers::pi / lambda_m);
}

}  // namespace paraosc
