#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace paraosc;
using Catch::Approx;

namespace {

Operator para_driven(const SpaceSpec& space, const ParaModel& m, double g) {
    HamiltonianSpec hs;
    hs.form = HamiltonianForm::para_driven;
    hs.model = m;
    hs.coupling = g;
    return build_hamiltonian(space, hs);
}

}  // namespace

TEST_CASE("master equation without noise reproduces the unitary observables") {
    const SpaceSpec space = make_space(4, 4);
    const ParaModel m = make_model(ParaKind::para_fermi, 2);
    const Operator H = para_driven(space, m, 1.0);
    const StateVector psi0 = vacuum_state(space, m);
    const std::vector<double> times = testutil::linspace(0.0, 3.0, 31);

    EvolveOptions opt;
    opt.model = m;
    const Trajectory uni =
        evolve_unitary(H, psi0, times, EvolveMethod::matrix_exponential, opt);
    const Trajectory mas =
        evolve_master(H, DensityMatrix::from_state(psi0), times, NoiseSpec{}, opt);

    REQUIRE(testutil::max_abs_diff(uni.p_up, mas.p_up) < 1e-6);
    REQUIRE(testutil::max_abs_diff(uni.n_x, mas.n_x) < 1e-6);
    REQUIRE(testutil::max_abs_diff(uni.n_y, mas.n_y) < 1e-6);
}

TEST_CASE("free heating from vacuum grows at the configured rate") {
    const SpaceSpec space = make_space(14, 4);
    const Operator H = Operator::zero(space);
    const DensityMatrix rho0 =
        DensityMatrix::from_state(basis_state(space, Spin::down, 0, 0));
    const std::vector<double> times = testutil::linspace(0.0, 1e-3, 21);

    NoiseSpec noise;
    noise.enabled = true;
    noise.heating_rate_x = 70.0;

    EvolveOptions opt;
    opt.record_snapshots = true;
    const Trajectory tr = evolve_master(H, rho0, times, noise, opt);

    // in the high-temperature limit d<n>/dt is the heating rate exactly
    const double slope = testutil::fit_slope(tr.times, tr.n_x);
    REQUIRE(slope == Approx(70.0).epsilon(0.02));
    REQUIRE(slope == Approx(70.0).epsilon(1e-3));  // actual accuracy is much tighter
    REQUIRE(vacuum_heating_slope(noise, Mode::x) == 70.0);
    REQUIRE(testutil::max_abs_diff(tr.n_y, std::vector<double>(tr.size(), 0.0)) < 1e-12);

    // physicality invariants hold along the whole trajectory
    for (const DenseMat& rho : tr.density_snapshots) {
        const DensityMatrix snap(space, rho);
        REQUIRE(std::abs(snap.trace_real() - 1.0) < 1e-8);
        REQUIRE(snap.hermiticity_residual() < 1e-10);
        REQUIRE(snap.min_eigenvalue() > -1e-8);
    }
}

TEST_CASE("finite thermal occupation bends the growth toward n_th") {
    const SpaceSpec space = make_space(14, 4);
    const Operator H = Operator::zero(space);
    const DensityMatrix rho0 =
        DensityMatrix::from_state(basis_state(space, Spin::down, 0, 0));

    NoiseSpec noise;
    noise.enabled = true;
    noise.heating_rate_x = 70.0;
    noise.n_th = 20.0;

    const Trajectory tr =
        evolve_master(H, rho0, testutil::linspace(0.0, 1e-3, 11), noise, {});
    // closed form: n(t) = n_th (1 - exp(-r t / n_th))
    const double want = 20.0 * (1.0 - std::exp(-70.0 * 1e-3 / 20.0));
    REQUIRE(tr.n_x.back() == Approx(want).epsilon(1e-6));
    // still within the 2% slope budget over the first millisecond
    REQUIRE(testutil::fit_slope(tr.times, tr.n_x) == Approx(70.0).epsilon(0.02));
}

TEST_CASE("both modes heat independently at their own rates") {
    const SpaceSpec space = make_space(10, 10);
    const Operator H = Operator::zero(space);
    const DensityMatrix rho0 =
        DensityMatrix::from_state(basis_state(space, Spin::down, 0, 0));

    NoiseSpec noise;
    noise.enabled = true;
    noise.heating_rate_x = 70.0;
    noise.heating_rate_y = 30.0;

    const Trajectory tr =
        evolve_master(H, rho0, testutil::linspace(0.0, 1e-3, 11), noise, {});
    REQUIRE(testutil::fit_slope(tr.times, tr.n_x) == Approx(70.0).epsilon(0.02));
    REQUIRE(testutil::fit_slope(tr.times, tr.n_y) == Approx(30.0).epsilon(0.02));
}

TEST_CASE("heating on top of coherent dynamics stays physical") {
    const SpaceSpec space = make_space(6, 6);
    const ParaModel m = make_model(ParaKind::para_fermi, 2);
    const Operator H = para_driven(space, m, 2.0 * std::numbers::pi * 1e3);

    NoiseSpec noise;
    noise.enabled = true;
    noise.heating_rate_x = 70.0;
    noise.heating_rate_y = 70.0;

    EvolveOptions opt;
    opt.model = m;
    opt.record_snapshots = true;
    const Trajectory tr = evolve_master(H, DensityMatrix::from_state(vacuum_state(space, m)),
                                        testutil::linspace(0.0, 1e-3, 11), noise, opt);
    for (size_t i = 0; i < tr.size(); ++i) {
        REQUIRE(tr.p_up[i] >= -1e-10);
        REQUIRE(tr.p_up[i] <= 1.0 + 1e-10);
    }
    for (const DenseMat& rho : tr.density_snapshots) {
        const DensityMatrix snap(space, rho);
        REQUIRE(std::abs(snap.trace_real() - 1.0) < 1e-8);
        REQUIRE(snap.min_eigenvalue() > -1e-8);
    }
}

TEST_CASE("master-equation input validation") {
    const SpaceSpec space = make_space(3, 3);
    const Operator a = mode_op(space, Mode::x, LadderDir::lower);
    const Operator H = a + a.adjoint();
    const DensityMatrix good =
        DensityMatrix::from_state(basis_state(space, Spin::down, 0, 0));

    REQUIRE_THROWS_AS(evolve_master(a, good, {0.1}, NoiseSpec{}), std::invalid_argument);

    DensityMatrix bad(space, 2.0 * good.rho);
    REQUIRE_THROWS_AS(evolve_master(H, bad, {0.1}, NoiseSpec{}), std::invalid_argument);

    NoiseSpec negative;
    negative.enabled = true;
    negative.heating_rate_x = -1.0;
    REQUIRE_THROWS_AS(evolve_master(H, good, {0.1}, negative), std::invalid_argument);

    NoiseSpec bad_nth;
    bad_nth.enabled = true;
    bad_nth.heating_rate_x = 1.0;
    bad_nth.n_th = 0.0;
    REQUIRE_THROWS_AS(evolve_master(H, good, {0.1}, bad_nth), std::invalid_argument);
}

TEST_CASE("heating leakage warnings mirror the unitary semantics") {
    const SpaceSpec space = make_space(4, 2);
    const Operator H = Operator::zero(space);
    const DensityMatrix rho0 =
        DensityMatrix::from_state(basis_state(space, Spin::down, 0, 0));

    NoiseSpec noise;
    noise.enabled = true;
    noise.heating_rate_x = 5e3;  // drives population into the top levels fast

    EvolveOptions opt;
    const Trajectory tr =
        evolve_master(H, rho0, testutil::linspace(0.0, 1e-3, 6), noise, opt);
    REQUIRE(tr.max_leakage > opt.leakage_threshold);
    REQUIRE_FALSE(tr.warnings.empty());

    EvolveOptions strict = opt;
    strict.strict_leakage = true;
    REQUIRE_THROWS_AS(
        evolve_master(H, rho0, testutil::linspace(0.0, 1e-3, 6), noise, strict),
        std::runtime_error);
}
