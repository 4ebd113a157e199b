#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nrb/liouvillian.hpp"

using namespace nrb;
using Catch::Matchers::WithinAbs;

namespace {

ModelParams quiet_params() {
    ModelParams p;
    p.delta_ad = 0.0;
    p.delta_sigma_a = 0.0;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.0;
    p.lambda_ab = 0.0;
    p.lambda_am = 0.0;
    p.lambda_a_sigma = 0.0;
    p.xi = 0.0;
    p.gamma = 0.0;
    p.set_kappa(0.0);
    return p;
}

// dense master-equation right-hand side computed the straightforward way
MatrixXc dense_rhs(const Operator& H, const std::vector<CollapseChannel>& chs,
                   const MatrixXc& rho) {
    complexd mi(0.0, -1.0);
    MatrixXc out = mi * (H.matrix * rho - rho * H.matrix);
    for (const auto& ch : chs) {
        const MatrixXc& c = ch.op.matrix;
        MatrixXc cd = c.adjoint();
        out += ch.rate * (c * rho * cd - 0.5 * (cd * c * rho + rho * cd * c));
    }
    return out;
}

} // namespace

TEST_CASE("vectorize uses column stacking") {
    MatrixXc rho(2, 2);
    rho << complexd(1, 0), complexd(5, 6), complexd(3, 4), complexd(2, 0);
    VectorXc v = vectorize(rho);
    // vec(rho)[i + j*d] = rho(i, j)
    CHECK(v(0) == rho(0, 0));
    CHECK(v(1) == rho(1, 0));
    CHECK(v(2) == rho(0, 1));
    CHECK(v(3) == rho(1, 1));
    CHECK((unvectorize(v, 2) - rho).norm() == 0.0);
    CHECK_THROWS_AS(unvectorize(v, 3), InvalidArgument);
}

TEST_CASE("superoperator action equals the dense master-equation rhs") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p;
    p.delta_ad = 1.3;
    p.delta_sigma_a = -3.1;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.025;
    p.lambda_ab = 0.022;
    p.lambda_am = 0.022;
    p.lambda_a_sigma = 0.3;
    p.xi = 0.8;
    p.gamma = 0.001;
    p.set_kappa(0.008);

    Operator H = build_hamiltonian(p, sp);
    auto chs = collapse_channels(p, sp);
    REQUIRE(chs.size() == 4);
    Liouvillian L = build_liouvillian(H, chs);

    // random Hermitian trace-one matrix
    const Eigen::Index d = sp.dimension();
    MatrixXc A = MatrixXc::Random(d, d);
    MatrixXc rho = (A + A.adjoint()) / 2.0;
    rho /= rho.trace();

    MatrixXc via_super = L.apply(rho);
    MatrixXc direct = dense_rhs(H, chs, rho);
    CHECK((via_super - direct).norm() < 1e-12 * std::max(1.0, direct.norm()));

    // the generator annihilates traces: Tr[L rho] = 0 for any rho
    CHECK(std::abs(via_super.trace()) < 1e-12);
}

TEST_CASE("build_liouvillian rejects bad inputs") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    MatrixXc bad = MatrixXc::Zero(sp.dimension(), sp.dimension());
    bad(0, 1) = complexd(1.0, 0.0); // not Hermitian
    CHECK_THROWS_AS(build_liouvillian(Operator(sp, bad), {}), InvalidArgument);

    Operator H = number_operator(sp, Subsystem::photon);
    CollapseChannel neg{"photon", mode_annihilator(sp, Subsystem::photon), -0.1};
    CHECK_THROWS_AS(build_liouvillian(H, {neg}), InvalidArgument);

    SpaceDescriptor other = build_space(2, 1, 1);
    CollapseChannel mismatch{"photon", mode_annihilator(other, Subsystem::photon), 0.1};
    CHECK_THROWS_AS(build_liouvillian(H, {mismatch}), InvalidArgument);
}

TEST_CASE("driven damped cavity has the known coherent steady state") {
    // single relevant mode: photon cutoff 6, the other subsystems idle in
    // their ground states; every decoupled subsystem needs its own decay or
    // its populations are degenerate
    SpaceDescriptor sp = build_space(6, 1, 1);
    const double delta = 0.3, kappa = 0.2, drive = 0.05;
    Operator a = mode_annihilator(sp, Subsystem::photon);
    Operator H = complexd(delta) * number_operator(sp, Subsystem::photon) +
                 complexd(drive) * (a + a.dagger());
    Liouvillian L = build_liouvillian(
        H, {{"photon", a, kappa},
            {"phonon", mode_annihilator(sp, Subsystem::phonon), 0.1},
            {"magnon", mode_annihilator(sp, Subsystem::magnon), 0.1},
            {"atom", atom_lowering(sp), 0.1}});
    DensityMatrix rho = steady_state(L);

    complexd expected = -drive / complexd(delta, -kappa / 2.0);
    complexd got = expectation(rho, a);
    CHECK(std::abs(got - expected) < 1e-9);
    CHECK_THAT(std::abs(rho.trace() - complexd(1.0)), WithinAbs(0.0, 1e-12));
    CHECK(rho.min_eigenvalue() > -1e-12);
    CHECK(rho.hermiticity_defect() < 1e-12);

    // occupation of a coherent state equals |amplitude|^2
    complexd n = expectation(rho, number_operator(sp, Subsystem::photon));
    CHECK_THAT(n.real(), WithinAbs(std::norm(expected), 1e-9));
}

TEST_CASE("undriven damped cavity relaxes to vacuum") {
    SpaceDescriptor sp = build_space(3, 1, 1);
    ModelParams p = quiet_params();
    p.set_kappa(0.1); // every mode must relax, else idle populations are degenerate
    p.gamma = 0.05;   // and the atom likewise
    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    DensityMatrix rho = steady_state(L);
    StateVector vac = basis_state(sp, {0, 0, 0, 0});
    CHECK_THAT(std::abs(expectation(rho, number_operator(sp, Subsystem::photon))),
               WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(rho.matrix(sp.index({0, 0, 0, 0}), sp.index({0, 0, 0, 0})) - complexd(1.0)),
               WithinAbs(0.0, 1e-12));
    (void)vac;
}

TEST_CASE("degenerate stationary manifolds are detected") {
    // photon decay only; the atom, phonon, and magnon sectors have no dynamics
    // at all, so every mixture of their populations is stationary
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p = quiet_params();
    p.kappa_a = 0.1;
    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    CHECK_THROWS_AS(steady_state(L), NonUniqueSteadyState);
}

TEST_CASE("closed evolution reproduces bare Rabi oscillations") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p = quiet_params();
    p.xi = 0.37;
    Operator H = build_hamiltonian(p, sp);
    StateVector g = basis_state(sp, {0, 0, 0, 0});

    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(0.25 * i);
    EvolutionRecord rec = evolve_closed(g, H, times, default_observables(sp));

    for (size_t i = 0; i < times.size(); ++i) {
        double expected = std::pow(std::sin(p.xi * times[i]), 2);
        CHECK_THAT(rec.observables.at("p_e")[i].real(), WithinAbs(expected, 1e-12));
        CHECK_THAT(rec.pure_states[i].norm(), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("closed evolution input validation") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p = quiet_params();
    Operator H = build_hamiltonian(p, sp);
    StateVector g = basis_state(sp, {0, 0, 0, 0});
    CHECK_THROWS_AS(evolve_closed(g, H, {}), InvalidArgument);
    CHECK_THROWS_AS(evolve_closed(g, H, {1.0, 0.5}), InvalidArgument);

    SpaceDescriptor other = build_space(2, 1, 1);
    StateVector mismatched = basis_state(other, {0, 0, 0, 0});
    CHECK_THROWS_AS(evolve_closed(mismatched, H, {0.0}), InvalidArgument);
}

TEST_CASE("open evolution reproduces exponential photon decay") {
    SpaceDescriptor sp = build_space(2, 1, 1);
    ModelParams p = quiet_params();
    p.kappa_a = 0.35;
    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));

    DensityMatrix rho0 = DensityMatrix::from_pure(basis_state(sp, {0, 1, 0, 0}));
    std::vector<double> times = {0.0, 1.0, 3.0, 7.0};
    EvolutionRecord rec = evolve_open(rho0, L, times, default_observables(sp));

    for (size_t i = 0; i < times.size(); ++i) {
        double expected = std::exp(-p.kappa_a * times[i]);
        CHECK_THAT(rec.observables.at("n_a")[i].real(), WithinAbs(expected, 1e-7));
        CHECK_THAT(std::abs(rec.mixed_states[i].trace() - complexd(1.0)), WithinAbs(0.0, 1e-7));
        CHECK(rec.mixed_states[i].min_eigenvalue() > -1e-8);
        CHECK(rec.mixed_states[i].hermiticity_defect() < 1e-12);
    }
}

TEST_CASE("open evolution with zero dissipation matches closed evolution") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p;
    p.delta_ad = 1.3;
    p.delta_sigma_a = -3.1;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.025;
    p.lambda_ab = 0.022;
    p.lambda_am = 0.022;
    p.lambda_a_sigma = 0.3;
    p.xi = 0.8;
    p.gamma = 0.0;
    p.set_kappa(0.0);

    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    StateVector psi0 = basis_state(sp, {1, 0, 0, 0});
    std::vector<double> times = {0.0, 2.0, 5.0};

    EvolutionRecord closed = evolve_closed(psi0, H, times, default_observables(sp));
    EvolutionRecord open =
        evolve_open(DensityMatrix::from_pure(psi0), L, times, default_observables(sp));

    for (size_t i = 0; i < times.size(); ++i)
        for (const auto* key : {"n_a", "n_b", "n_m", "p_e"})
            CHECK_THAT(open.observables.at(key)[i].real(),
                       WithinAbs(closed.observables.at(key)[i].real(), 1e-6));
}

TEST_CASE("steady state of the operating point is physical") {
    SpaceDescriptor sp = build_space(2, 1, 1);
    ModelParams p;
    p.delta_ad = 1.319;
    p.delta_sigma_a = -3.1;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.025;
    p.lambda_ab = 0.022;
    p.lambda_am = 0.022;
    p.lambda_a_sigma = 0.3;
    p.xi = 0.8;
    p.gamma = 0.001;
    p.set_kappa(0.008);

    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    DensityMatrix rho = steady_state(L);
    CHECK_THAT(std::abs(rho.trace() - complexd(1.0)), WithinAbs(0.0, 1e-12));
    CHECK(rho.hermiticity_defect() < 1e-12);
    CHECK(rho.min_eigenvalue() > -1e-10);
    double res = (L.generator * vectorize(rho.matrix)).norm();
    CHECK(res < 1e-10);
    // the drive keeps the atom partly excited
    CHECK(expectation(rho, number_operator(sp, Subsystem::atom)).real() > 0.05);
}
