#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nrb/correlations.hpp"

using namespace nrb;
using Catch::Matchers::WithinAbs;

namespace {

ModelParams operating_point() {
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
    return p;
}

// |psi> = sum_n c_n |n>_photon tensor sum_m d_m |m>_phonon, atom g, magnon 0
StateVector product_mode_state(const SpaceDescriptor& sp, const std::vector<double>& c,
                               const std::vector<double>& d) {
    VectorXc amp = VectorXc::Zero(sp.dimension());
    for (int na = 0; na < int(c.size()); ++na)
        for (int nb = 0; nb < int(d.size()); ++nb)
            amp(sp.index({0, na, nb, 0})) = c[na] * d[nb];
    StateVector psi(sp, amp);
    return psi.normalized();
}

std::vector<double> coherent_coeffs(double alpha, int n_max) {
    std::vector<double> c(n_max + 1);
    double fact = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) fact *= n;
        c[n] = std::pow(alpha, n) / std::sqrt(fact);
    }
    return c;
}

} // namespace

TEST_CASE("occupations read out basis states") {
    SpaceDescriptor sp = build_space(2, 1, 1);
    DensityMatrix rho = DensityMatrix::from_pure(basis_state(sp, {1, 2, 0, 1}));
    Occupations o = occupations(rho);
    CHECK_THAT(o.p_e, WithinAbs(1.0, 1e-14));
    CHECK_THAT(o.n_a, WithinAbs(2.0, 1e-14));
    CHECK_THAT(o.n_b, WithinAbs(0.0, 1e-14));
    CHECK_THAT(o.n_m, WithinAbs(1.0, 1e-14));
}

TEST_CASE("cross correlation is 1 for product states and 2 for pair states") {
    SpaceDescriptor sp = build_space(2, 2, 1);
    StateVector prod = product_mode_state(sp, {0.8, 0.5, 0.2}, {0.9, 0.4, 0.1});
    DensityMatrix rho_prod = DensityMatrix::from_pure(prod);
    CHECK_THAT(cross_g2_zero(rho_prod, ModePair::photon_phonon), WithinAbs(1.0, 1e-12));

    // (|00> + |11>)/sqrt(2): occupation 1/2 each, joint occupation 1/2
    VectorXc amp = VectorXc::Zero(sp.dimension());
    amp(sp.index({0, 0, 0, 0})) = 1.0 / std::sqrt(2.0);
    amp(sp.index({0, 1, 1, 0})) = 1.0 / std::sqrt(2.0);
    DensityMatrix rho_pair = DensityMatrix::from_pure(StateVector(sp, amp));
    CHECK_THAT(cross_g2_zero(rho_pair, ModePair::photon_phonon), WithinAbs(2.0, 1e-12));

    // vacuum has no occupation to normalize by
    DensityMatrix vac = DensityMatrix::from_pure(basis_state(sp, {0, 0, 0, 0}));
    CHECK_THROWS_AS(cross_g2_zero(vac, ModePair::photon_phonon), UndefinedCorrelation);
}

TEST_CASE("bundle correlation: single pair gives 0, coherent pairs give 1") {
    SpaceDescriptor sp = build_space(2, 2, 1);
    VectorXc amp = VectorXc::Zero(sp.dimension());
    amp(sp.index({0, 0, 0, 0})) = 1.0 / std::sqrt(2.0);
    amp(sp.index({0, 1, 1, 0})) = 1.0 / std::sqrt(2.0);
    DensityMatrix one_pair = DensityMatrix::from_pure(StateVector(sp, amp));
    CHECK_THAT(bundle_g2_zero(one_pair, ModePair::photon_phonon), WithinAbs(0.0, 1e-12));

    SpaceDescriptor big = build_space(5, 5, 1);
    StateVector coh =
        product_mode_state(big, coherent_coeffs(0.2, 5), coherent_coeffs(0.25, 5));
    DensityMatrix rho_coh = DensityMatrix::from_pure(coh);
    CHECK_THAT(bundle_g2_zero(rho_coh, ModePair::photon_phonon), WithinAbs(1.0, 1e-5));

    DensityMatrix vac = DensityMatrix::from_pure(basis_state(sp, {0, 0, 0, 0}));
    CHECK_THROWS_AS(bundle_g2_zero(vac, ModePair::photon_phonon), UndefinedCorrelation);
}

TEST_CASE("single-mode correlation on Fock and coherent states") {
    SpaceDescriptor sp = build_space(5, 1, 1);
    DensityMatrix fock1 = DensityMatrix::from_pure(basis_state(sp, {0, 1, 0, 0}));
    CHECK_THAT(single_mode_g2_zero(fock1, Subsystem::photon), WithinAbs(0.0, 1e-14));

    DensityMatrix fock2 = DensityMatrix::from_pure(basis_state(sp, {0, 2, 0, 0}));
    CHECK_THAT(single_mode_g2_zero(fock2, Subsystem::photon), WithinAbs(0.5, 1e-14));

    VectorXc amp = VectorXc::Zero(sp.dimension());
    auto c = coherent_coeffs(0.2, 5);
    for (int n = 0; n <= 5; ++n) amp(sp.index({0, n, 0, 0})) = c[n];
    DensityMatrix coh = DensityMatrix::from_pure(StateVector(sp, amp).normalized());
    CHECK_THAT(single_mode_g2_zero(coh, Subsystem::photon), WithinAbs(1.0, 1e-6));
}

TEST_CASE("regression correlation matches the direct formula at zero delay") {
    SpaceDescriptor sp = build_space(6, 1, 1);
    const double delta = 0.3, kappa = 0.2, drive = 0.08;
    Operator a = mode_annihilator(sp, Subsystem::photon);
    Operator H = complexd(delta) * number_operator(sp, Subsystem::photon) +
                 complexd(drive) * (a + a.dagger());
    // every decoupled subsystem needs a decay channel or its populations degenerate
    Liouvillian L = build_liouvillian(
        H, {{"photon", a, kappa},
            {"phonon", mode_annihilator(sp, Subsystem::phonon), 0.1},
            {"magnon", mode_annihilator(sp, Subsystem::magnon), 0.1},
            {"atom", atom_lowering(sp), 0.1}});
    DensityMatrix rho = steady_state(L);

    std::vector<double> taus = {0.0};
    std::vector<double> g2 = regression_g2(L, rho, a, taus);
    CHECK_THAT(g2[0], WithinAbs(single_mode_g2_zero(rho, Subsystem::photon), 1e-10));
    // coherent steady state: Poissonian statistics
    CHECK_THAT(g2[0], WithinAbs(1.0, 1e-6));
}

TEST_CASE("regression correlation decays to 1 at long delay") {
    // weakly driven atom: antibunched at tau = 0, uncorrelated at large tau;
    // the uncoupled modes carry decay so the steady state stays unique
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p;
    p.delta_ad = 0.0;
    p.delta_sigma_a = 0.0;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.0;
    p.lambda_ab = 0.0;
    p.lambda_am = 0.0;
    p.lambda_a_sigma = 0.0;
    p.xi = 0.05;
    p.gamma = 0.4;
    p.set_kappa(0.1);
    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    DensityMatrix rho = steady_state(L);

    Operator sigma = atom_lowering(sp);
    std::vector<double> taus = {0.0, 40.0, 120.0};
    std::vector<double> g2 = regression_g2(L, rho, sigma, taus);
    CHECK_THAT(g2[0], WithinAbs(0.0, 1e-10)); // a two-level atom emits one quantum at a time
    CHECK_THAT(g2[2], WithinAbs(1.0, 1e-4));
}

TEST_CASE("regression correlation input validation") {
    SpaceDescriptor sp = build_space(2, 1, 1);
    ModelParams p;
    p.delta_ad = 0.3;
    p.delta_sigma_a = 0.0;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.0;
    p.lambda_ab = 0.0;
    p.lambda_am = 0.0;
    p.lambda_a_sigma = 0.0;
    p.xi = 0.3;
    p.gamma = 0.1;
    p.kappa_a = 0.1;
    p.kappa_b = p.kappa_m = 0.1;
    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    DensityMatrix rho = steady_state(L);
    Operator a = mode_annihilator(sp, Subsystem::photon);

    CHECK_THROWS_AS(regression_g2(L, rho, a, {}), InvalidArgument);
    CHECK_THROWS_AS(regression_g2(L, rho, a, {1.0, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(regression_g2(L, rho, a, {-1.0, 0.5}), InvalidArgument);

    SpaceDescriptor other = build_space(3, 1, 1);
    Operator wrong = mode_annihilator(other, Subsystem::photon);
    CHECK_THROWS_AS(regression_g2(L, rho, wrong, {0.0}), InvalidArgument);
}

TEST_CASE("delayed bundle correlation is self-consistent at zero delay") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p = operating_point();
    Operator H = build_hamiltonian(p, sp);
    Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
    DensityMatrix rho = steady_state(L);

    std::vector<double> taus = {0.0, 20.0};
    CorrelationResult res = bundle_g2_delayed(L, rho, ModePair::photon_phonon, taus, p);
    CHECK(res.kind == CorrelationKind::bundle_delayed);
    CHECK(res.pair == ModePair::photon_phonon);
    CHECK(res.taus == taus);
    CHECK_THAT(res.at_zero(), WithinAbs(bundle_g2_zero(rho, ModePair::photon_phonon), 1e-8));
    CHECK(res.values.size() == 2);
    CHECK(std::isfinite(res.values[1]));
}

TEST_CASE("default tau grid spans five decay times") {
    std::vector<double> taus = default_tau_grid(0.008, 11);
    REQUIRE(taus.size() == 11);
    CHECK(taus.front() == 0.0);
    CHECK_THAT(taus.back(), WithinAbs(5.0 / 0.008, 1e-9));
    CHECK_THROWS_AS(default_tau_grid(0.0), InvalidArgument);
    CHECK_THROWS_AS(default_tau_grid(0.008, 1), InvalidArgument);
}

TEST_CASE("occupation spectrum sweeps detuning and records failures") {
    SpaceDescriptor sp = build_space(1, 1, 1);
    ModelParams p = operating_point();
    std::vector<double> grid = {1.30, 1.32, 1.34};
    SpectrumTable table = occupation_spectrum(p, grid, DriveSide::left, sp);
    REQUIRE(table.points.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(table.points[i].ok);
        CHECK(table.points[i].delta_ad == grid[i]);
        CHECK(table.points[i].occ.n_a >= 0.0);
    }
    CHECK(table.peak_index(Subsystem::magnon).has_value());

    // closed system: no unique steady state, recorded per point rather than thrown
    ModelParams closed = p;
    closed.set_kappa(0.0);
    closed.gamma = 0.0;
    SpectrumTable broken = occupation_spectrum(closed, {1.3}, DriveSide::left, sp);
    REQUIRE(broken.points.size() == 1);
    CHECK(!broken.points[0].ok);
    CHECK(!broken.points[0].error.empty());

    CHECK_THROWS_AS(occupation_spectrum(p, {}, DriveSide::left, sp), InvalidArgument);
}

TEST_CASE("peak index ignores failed points") {
    SpectrumTable t;
    t.side = DriveSide::left;
    SpectrumPoint bad;
    bad.delta_ad = 1.0;
    bad.ok = false;
    bad.occ.n_m = 100.0;
    SpectrumPoint good;
    good.delta_ad = 2.0;
    good.ok = true;
    good.occ.n_m = 1.0;
    t.points = {bad, good};
    auto idx = t.peak_index(Subsystem::magnon);
    REQUIRE(idx.has_value());
    CHECK(*idx == 1);
}
