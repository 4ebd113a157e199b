// Acceptance suite: one pass/fail line per criterion, tolerances pinned below.
// Returns 0 only if every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nrb/nrb.hpp"

using namespace nrb;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

ModelParams operating_point(double kappa) {
    ModelParams p;
    p.delta_ad = 0.0;
    p.delta_sigma_a = -3.1;
    p.omega_b = 1.0;
    p.omega_m = 1.05;
    p.delta_f = 0.025;
    p.lambda_ab = 0.022;
    p.lambda_am = 0.022;
    p.lambda_a_sigma = 0.3;
    p.xi = 0.8;
    p.gamma = 0.001;
    p.set_kappa(kappa);
    return p;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[size_t(i)] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return std::string(buf);
}

// two-sided Kolmogorov-Smirnov p-value against Exp(rate), asymptotic form
double ks_p_exponential(std::vector<double> samples, double rate) {
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        double F = 1.0 - std::exp(-rate * samples[i]);
        d = std::max(d, std::max(F - double(i) / n, double(i + 1) / n - F));
    }
    double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * double(k) * double(k) * lam * lam);
    return std::min(std::max(p, 0.0), 1.0);
}

MatrixXc random_pure_product(const std::vector<int>& dims, CounterRng& rng) {
    MatrixXc rho = MatrixXc::Identity(1, 1);
    for (int d : dims) {
        VectorXc amp(d);
        for (int i = 0; i < d; ++i) amp(i) = complexd(rng.uniform() - 0.5, rng.uniform() - 0.5);
        amp /= amp.norm();
        rho = detail::kron(rho, MatrixXc(amp * amp.adjoint()));
    }
    return rho;
}

// shared results of the headline steady-state runs (coincidence point, kappa = 0.008)
struct HeadlineRuns {
    EffectiveResonance eff_left;  // photon-phonon resonance, left drive
    EffectiveResonance eff_right; // photon-magnon resonance, right drive
    ModelParams p_left, p_right;
    DensityMatrix rho_left, rho_right;
    double g2_ab_left = 0, g2_am_right = 0;
};

struct Criterion2Data {
    double peak_left = 0;
    double detuning = 0;
};

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int n, bool pass, const std::string& detail) {
        std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    };

    // ---------------------------------------------------------------- 1
    // Closed-form pair resonances: four detunings, residuals, coincidence.
    try {
        ModelParams p = operating_point(0.005);
        const double pm_l = resonance_detuning(ResonanceKind::photon_magnon, DriveSide::left, p);
        const double pm_r = resonance_detuning(ResonanceKind::photon_magnon, DriveSide::right, p);
        const double pp_l = resonance_detuning(ResonanceKind::photon_phonon, DriveSide::left, p);
        const double pp_r = resonance_detuning(ResonanceKind::photon_phonon, DriveSide::right, p);
        const double expected[4] = {1.3191, 1.3478, 1.3478, 1.3766};
        const double got[4] = {pm_l, pm_r, pp_l, pp_r};
        double max_dev = 0.0;
        for (int i = 0; i < 4; ++i) max_dev = std::max(max_dev, std::abs(got[i] - expected[i]));
        double max_res = 0.0;
        max_res = std::max(max_res, std::abs(resonance_residual(ResonanceKind::photon_magnon,
                                                                DriveSide::left, p, pm_l)));
        max_res = std::max(max_res, std::abs(resonance_residual(ResonanceKind::photon_magnon,
                                                                DriveSide::right, p, pm_r)));
        max_res = std::max(max_res, std::abs(resonance_residual(ResonanceKind::photon_phonon,
                                                                DriveSide::left, p, pp_l)));
        max_res = std::max(max_res, std::abs(resonance_residual(ResonanceKind::photon_phonon,
                                                                DriveSide::right, p, pp_r)));
        const double coincidence = std::abs(pm_r - pp_l);
        bool pass = max_dev < 1e-3 && max_res < 1e-9 && coincidence <= 1e-12;
        report(1, pass,
               fmt("pair resonances {%.6f, %.6f, %.6f, %.6f}, max dev %.2e (tol 1e-3), "
                   "max residual %.2e (tol 1e-9), coincidence gap %.2e (tol 1e-12)",
                   pm_l, pm_r, pp_l, pp_r, max_dev, max_res, coincidence));
    } catch (const std::exception& e) {
        report(1, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 2
    // Nonreciprocal two-quanta oscillation: peak photon-magnon pair population
    // from the dressed vacuum, forward vs reverse drive, ratio >= 10.
    std::optional<Criterion2Data> c2data;
    try {
        double t0 = now_seconds();
        SpaceDescriptor sp = build_space(3, 2, 2);
        ModelParams base = operating_point(0.008);
        EffectiveResonance eff =
            locate_effective_resonance(ResonanceKind::photon_magnon, DriveSide::left, base, sp);

        auto peak_pair_population = [&](DriveSide side) {
            ModelParams p = with_drive_side(base, side);
            p.delta_ad = eff.delta_ad;
            DressedPair d = dressed_states(p.delta_sigma_d(), p.xi);
            StateVector psi0 = dressed_basis_state(sp, 0, 0, 0, +1, d);
            Operator H = build_hamiltonian(p, sp);
            double horizon = 1.25 * M_PI / std::max(eff.gap, 1e-6);
            EvolutionRecord rec = evolve_closed(psi0, H, linspace(0.0, horizon, 1501));
            double peak = 0.0;
            for (const auto& psi : rec.pure_states)
                peak = std::max(peak, dressed_population(psi, 1, 0, 1, -1, d));
            return peak;
        };
        double peak_left = peak_pair_population(DriveSide::left);
        double peak_right = peak_pair_population(DriveSide::right);
        double ratio = peak_left / std::max(peak_right, 1e-300);
        bool pass = ratio >= 10.0;
        c2data = Criterion2Data{peak_left, eff.delta_ad};
        report(2, pass,
               fmt("peak pair population left %.4f vs right %.4f, ratio %.1f (>= 10) "
                   "at detuning %.6f [%.0f s]",
                   peak_left, peak_right, ratio, eff.delta_ad, now_seconds() - t0));
    } catch (const std::exception& e) {
        report(2, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 3
    // Bundle statistics at the coincidence point: the two pair correlations
    // form the unordered pair {0.29, 0.49} within +-0.10.
    std::optional<HeadlineRuns> headline;
    try {
        double t0 = now_seconds();
        SpaceDescriptor sp = build_space(3, 2, 2);
        ModelParams base = operating_point(0.008);
        HeadlineRuns h;
        h.eff_left =
            locate_effective_resonance(ResonanceKind::photon_phonon, DriveSide::left, base, sp);
        h.eff_right =
            locate_effective_resonance(ResonanceKind::photon_magnon, DriveSide::right, base, sp);

        h.p_left = with_drive_side(base, DriveSide::left);
        h.p_left.delta_ad = h.eff_left.delta_ad;
        Operator Hl = build_hamiltonian(h.p_left, sp);
        h.rho_left = steady_state(build_liouvillian(Hl, collapse_channels(h.p_left, sp)));
        h.g2_ab_left = bundle_g2_zero(h.rho_left, ModePair::photon_phonon);

        h.p_right = with_drive_side(base, DriveSide::right);
        h.p_right.delta_ad = h.eff_right.delta_ad;
        Operator Hr = build_hamiltonian(h.p_right, sp);
        h.rho_right = steady_state(build_liouvillian(Hr, collapse_channels(h.p_right, sp)));
        h.g2_am_right = bundle_g2_zero(h.rho_right, ModePair::photon_magnon);

        double lo = std::min(h.g2_ab_left, h.g2_am_right);
        double hi = std::max(h.g2_ab_left, h.g2_am_right);
        bool pass = std::abs(lo - 0.29) <= 0.10 && std::abs(hi - 0.49) <= 0.10;
        report(3, pass,
               fmt("bundle correlations: photon-phonon (left) %.3f, photon-magnon (right) %.3f; "
                   "sorted {%.3f, %.3f} vs {0.29, 0.49} +-0.10 [%.0f s]",
                   h.g2_ab_left, h.g2_am_right, lo, hi, now_seconds() - t0));
        headline = std::move(h);
    } catch (const std::exception& e) {
        report(3, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 4
    // Loss-rate window: correlated (g1 > 1) yet pair-antibunched (g2 < 1)
    // occurs for the resonant pair on its allowed drive side only.
    try {
        if (!headline) throw InvalidState("criterion 3 prerequisites unavailable");
        double t0 = now_seconds();
        SpaceDescriptor sp = build_space(3, 2, 2);
        std::vector<double> kappas = linspace(0.002, 0.040, 20);

        bool window_ab_left = false, window_am_left = false;
        bool window_am_right = false, window_ab_right = false;
        for (double k : kappas) {
            {
                ModelParams p = headline->p_left;
                p.set_kappa(k);
                Operator H = build_hamiltonian(p, sp);
                DensityMatrix rho = steady_state(build_liouvillian(H, collapse_channels(p, sp)));
                double g1ab = cross_g2_zero(rho, ModePair::photon_phonon);
                double g2ab = bundle_g2_zero(rho, ModePair::photon_phonon);
                double g1am = cross_g2_zero(rho, ModePair::photon_magnon);
                double g2am = bundle_g2_zero(rho, ModePair::photon_magnon);
                if (g1ab > 1.0 && g2ab < 1.0) window_ab_left = true;
                if (g1am > 1.0 && g2am < 1.0) window_am_left = true;
            }
            {
                ModelParams p = headline->p_right;
                p.set_kappa(k);
                Operator H = build_hamiltonian(p, sp);
                DensityMatrix rho = steady_state(build_liouvillian(H, collapse_channels(p, sp)));
                double g1am = cross_g2_zero(rho, ModePair::photon_magnon);
                double g2am = bundle_g2_zero(rho, ModePair::photon_magnon);
                double g1ab = cross_g2_zero(rho, ModePair::photon_phonon);
                double g2ab = bundle_g2_zero(rho, ModePair::photon_phonon);
                if (g1am > 1.0 && g2am < 1.0) window_am_right = true;
                if (g1ab > 1.0 && g2ab < 1.0) window_ab_right = true;
            }
        }
        bool pass = window_ab_left && window_am_right && !window_am_left && !window_ab_right;
        report(4, pass,
               fmt("loss-rate sweep (20 points, 0.002..0.040): photon-phonon window on left %s / "
                   "on right %s; photon-magnon window on right %s / on left %s [%.0f s]",
                   window_ab_left ? "yes" : "no", window_ab_right ? "yes" : "no",
                   window_am_right ? "yes" : "no", window_am_left ? "yes" : "no",
                   now_seconds() - t0));
    } catch (const std::exception& e) {
        report(4, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 5
    // Trajectory unraveling reproduces the master equation: photon and magnon
    // occupations within 3 standard errors at every sample time.
    try {
        if (!headline) throw InvalidState("criterion 3 prerequisites unavailable");
        double t0 = now_seconds();
        SpaceDescriptor sp = build_space(3, 2, 2);
        const ModelParams& p = headline->p_left;
        DressedPair d = dressed_states(p.delta_sigma_d(), p.xi);
        StateVector psi0 = dressed_basis_state(sp, 0, 0, 0, +1, d);

        std::vector<double> times = {0.0};
        for (double t : linspace(50.0, 200.0, 7)) times.push_back(t);

        TrajectoryOptions opt;
        opt.ode.rel_tol = 1e-6;
        opt.ode.abs_tol = 1e-10;
        EnsembleSummary ens = ensemble_average(p, sp, psi0, times, 2000, 1, 1, opt);

        Operator H = build_hamiltonian(p, sp);
        Liouvillian L = build_liouvillian(H, collapse_channels(p, sp));
        EvolutionRecord me =
            evolve_open(DensityMatrix::from_pure(psi0), L, times, default_observables(sp));

        double worst_z = 0.0;
        bool pass = true;
        for (const char* key : {"n_a", "n_m"}) {
            for (size_t i = 0; i < times.size(); ++i) {
                double mc = ens.mean.at(key)[i];
                double se = ens.std_error.at(key)[i];
                double ref = me.observables.at(key)[i].real();
                double tol = 3.0 * se + 1e-7; // numerical floor for zero-variance samples
                if (std::abs(mc - ref) > tol) pass = false;
                if (se > 0) worst_z = std::max(worst_z, std::abs(mc - ref) / se);
            }
        }
        report(5, pass,
               fmt("2000 trajectories vs master equation on 8 sample times: worst |z| = %.2f "
                   "(tol 3.0), photon and magnon occupations [%.0f s]",
                   worst_z, now_seconds() - t0));
    } catch (const std::exception& e) {
        report(5, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 6
    // Witness soundness on product states plus entangled-regime signs.
    try {
        if (!headline) throw InvalidState("criterion 3 prerequisites unavailable");
        double t0 = now_seconds();
        CounterRng rng(2026);
        double worst_w = -1e300;
        int n_product = 0;
        {
            std::vector<int> dims2 = {4, 3};
            auto sets2 = std::vector<LocalOperatorSet>{mode_operator_set(dims2, 0, "photon"),
                                                       mode_operator_set(dims2, 1, "phonon")};
            for (int i = 0; i < 100; ++i) {
                WitnessReport rep = witness_report(random_pure_product(dims2, rng), sets2);
                worst_w = std::max(worst_w, rep.w1);
                ++n_product;
            }
            std::vector<int> dims3 = {2, 4, 3};
            auto sets3 = std::vector<LocalOperatorSet>{qubit_operator_set(dims3, 0, "atom"),
                                                       mode_operator_set(dims3, 1, "photon"),
                                                       mode_operator_set(dims3, 2, "magnon")};
            for (int i = 0; i < 100; ++i) {
                WitnessReport rep = witness_report(random_pure_product(dims3, rng), sets3);
                worst_w = std::max(worst_w, rep.w1);
                ++n_product;
            }
        }
        bool sound = worst_w <= 1e-8;

        WitnessReport ab = witness_report(headline->rho_left, Partition::ab);
        WitnessReport abs_rep = witness_report(headline->rho_left, Partition::ab_sigma);
        WitnessReport am = witness_report(headline->rho_right, Partition::am);
        WitnessReport ams_rep = witness_report(headline->rho_right, Partition::am_sigma);
        bool signs = ab.d1 > 0 && abs_rep.d1 > 0 && am.d1 > 0 && ams_rep.d1 > 0;

        report(6, sound && signs,
               fmt("witness on %d random product states: max W %.2e (tol 1e-8); entangled-regime "
                   "indicators: left D1(photon,phonon)=%.4f D1(atom,photon,phonon)=%.4f, right "
                   "D1(photon,magnon)=%.4f D1(atom,photon,magnon)=%.4f (all > 0) [%.0f s]",
                   n_product, worst_w, ab.d1, abs_rep.d1, am.d1, ams_rep.d1,
                   now_seconds() - t0));
    } catch (const std::exception& e) {
        report(6, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 8
    // Analytic oracles: driven cavity amplitude, bare Rabi, exponential jumps.
    try {
        double t0 = now_seconds();
        // (a) driven damped cavity
        SpaceDescriptor spc = build_space(6, 1, 1);
        const double delta = 0.3, kap = 0.2, drive = 0.05;
        Operator a = mode_annihilator(spc, Subsystem::photon);
        Operator Hc = complexd(delta) * number_operator(spc, Subsystem::photon) +
                      complexd(drive) * (a + a.dagger());
        // every decoupled subsystem carries its own decay so the steady state is unique
        DensityMatrix rho = steady_state(build_liouvillian(
            Hc, {{"photon", a, kap},
                 {"phonon", mode_annihilator(spc, Subsystem::phonon), 0.1},
                 {"magnon", mode_annihilator(spc, Subsystem::magnon), 0.1},
                 {"atom", atom_lowering(spc), 0.1}}));
        complexd alpha_expected = -drive / complexd(delta, -kap / 2.0);
        double cavity_err = std::abs(expectation(rho, a) - alpha_expected);

        // (b) two-level oscillation from the ground state
        SpaceDescriptor spa = build_space(1, 1, 1);
        ModelParams pr = operating_point(0.0);
        pr.delta_sigma_a = 0.0;
        pr.delta_ad = 0.0;
        pr.delta_f = 0.0;
        pr.lambda_ab = pr.lambda_am = pr.lambda_a_sigma = 0.0;
        pr.gamma = 0.0;
        pr.xi = 0.8;
        Operator Ha = build_hamiltonian(pr, spa);
        std::vector<double> tg = linspace(0.0, 12.0, 241);
        EvolutionRecord rec =
            evolve_closed(basis_state(spa, {0, 0, 0, 0}), Ha, tg, default_observables(spa));
        double rabi_err = 0.0;
        for (size_t i = 0; i < tg.size(); ++i)
            rabi_err = std::max(rabi_err, std::abs(rec.observables.at("p_e")[i].real() -
                                                   std::pow(std::sin(pr.xi * tg[i]), 2)));

        // (c) decay-time statistics of a lossy cavity prepared with one photon
        SpaceDescriptor spd = build_space(1, 1, 1);
        ModelParams pd = operating_point(0.0);
        pd.delta_sigma_a = 0.0;
        pd.delta_ad = 0.0;
        pd.delta_f = 0.0;
        pd.lambda_ab = pd.lambda_am = pd.lambda_a_sigma = 0.0;
        pd.xi = 0.0;
        pd.gamma = 0.0;
        pd.kappa_a = 0.5;
        StateVector one = basis_state(spd, {0, 1, 0, 0});
        std::vector<double> horizon = {0.0, 80.0};
        std::vector<double> jump_times;
        jump_times.reserve(2000);
        for (int i = 0; i < 2000; ++i) {
            TrajectoryRecord tr = run_trajectory(pd, spd, one, horizon, 10000 + uint64_t(i));
            if (tr.jumps.size() == 1) jump_times.push_back(tr.jumps[0].time);
        }
        double ks_p = jump_times.size() == 2000 ? ks_p_exponential(jump_times, pd.kappa_a) : 0.0;

        bool pass = cavity_err < 1e-9 && rabi_err < 1e-8 && ks_p > 0.01;
        report(8, pass,
               fmt("driven-cavity amplitude error %.2e (tol 1e-9); two-level oscillation error "
                   "%.2e (tol 1e-8); jump-time KS p = %.3f over %zu decays (need > 0.01) [%.0f s]",
                   cavity_err, rabi_err, ks_p, jump_times.size(), now_seconds() - t0));
    } catch (const std::exception& e) {
        report(8, false, std::string("exception: ") + e.what());
    }

    // ---------------------------------------------------------------- 7
    // Truncation hygiene: headline scalars stable to < 1% under cutoffs+1,
    // steady residuals < 1e-10, positivity >= -1e-8. Run last: largest memory.
    try {
        if (!headline || !c2data) throw InvalidState("criteria 2/3 prerequisites unavailable");
        double t0 = now_seconds();
        SpaceDescriptor sp_big = build_space(4, 3, 3);
        ModelParams base = operating_point(0.008);

        double res_small = std::max(
            (build_liouvillian(build_hamiltonian(headline->p_left, build_space(3, 2, 2)),
                               collapse_channels(headline->p_left, build_space(3, 2, 2)))
                 .generator *
             vectorize(headline->rho_left.matrix))
                .norm(),
            (build_liouvillian(build_hamiltonian(headline->p_right, build_space(3, 2, 2)),
                               collapse_channels(headline->p_right, build_space(3, 2, 2)))
                 .generator *
             vectorize(headline->rho_right.matrix))
                .norm());
        double pos_small =
            std::min(headline->rho_left.min_eigenvalue(), headline->rho_right.min_eigenvalue());

        // re-run the bundle-statistics pipeline one cutoff higher
        EffectiveResonance eff_l =
            locate_effective_resonance(ResonanceKind::photon_phonon, DriveSide::left, base, sp_big);
        ModelParams pl = with_drive_side(base, DriveSide::left);
        pl.delta_ad = eff_l.delta_ad;
        Liouvillian Ll = build_liouvillian(build_hamiltonian(pl, sp_big),
                                           collapse_channels(pl, sp_big));
        DensityMatrix rl = steady_state(Ll);
        double g2_ab_big = bundle_g2_zero(rl, ModePair::photon_phonon);
        double res_big_l = (Ll.generator * vectorize(rl.matrix)).norm();

        EffectiveResonance eff_r = locate_effective_resonance(ResonanceKind::photon_magnon,
                                                              DriveSide::right, base, sp_big);
        ModelParams prm = with_drive_side(base, DriveSide::right);
        prm.delta_ad = eff_r.delta_ad;
        Liouvillian Lr = build_liouvillian(build_hamiltonian(prm, sp_big),
                                           collapse_channels(prm, sp_big));
        DensityMatrix rr = steady_state(Lr);
        double g2_am_big = bundle_g2_zero(rr, ModePair::photon_magnon);
        double res_big_r = (Lr.generator * vectorize(rr.matrix)).norm();
        double pos_big = std::min(rl.min_eigenvalue(), rr.min_eigenvalue());

        // re-run the oscillation-peak pipeline one cutoff higher
        EffectiveResonance eff_pm =
            locate_effective_resonance(ResonanceKind::photon_magnon, DriveSide::left, base, sp_big);
        ModelParams p2 = with_drive_side(base, DriveSide::left);
        p2.delta_ad = eff_pm.delta_ad;
        DressedPair d2 = dressed_states(p2.delta_sigma_d(), p2.xi);
        EvolutionRecord rec2 =
            evolve_closed(dressed_basis_state(sp_big, 0, 0, 0, +1, d2),
                          build_hamiltonian(p2, sp_big),
                          linspace(0.0, 1.25 * M_PI / std::max(eff_pm.gap, 1e-6), 1501));
        double peak_big = 0.0;
        for (const auto& psi : rec2.pure_states)
            peak_big = std::max(peak_big, dressed_population(psi, 1, 0, 1, -1, d2));

        double drift_ab = std::abs(g2_ab_big - headline->g2_ab_left) /
                          std::abs(headline->g2_ab_left);
        double drift_am = std::abs(g2_am_big - headline->g2_am_right) /
                          std::abs(headline->g2_am_right);
        double drift_peak = std::abs(peak_big - c2data->peak_left) / std::abs(c2data->peak_left);
        double max_drift = std::max({drift_ab, drift_am, drift_peak});
        double max_res = std::max({res_small, res_big_l, res_big_r});
        double min_pos = std::min(pos_small, pos_big);

        bool pass = max_drift < 0.01 && max_res < 1e-10 && min_pos >= -1e-8;
        report(7, pass,
               fmt("cutoffs+1 drift: pair correlations %.3f%% / %.3f%%, oscillation peak %.3f%% "
                   "(tol 1%%); max steady residual %.2e (tol 1e-10); min eigenvalue %.2e "
                   "(tol -1e-8) [%.0f s]",
                   100 * drift_ab, 100 * drift_am, 100 * drift_peak, max_res, min_pos,
                   now_seconds() - t0));
    } catch (const std::exception& e) {
        report(7, false, std::string("exception: ") + e.what());
    }

    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
