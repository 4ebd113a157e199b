#pragma once

// Model layer: dimensionless parameter set (units of the phonon frequency),
// Sagnac/Fizeau drive-direction shift, dressed two-level states, pair
// resonance detunings (closed form and numerically refined), the system
// Hamiltonian, and the mean-field linearization that maps lab-frame inputs to
// the effective parameters.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"

namespace nrb {

enum class DriveSide { left, right };

inline const char* drive_side_name(DriveSide s) {
    return s == DriveSide::left ? "left" : "right";
}

inline double drive_sign(DriveSide s) { return s == DriveSide::left ? +1.0 : -1.0; }

enum class ResonanceKind { photon_magnon, photon_phonon };

inline const char* resonance_kind_name(ResonanceKind k) {
    return k == ResonanceKind::photon_magnon ? "photon_magnon" : "photon_phonon";
}

// Effective-model parameters, all in units of omega_b unless noted. delta_f is
// signed: positive = resonator driven from the left, negative = from the right.
struct ModelParams {
    double delta_ad = 0.0;      // photon detuning omega_a - omega_d (+ mean-field shift)
    double delta_sigma_a = 0.0; // atom-photon detuning omega_sigma - omega_a (- shift)
    double omega_b = 1.0;
    double omega_m = 1.0;
    double delta_f = 0.0;       // signed Fizeau shift
    double lambda_ab = 0.0;
    double lambda_am = 0.0;
    double lambda_a_sigma = 0.0;
    double xi = 0.0;            // effective atom drive strength
    double gamma = 0.0;         // atom decay
    double kappa_a = 0.0;       // photon decay
    double kappa_b = 0.0;       // phonon decay
    double kappa_m = 0.0;       // magnon decay

    // derived, never stored: atom detuning relative to the drive
    double delta_sigma_d() const { return delta_sigma_a + delta_ad; }

    void set_kappa(double k) { kappa_a = kappa_b = kappa_m = k; }

    void validate() const {
        if (gamma < 0 || kappa_a < 0 || kappa_b < 0 || kappa_m < 0)
            throw InfeasibleParameters("decay rates must be nonnegative");
        if (omega_b <= 0 || omega_m <= 0)
            throw InfeasibleParameters("mode frequencies must be positive");
    }
};

// Return a copy with delta_f signed according to the drive side, keeping |delta_f|.
inline ModelParams with_drive_side(ModelParams p, DriveSide side) {
    p.delta_f = drive_sign(side) * std::abs(p.delta_f);
    return p;
}

// ---------------------------------------------------------------------------
// Fizeau shift of a spinning resonator (SI units in, rad/s out)

struct ResonatorGeometry {
    double radius = 0.0;            // m
    double refractive_index = 1.0;  // n_r
    double wavelength = 0.0;        // m (vacuum)
    double dispersion = 0.0;        // dn_r / dlambda, 1/m
    double omega_a = 0.0;           // optical angular frequency, rad/s
};

// delta_f = +/- (r n_r omega_a Omega / c) [1 - 1/n_r^2 - (lambda/n_r) dn/dlambda]
inline double fizeau_shift(const ResonatorGeometry& g, double spin_rate, DriveSide side) {
    if (g.radius <= 0 || g.refractive_index <= 0 || g.omega_a <= 0)
        throw InfeasibleParameters("fizeau_shift: geometry must have positive radius, index, frequency");
    constexpr double c = 299792458.0;
    double nr = g.refractive_index;
    double correction = 1.0 - 1.0 / (nr * nr) - (g.wavelength / nr) * g.dispersion;
    return drive_sign(side) * g.radius * nr * g.omega_a * spin_rate * correction / c;
}

// ---------------------------------------------------------------------------
// Dressed states of the driven atom: H = Delta_sd sigma^+ sigma + xi (sigma^+ + sigma)

struct DressedPair {
    double e_plus = 0.0;
    double e_minus = 0.0;
    double c_plus = 0.0;   // |+> = c_+|g> + c_-|e>,  |-> = c_-|g> - c_+|e>
    double c_minus = 0.0;
    bool degenerate = false; // xi == 0 and Delta_sd == 0: any superposition is an eigenstate

    double splitting() const { return e_plus - e_minus; }
};

inline DressedPair dressed_states(double delta_sigma_d, double xi) {
    DressedPair d;
    double s = std::hypot(delta_sigma_d, 2.0 * xi);
    if (s == 0.0) {
        d.degenerate = true;
        d.c_plus = 1.0; // convention: |+> = |g>
        d.c_minus = 0.0;
        return d;
    }
    d.e_plus = 0.5 * (delta_sigma_d + s);
    d.e_minus = 0.5 * (delta_sigma_d - s);
    // c_+^2 = (s - Delta)/(2s), c_-^2 = (s + Delta)/(2s); evaluate the
    // cancelling difference through 4 xi^2 = (s - Delta)(s + Delta).
    double sm, sp; // s - Delta, s + Delta
    if (delta_sigma_d >= 0.0) {
        sp = s + delta_sigma_d;
        sm = 4.0 * xi * xi / sp;
    } else {
        sm = s - delta_sigma_d;
        sp = 4.0 * xi * xi / sm;
    }
    d.c_plus = std::sqrt(sm / (2.0 * s));
    d.c_minus = std::sqrt(sp / (2.0 * s));
    return d;
}

// |n_a n_b n_m +-> as a full-space state vector
inline StateVector dressed_basis_state(const SpaceDescriptor& space, int n_a, int n_b, int n_m,
                                       int sign, const DressedPair& d) {
    if (sign != +1 && sign != -1) throw InvalidArgument("dressed_basis_state: sign must be +-1");
    StateVector g = basis_state(space, {0, n_a, n_b, n_m});
    StateVector e = basis_state(space, {1, n_a, n_b, n_m});
    VectorXc v = (sign > 0) ? (d.c_plus * g.amplitudes + d.c_minus * e.amplitudes).eval()
                            : (d.c_minus * g.amplitudes - d.c_plus * e.amplitudes).eval();
    return StateVector(space, std::move(v));
}

// ---------------------------------------------------------------------------
// Pair resonance detunings

// Closed-form detuning where the dressed transition |000+> -> |101-> (photon-
// magnon) or |110-> (photon-phonon) is energy matched:
//   (delta_ad + s*|delta_f|) + omega_x = sqrt((delta_sigma_a + delta_ad)^2 + 4 xi^2)
// with s = +1 (left) / -1 (right) and omega_x the partner-mode frequency.
inline double resonance_detuning(ResonanceKind kind, DriveSide side, const ModelParams& p) {
    double w = (kind == ResonanceKind::photon_magnon ? p.omega_m : p.omega_b) +
               drive_sign(side) * std::abs(p.delta_f);
    double den = 2.0 * (w - p.delta_sigma_a);
    if (std::abs(den) < 1e-14)
        throw SingularConfiguration("resonance_detuning: vanishing denominator (w == delta_sigma_a)");
    double dad = (p.delta_sigma_a * p.delta_sigma_a + 4.0 * p.xi * p.xi - w * w) / den;
    // guard against the spurious branch introduced by squaring
    double residual = dad + w - std::hypot(p.delta_sigma_a + dad, 2.0 * p.xi);
    if (std::abs(residual) > 1e-9)
        throw SingularConfiguration("resonance_detuning: closed form fails the defining equation");
    return dad;
}

inline double resonance_residual(ResonanceKind kind, DriveSide side, const ModelParams& p,
                                 double delta_ad) {
    double w = (kind == ResonanceKind::photon_magnon ? p.omega_m : p.omega_b) +
               drive_sign(side) * std::abs(p.delta_f);
    return delta_ad + w - std::hypot(p.delta_sigma_a + delta_ad, 2.0 * p.xi);
}

// ---------------------------------------------------------------------------
// Hamiltonian (effective model, drive frame):
//   H = (delta_ad + delta_f) a^+a + omega_b b^+b + omega_m m^+m + delta_sd s^+s
//     + lambda_ab (a^+ + a)(b^+ + b) + lambda_am (a^+ + a)(m^+ + m)
//     + lambda_as (a s^+ + a^+ s) + xi (s^+ + s)
inline Operator build_hamiltonian(const ModelParams& p, const SpaceDescriptor& space) {
    p.validate();
    Operator a = mode_annihilator(space, Subsystem::photon);
    Operator b = mode_annihilator(space, Subsystem::phonon);
    Operator m = mode_annihilator(space, Subsystem::magnon);
    Operator s = atom_lowering(space);
    MatrixXc ad = a.matrix.adjoint(), bd = b.matrix.adjoint(), md = m.matrix.adjoint(),
             sd = s.matrix.adjoint();
    MatrixXc xa = ad + a.matrix, xb = bd + b.matrix, xm = md + m.matrix;
    MatrixXc H = (p.delta_ad + p.delta_f) * (ad * a.matrix) + p.omega_b * (bd * b.matrix) +
                 p.omega_m * (md * m.matrix) + p.delta_sigma_d() * (sd * s.matrix) +
                 p.lambda_ab * (xa * xb) + p.lambda_am * (xa * xm) +
                 p.lambda_a_sigma * (a.matrix * sd + ad * s.matrix) +
                 p.xi * (sd + s.matrix);
    return Operator(space, std::move(H));
}

// ---------------------------------------------------------------------------
// Numerically refined ("effective") resonance. The closed forms above ignore
// the level shifts induced by lambda_a_sigma / lambda_ab / lambda_am, which
// displace the actual super-Rabi resonance by an amount comparable to the
// couplings. Locate the true resonance as the detuning minimizing the
// hybridization gap between the eigenstates overlapping |000+> and the target
// pair state (avoided-crossing center).

struct EffectiveResonance {
    double delta_ad = 0.0;      // refined detuning
    double gap = 0.0;           // minimal gap = 2 x effective super-Rabi coupling
    double closed_form = 0.0;   // analytic starting point
};

namespace detail {

inline double hybridization_gap(const ModelParams& p, const SpaceDescriptor& space,
                                ResonanceKind kind) {
    Operator H = build_hamiltonian(p, space);
    DressedPair d = dressed_states(p.delta_sigma_d(), p.xi);
    StateVector src = dressed_basis_state(space, 0, 0, 0, +1, d);
    StateVector dst = (kind == ResonanceKind::photon_magnon)
                          ? dressed_basis_state(space, 1, 0, 1, -1, d)
                          : dressed_basis_state(space, 1, 1, 0, -1, d);
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(H.matrix);
    const auto& V = es.eigenvectors();
    const auto& E = es.eigenvalues();
    // score = combined overlap with the two bare states of the crossing
    Eigen::VectorXd score =
        (V.adjoint() * src.amplitudes).cwiseAbs2() + (V.adjoint() * dst.amplitudes).cwiseAbs2();
    int i0 = 0, i1 = 1;
    if (score(1) > score(0)) std::swap(i0, i1);
    for (int k = 2; k < score.size(); ++k) {
        if (score(k) > score(i0)) {
            i1 = i0;
            i0 = k;
        } else if (score(k) > score(i1)) {
            i1 = k;
        }
    }
    return std::abs(E(i0) - E(i1));
}

} // namespace detail

inline EffectiveResonance locate_effective_resonance(ResonanceKind kind, DriveSide side,
                                                     ModelParams p, const SpaceDescriptor& space,
                                                     double halfwidth = 0.08) {
    p = with_drive_side(p, side);
    EffectiveResonance r;
    r.closed_form = resonance_detuning(kind, side, p);
    double lo = r.closed_form - halfwidth, hi = r.closed_form + halfwidth;
    const int npts = 41;
    double best_x = r.closed_form, best_g = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 4; ++round) {
        best_g = std::numeric_limits<double>::infinity();
        double step = (hi - lo) / (npts - 1);
        int best_i = 0;
        for (int i = 0; i < npts; ++i) {
            double x = lo + i * step;
            ModelParams q = p;
            q.delta_ad = x;
            double g = detail::hybridization_gap(q, space, kind);
            if (g < best_g) {
                best_g = g;
                best_x = x;
                best_i = i;
            }
        }
        double nlo = lo + std::max(0, best_i - 1) * step;
        double nhi = lo + std::min(npts - 1, best_i + 1) * step;
        lo = nlo;
        hi = nhi;
    }
    r.delta_ad = best_x;
    r.gap = best_g;
    return r;
}

// ---------------------------------------------------------------------------
// Mean-field linearization: lab-frame inputs -> effective ModelParams

struct LabParams {
    double omega_a = 0.0;      // bare optical frequency
    double omega_sigma = 0.0;  // atom frequency
    double omega_b = 1.0;
    double omega_m = 1.0;
    double omega_d = 0.0;      // drive frequency
    double delta_f = 0.0;      // signed Fizeau shift
    double lambda_ab_bare = 0.0;  // single-photon optomechanical coupling lambda'_ab
    double lambda_am_bare = 0.0;  // single-photon optomagnonic coupling lambda'_am
    double lambda_a_sigma = 0.0;  // atom-photon coupling (unchanged by linearization)
    double xi_d = 0.0;         // resonator pump amplitude
    double xi_p = 0.0;         // direct atom drive amplitude
    double gamma = 0.0;
    double kappa_a = 0.0;
    double kappa_b = 0.0;
    double kappa_m = 0.0;

    void validate() const {
        if (xi_d < 0 || xi_p < 0) throw InfeasibleParameters("drive amplitudes must be >= 0");
        if (gamma < 0 || kappa_a < 0 || kappa_b < 0 || kappa_m < 0)
            throw InfeasibleParameters("decay rates must be nonnegative");
        if (omega_b <= 0 || omega_m <= 0)
            throw InfeasibleParameters("mode frequencies must be positive");
    }
};

struct MeanFieldRoot {
    double n = 0.0; // photon number |alpha|^2
    complexd alpha{0.0, 0.0};
    complexd beta{0.0, 0.0};
    complexd mu{0.0, 0.0};
    double residual = 0.0; // max |lhs| of the three stationarity equations
};

struct MeanFieldSolution {
    std::vector<MeanFieldRoot> roots; // all real nonnegative roots, ascending in n
    int selected = 0;
    ModelParams effective;

    const MeanFieldRoot& root() const { return roots[static_cast<size_t>(selected)]; }
};

namespace detail {

inline std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    // roots of c3 x^3 + c2 x^2 + c1 x + c0, via companion-matrix eigenvalues
    std::vector<double> out;
    double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0), 1e-300});
    if (std::abs(c3) < 1e-14 * scale) {
        if (std::abs(c2) < 1e-14 * scale) {
            if (std::abs(c1) < 1e-14 * scale) return out;
            out.push_back(-c0 / c1);
            return out;
        }
        double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0) return out;
        double sq = std::sqrt(disc);
        out.push_back((-c1 + sq) / (2.0 * c2));
        out.push_back((-c1 - sq) / (2.0 * c2));
        return out;
    }
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 2) = -c0 / c3;
    comp(1, 2) = -c1 / c3;
    comp(2, 2) = -c2 / c3;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    for (int i = 0; i < 3; ++i) {
        auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) < 1e-9 * std::max(1.0, std::abs(z.real())))
            out.push_back(z.real());
    }
    return out;
}

} // namespace detail

inline MeanFieldSolution mean_field_steady(const LabParams& lab, int root_selector = 0) {
    lab.validate();
    double d0 = lab.omega_a - lab.omega_d + lab.delta_f;
    double cab = 2.0 * lab.lambda_ab_bare * lab.lambda_ab_bare * lab.omega_b /
                 (lab.omega_b * lab.omega_b + 0.25 * lab.kappa_b * lab.kappa_b);
    double cam = 2.0 * lab.lambda_am_bare * lab.lambda_am_bare * lab.omega_m /
                 (lab.omega_m * lab.omega_m + 0.25 * lab.kappa_m * lab.kappa_m);
    double C = cab + cam;

    // n [ (d0 - C n)^2 + kappa_a^2/4 ] = xi_d^2, expanded in powers of n
    std::vector<double> candidates =
        detail::cubic_real_roots(C * C, -2.0 * C * d0, d0 * d0 + 0.25 * lab.kappa_a * lab.kappa_a,
                                 -lab.xi_d * lab.xi_d);

    MeanFieldSolution sol;
    complexd I(0.0, 1.0);
    for (double n : candidates) {
        if (n < -1e-12) continue;
        n = std::max(n, 0.0);
        MeanFieldRoot r;
        r.n = n;
        complexd deff(d0 - C * n, -0.5 * lab.kappa_a);
        r.alpha = (std::abs(deff) == 0.0) ? complexd(0, 0) : -lab.xi_d / deff;
        r.beta = -lab.lambda_ab_bare * n / complexd(lab.omega_b, -0.5 * lab.kappa_b);
        r.mu = -lab.lambda_am_bare * n / complexd(lab.omega_m, -0.5 * lab.kappa_m);
        // stationarity residuals of the three mean-field equations
        complexd e1 = d0 * r.alpha + lab.lambda_ab_bare * r.alpha * 2.0 * r.beta.real() +
                      lab.lambda_am_bare * r.alpha * 2.0 * r.mu.real() + lab.xi_d -
                      0.5 * I * r.alpha * lab.kappa_a;
        complexd e2 = lab.omega_b * r.beta + lab.lambda_ab_bare * std::norm(r.alpha) -
                      0.5 * I * r.beta * lab.kappa_b;
        complexd e3 = lab.omega_m * r.mu + lab.lambda_am_bare * std::norm(r.alpha) -
                      0.5 * I * r.mu * lab.kappa_m;
        r.residual = std::max({std::abs(e1), std::abs(e2), std::abs(e3)});
        if (r.residual > 1e-8 * std::max(1.0, lab.xi_d))
            continue; // spurious root of the expanded cubic
        sol.roots.push_back(r);
    }
    if (lab.xi_d == 0.0 && sol.roots.empty()) {
        MeanFieldRoot r; // undriven resonator: trivial fixed point
        sol.roots.push_back(r);
    }
    if (sol.roots.empty())
        throw InfeasibleParameters("mean_field_steady: no physical root found");
    std::sort(sol.roots.begin(), sol.roots.end(),
              [](const MeanFieldRoot& x, const MeanFieldRoot& y) { return x.n < y.n; });
    if (root_selector < 0 || root_selector >= static_cast<int>(sol.roots.size()))
        throw InvalidArgument("mean_field_steady: root selector out of range");
    sol.selected = root_selector;

    const MeanFieldRoot& r = sol.root();
    double shift = lab.lambda_ab_bare * 2.0 * r.beta.real() + lab.lambda_am_bare * 2.0 * r.mu.real();
    ModelParams eff;
    eff.delta_ad = lab.omega_a - lab.omega_d + shift;
    eff.delta_sigma_a = lab.omega_sigma - lab.omega_a - shift;
    eff.omega_b = lab.omega_b;
    eff.omega_m = lab.omega_m;
    eff.delta_f = lab.delta_f;
    eff.lambda_ab = lab.lambda_ab_bare * std::abs(r.alpha);
    eff.lambda_am = lab.lambda_am_bare * std::abs(r.alpha);
    eff.lambda_a_sigma = lab.lambda_a_sigma;
    eff.xi = lab.lambda_a_sigma * std::abs(r.alpha) + lab.xi_p;
    eff.gamma = lab.gamma;
    eff.kappa_a = lab.kappa_a;
    eff.kappa_b = lab.kappa_b;
    eff.kappa_m = lab.kappa_m;
    sol.effective = eff;
    return sol;
}

} // namespace nrb
