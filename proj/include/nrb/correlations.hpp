#pragma once

// Steady-state correlation functions: equal-time cross correlation
// g1_{oo'}(0) = <o+o o'+o'> / (<o+o><o'+o'>), generalized pair correlation
// g2_{oo'}(tau) = <O+(0)O+(tau)O(tau)O(0)> / <O+O>^2 with O = o o'
// (evaluated by quantum regression), and detuning-sweep occupation spectra.

#include <optional>
#include <string>
#include <vector>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"
#include "nrb/liouvillian.hpp"
#include "nrb/model.hpp"

namespace nrb {

enum class ModePair { photon_phonon, photon_magnon };

inline const char* pair_name(ModePair p) {
    return p == ModePair::photon_phonon ? "ab" : "am";
}

inline std::pair<Subsystem, Subsystem> pair_modes(ModePair p) {
    return p == ModePair::photon_phonon
               ? std::make_pair(Subsystem::photon, Subsystem::phonon)
               : std::make_pair(Subsystem::photon, Subsystem::magnon);
}

struct Occupations {
    double n_a = 0, n_b = 0, n_m = 0, p_e = 0;
};

inline Occupations occupations(const DensityMatrix& rho) {
    const auto& sp = rho.space;
    Occupations o;
    o.n_a = std::real(expectation(rho, number_operator(sp, Subsystem::photon)));
    o.n_b = std::real(expectation(rho, number_operator(sp, Subsystem::phonon)));
    o.n_m = std::real(expectation(rho, number_operator(sp, Subsystem::magnon)));
    o.p_e = std::real(expectation(rho, number_operator(sp, Subsystem::atom)));
    return o;
}

namespace detail {

inline double real_moment(const DensityMatrix& rho, const MatrixXc& op) {
    return std::real((op * rho.matrix).trace());
}

} // namespace detail

// <o+o o'+o'> / (<o+o><o'+o'>): equal-time cross correlation of the two modes.
inline double cross_g2_zero(const DensityMatrix& rho, ModePair pair) {
    auto [s1, s2] = pair_modes(pair);
    MatrixXc n1 = number_operator(rho.space, s1).matrix;
    MatrixXc n2 = number_operator(rho.space, s2).matrix;
    double occ1 = detail::real_moment(rho, n1);
    double occ2 = detail::real_moment(rho, n2);
    if (occ1 <= 1e-12 || occ2 <= 1e-12)
        throw UndefinedCorrelation(std::string("cross_g2_zero(") + pair_name(pair) +
                                   "): vanishing occupation");
    double num = detail::real_moment(rho, n1 * n2);
    return num / (occ1 * occ2);
}

// Equal-time pair correlation <O+O+OO>/<O+O>^2 for O = o o'.
inline double bundle_g2_zero(const DensityMatrix& rho, ModePair pair) {
    auto [s1, s2] = pair_modes(pair);
    MatrixXc O = (mode_annihilator(rho.space, s1) * mode_annihilator(rho.space, s2)).matrix;
    MatrixXc Od = O.adjoint();
    double den = detail::real_moment(rho, Od * O);
    if (den <= 1e-14)
        throw UndefinedCorrelation(std::string("bundle_g2_zero(") + pair_name(pair) +
                                   "): vanishing pair occupation");
    double num = detail::real_moment(rho, Od * Od * O * O);
    return num / (den * den);
}

// Same-mode second-order correlation <o+o+oo>/<o+o>^2 (sanity/diagnostic use).
inline double single_mode_g2_zero(const DensityMatrix& rho, Subsystem mode) {
    MatrixXc o = mode_annihilator(rho.space, mode).matrix;
    MatrixXc od = o.adjoint();
    double den = detail::real_moment(rho, od * o);
    if (den <= 1e-12)
        throw UndefinedCorrelation(std::string("single_mode_g2_zero(") + subsystem_name(mode) +
                                   "): vanishing occupation");
    double num = detail::real_moment(rho, od * od * o * o);
    return num / (den * den);
}

enum class CorrelationKind { cross_zero_delay, bundle_zero_delay, bundle_delayed };

struct CorrelationResult {
    CorrelationKind kind;
    ModePair pair;
    std::vector<double> taus;   // single entry {0} for zero-delay kinds
    std::vector<double> values; // g values on the tau grid
    ModelParams params;         // parameter snapshot

    double at_zero() const { return values.front(); }
};

// Quantum regression for an arbitrary jump operator O:
//   g2(tau) = Tr[(O+O) exp(L tau) (O rho O+)] / Tr[rho O+O]^2.
inline std::vector<double> regression_g2(const Liouvillian& L, const DensityMatrix& rho_ss,
                                         const Operator& O, const std::vector<double>& tau_grid,
                                         OdeOptions ode = {}) {
    if (!(O.space == L.space) || !(rho_ss.space == L.space))
        throw InvalidArgument("regression_g2: space mismatch");
    if (tau_grid.empty()) throw InvalidArgument("regression_g2: empty tau grid");
    for (size_t i = 1; i < tau_grid.size(); ++i)
        if (tau_grid[i] < tau_grid[i - 1])
            throw InvalidArgument("regression_g2: taus must be ascending");
    if (tau_grid.front() < 0) throw InvalidArgument("regression_g2: negative tau");

    MatrixXc Od = O.matrix.adjoint();
    MatrixXc OdO = Od * O.matrix;
    double den = std::real((OdO * rho_ss.matrix).trace());
    if (den <= 1e-14)
        throw UndefinedCorrelation("regression_g2: vanishing pair occupation");

    MatrixXc seed = O.matrix * rho_ss.matrix * Od; // conditioned (unnormalized) state
    const SparseMatrixXc& G = L.generator;
    Rk45 stepper([&G](double, const VectorXc& y, VectorXc& dy) { dy = G * y; }, ode);

    std::vector<double> out;
    out.reserve(tau_grid.size());
    VectorXc v = vectorize(seed);
    double t = 0.0;
    for (double tau : tau_grid) {
        if (tau > t) {
            stepper.integrate(t, tau, v);
            t = tau;
        }
        MatrixXc m = unvectorize(v, L.dim());
        out.push_back(std::real((OdO * m).trace()) / (den * den));
    }
    return out;
}

inline CorrelationResult bundle_g2_delayed(const Liouvillian& L, const DensityMatrix& rho_ss,
                                           ModePair pair, const std::vector<double>& tau_grid,
                                           const ModelParams& params, OdeOptions ode = {}) {
    auto [s1, s2] = pair_modes(pair);
    Operator O = mode_annihilator(L.space, s1) * mode_annihilator(L.space, s2);
    CorrelationResult res;
    res.kind = CorrelationKind::bundle_delayed;
    res.pair = pair;
    res.taus = tau_grid;
    res.values = regression_g2(L, rho_ss, O, tau_grid, ode);
    res.params = params;
    return res;
}

// Default linear tau grid covering the dissipative decay scale.
inline std::vector<double> default_tau_grid(double kappa, int n_points = 101) {
    if (kappa <= 0) throw InvalidArgument("default_tau_grid: kappa must be positive");
    if (n_points < 2) throw InvalidArgument("default_tau_grid: need at least 2 points");
    std::vector<double> taus(n_points);
    double span = 5.0 / kappa;
    for (int i = 0; i < n_points; ++i) taus[i] = span * double(i) / double(n_points - 1);
    return taus;
}

// ---------------------------------------------------------------------------
// detuning-sweep occupation spectra

struct SpectrumPoint {
    double delta_ad = 0;
    bool ok = false;
    Occupations occ;
    std::string error; // populated when ok == false
};

struct SpectrumTable {
    DriveSide side;
    std::vector<SpectrumPoint> points;

    // index of the largest finished occupation of the given mode
    std::optional<size_t> peak_index(Subsystem mode) const {
        std::optional<size_t> best;
        double best_val = -1;
        for (size_t i = 0; i < points.size(); ++i) {
            if (!points[i].ok) continue;
            double v = mode == Subsystem::phonon   ? points[i].occ.n_b
                       : mode == Subsystem::magnon ? points[i].occ.n_m
                       : mode == Subsystem::photon ? points[i].occ.n_a
                                                   : points[i].occ.p_e;
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        return best;
    }
};

inline SpectrumTable occupation_spectrum(const ModelParams& params_template,
                                         const std::vector<double>& detuning_grid,
                                         DriveSide side, const SpaceDescriptor& space,
                                         const SteadyStateOptions& ss_opt = {}) {
    if (detuning_grid.empty()) throw InvalidArgument("occupation_spectrum: empty grid");
    SpectrumTable table;
    table.side = side;
    table.points.reserve(detuning_grid.size());
    for (double d : detuning_grid) {
        SpectrumPoint pt;
        pt.delta_ad = d;
        try {
            ModelParams p = with_drive_side(params_template, side);
            p.delta_ad = d;
            Operator H = build_hamiltonian(p, space);
            Liouvillian L = build_liouvillian(H, collapse_channels(p, space));
            DensityMatrix rho = steady_state(L, ss_opt);
            pt.occ = occupations(rho);
            pt.ok = true;
        } catch (const Error& e) {
            pt.error = e.what();
        }
        table.points.push_back(std::move(pt));
    }
    return table;
}

} // namespace nrb
