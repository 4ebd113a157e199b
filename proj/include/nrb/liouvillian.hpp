#pragma once

// Lindblad generator in column-stacking vectorization (vec(rho)[i + j*d] =
// rho_ij), steady-state solvers, and closed/open propagation.
//
//   L = -i (I (x) H - H^T (x) I)
//     + sum_k rate_k [ conj(c_k) (x) c_k - 1/2 I (x) c_k^+ c_k - 1/2 (c_k^+ c_k)^T (x) I ]

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"
#include "nrb/model.hpp"
#include "nrb/ode.hpp"

namespace nrb {

struct CollapseChannel {
    std::string name;
    Operator op;
    double rate = 0.0;
};

// Standard dissipator set: photon/phonon/magnon decay at their kappas, atom decay at gamma.
inline std::vector<CollapseChannel> collapse_channels(const ModelParams& p,
                                                      const SpaceDescriptor& space) {
    p.validate();
    std::vector<CollapseChannel> ch;
    if (p.kappa_a > 0) ch.push_back({"photon", mode_annihilator(space, Subsystem::photon), p.kappa_a});
    if (p.kappa_b > 0) ch.push_back({"phonon", mode_annihilator(space, Subsystem::phonon), p.kappa_b});
    if (p.kappa_m > 0) ch.push_back({"magnon", mode_annihilator(space, Subsystem::magnon), p.kappa_m});
    if (p.gamma > 0) ch.push_back({"atom", atom_lowering(space), p.gamma});
    return ch;
}

inline VectorXc vectorize(const MatrixXc& rho) {
    return Eigen::Map<const VectorXc>(rho.data(), rho.size()); // column-major = column stacking
}

inline MatrixXc unvectorize(const VectorXc& v, Eigen::Index d) {
    if (v.size() != d * d) throw InvalidArgument("unvectorize: size mismatch");
    return Eigen::Map<const MatrixXc>(v.data(), d, d);
}

namespace detail {

inline SparseMatrixXc sparse_kron(const SparseMatrixXc& A, const SparseMatrixXc& B) {
    SparseMatrixXc out(A.rows() * B.rows(), A.cols() * B.cols());
    std::vector<Eigen::Triplet<complexd>> trips;
    trips.reserve(size_t(A.nonZeros()) * size_t(B.nonZeros()));
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SparseMatrixXc::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SparseMatrixXc::InnerIterator ib(B, kb); ib; ++ib)
                    trips.emplace_back(ia.row() * B.rows() + ib.row(),
                                       ia.col() * B.cols() + ib.col(), ia.value() * ib.value());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace detail

struct Liouvillian {
    SpaceDescriptor space;
    SparseMatrixXc generator; // d^2 x d^2

    Eigen::Index dim() const { return space.dimension(); }

    VectorXc apply(const VectorXc& v) const { return generator * v; }

    MatrixXc apply(const MatrixXc& rho) const {
        return unvectorize(generator * vectorize(rho), dim());
    }
};

inline Liouvillian build_liouvillian(const Operator& H,
                                     const std::vector<CollapseChannel>& channels) {
    double herm = (H.matrix - H.matrix.adjoint()).norm();
    if (herm > 1e-10 * std::max(1.0, H.matrix.norm()))
        throw InvalidArgument("build_liouvillian: Hamiltonian is not Hermitian");
    const Eigen::Index d = H.space.dimension();
    SparseMatrixXc I(d, d);
    I.setIdentity();
    SparseMatrixXc Hs = H.sparse();
    SparseMatrixXc HsT = SparseMatrixXc(Hs.transpose());
    complexd mi(0.0, -1.0);
    SparseMatrixXc L = mi * (detail::sparse_kron(I, Hs) - detail::sparse_kron(HsT, I));
    for (const auto& ch : channels) {
        if (ch.rate < 0) throw InvalidArgument("build_liouvillian: negative collapse rate");
        if (ch.rate == 0) continue;
        if (!(ch.op.space == H.space))
            throw InvalidArgument("build_liouvillian: channel on a different space");
        SparseMatrixXc c = ch.op.sparse();
        SparseMatrixXc cc = SparseMatrixXc(c.conjugate());
        SparseMatrixXc n = SparseMatrixXc(c.adjoint()) * c;
        SparseMatrixXc nT = SparseMatrixXc(n.transpose());
        L = L + ch.rate * (detail::sparse_kron(cc, c) - 0.5 * detail::sparse_kron(I, n) -
                           0.5 * detail::sparse_kron(nT, I));
    }
    L.makeCompressed();
    return Liouvillian{H.space, std::move(L)};
}

// ---------------------------------------------------------------------------
// steady state

struct SteadyStateOptions {
    double residual_tol = 1e-10;
    bool check_uniqueness = true;  // perturbed-solve probe for a second null direction
    int refine_iters = 2;          // iterative refinement passes on the LU solve
    // Solver selection: sparse LU up to this vectorized dimension (d^2), then
    // BiCGSTAB preconditioned by an incomplete LU — the direct factorization
    // grows superlinearly in fill and becomes impractical around d ~ 100.
    Eigen::Index direct_dim_limit = 2048;
    double ilut_drop_tol = 1e-4;
    int ilut_fill_factor = 30;
};

namespace detail {

inline SparseMatrixXc trace_replaced(const SparseMatrixXc& L, Eigen::Index d) {
    // overwrite the row enforcing d(rho_00)/dt with the trace-normalization row
    std::vector<Eigen::Triplet<complexd>> trips;
    trips.reserve(size_t(L.nonZeros()) + size_t(d));
    for (int k = 0; k < L.outerSize(); ++k)
        for (SparseMatrixXc::InnerIterator it(L, k); it; ++it)
            if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < d; ++i) trips.emplace_back(0, i * (d + 1), complexd(1.0, 0.0));
    SparseMatrixXc A(d * d, d * d);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
}

inline DensityMatrix finalize_steady(const SpaceDescriptor& space, VectorXc v,
                                     const Liouvillian& L, double residual_tol) {
    const Eigen::Index d = space.dimension();
    MatrixXc rho = unvectorize(v, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    complexd tr = rho.trace();
    if (std::abs(tr) < 1e-14)
        throw NonUniqueSteadyState("steady_state: null vector has vanishing trace");
    rho /= tr;
    double res = (L.generator * vectorize(rho)).norm();
    if (res > residual_tol)
        throw NonUniqueSteadyState("steady_state: residual " + std::to_string(res) +
                                   " exceeds tolerance");
    return DensityMatrix(space, std::move(rho));
}

} // namespace detail

namespace detail {

// deterministic pseudo-random perturbation for the uniqueness probe
inline VectorXc probe_noise(Eigen::Index D) {
    VectorXc w(D);
    uint64_t s = 0x9E3779B97F4A7C15ull;
    for (Eigen::Index i = 0; i < D; ++i) {
        s ^= s << 13; s ^= s >> 7; s ^= s << 17;
        w(i) = complexd(double(s >> 40) / double(1 << 24) - 0.5,
                        double((s >> 16) & 0xFFFFFF) / double(1 << 24) - 0.5);
    }
    return w;
}

// If the generator has a second null vector, the perturbed solve amplifies the
// perturbation along it, and the resulting direction y = v2 - v has a vanishing
// relative residual ||L y||/||y||. For a unique steady state that ratio is
// bounded below by the slowest relaxation rate, so a cut at 1e-8 separates the
// two regimes.
inline void check_second_direction(const Liouvillian& L, const VectorXc& v, const VectorXc& v2) {
    VectorXc y = v2 - v;
    double yn = y.norm();
    if (yn > 1e-6 * std::max(1.0, v.norm())) {
        double rel_res = (L.generator * y).norm() / yn;
        if (rel_res < 1e-8)
            throw NonUniqueSteadyState(
                "steady_state: second stationary direction found (relative residual " +
                std::to_string(rel_res) + ")");
    }
}

} // namespace detail

inline DensityMatrix steady_state(const Liouvillian& L, const SteadyStateOptions& opt = {}) {
    const Eigen::Index d = L.dim();
    const Eigen::Index D = d * d;

    SparseMatrixXc A = detail::trace_replaced(L.generator, d);
    VectorXc rhs = VectorXc::Zero(D);
    rhs(0) = 1.0;
    VectorXc rhs2 = rhs + 1e-8 * detail::probe_noise(D);
    rhs2(0) = 1.0;

    if (D > opt.direct_dim_limit) {
        // Iterative path: incomplete-LU preconditioned BiCGSTAB. Stiff systems
        // (slow relaxation, weak damping) can stall the cheap first
        // preconditioner, so retry with a tighter factorization, warm-started
        // from the stalled iterate, before giving up.
        Eigen::BiCGSTAB<SparseMatrixXc, Eigen::IncompleteLUT<complexd>> solver;
        double drop = opt.ilut_drop_tol;
        int fill = opt.ilut_fill_factor;
        VectorXc v;
        bool converged = false;
        double last_error = 0.0;
        for (int attempt = 0; attempt < 3 && !converged; ++attempt) {
            if (attempt > 0) {
                drop *= 0.03;
                fill *= 2;
            }
            solver.preconditioner().setDroptol(drop);
            solver.preconditioner().setFillfactor(fill);
            solver.setTolerance(1e-13);
            solver.setMaxIterations(2000);
            solver.compute(A);
            if (solver.info() != Eigen::Success) continue;
            if (attempt > 0 && v.size() == D && v.allFinite())
                v = solver.solveWithGuess(rhs, v);
            else
                v = solver.solve(rhs);
            last_error = solver.error();
            converged = v.allFinite() &&
                        (solver.info() == Eigen::Success || last_error <= 1e-11);
        }
        if (!converged)
            throw InvalidState("steady_state: iterative solve did not converge (error " +
                               std::to_string(last_error) + ")");
        DensityMatrix rho = detail::finalize_steady(L.space, v, L, opt.residual_tol);
        if (opt.check_uniqueness) {
            // A singular system makes the perturbed right-hand side
            // inconsistent, so non-convergence here (after the plain solve
            // converged) signals degeneracy.
            VectorXc v2 = solver.solve(rhs2);
            if (!v2.allFinite() || (solver.info() != Eigen::Success && solver.error() > 1e-9))
                throw NonUniqueSteadyState(
                    "steady_state: perturbed solve failed to converge (singular system)");
            detail::check_second_direction(L, v, v2);
        }
        return rho;
    }

    Eigen::SparseLU<SparseMatrixXc, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);

    VectorXc v;
    bool lu_ok = (lu.info() == Eigen::Success);
    if (lu_ok) {
        v = lu.solve(rhs);
        for (int it = 0; it < opt.refine_iters; ++it) {
            VectorXc r = rhs - A * v;
            if (r.norm() < 1e-16 * v.norm()) break;
            v += lu.solve(r);
        }
    }

    if (!lu_ok || !v.allFinite()) {
        // fallback: dense null space for small problems
        if (d <= 64) {
            MatrixXc Ld = MatrixXc(L.generator);
            Eigen::JacobiSVD<MatrixXc> svd(Ld, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            double tol = 1e-10 * sv(0);
            int nullity = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i)
                if (sv(i) < tol) ++nullity;
            if (nullity == 0)
                throw NonUniqueSteadyState("steady_state: no null vector found");
            if (nullity > 1)
                throw NonUniqueSteadyState("steady_state: degenerate null space (dim " +
                                           std::to_string(nullity) + ")");
            v = svd.matrixV().col(D - 1);
        } else {
            throw NonUniqueSteadyState("steady_state: sparse factorization failed");
        }
    }

    DensityMatrix rho = detail::finalize_steady(L.space, v, L, opt.residual_tol);

    if (opt.check_uniqueness && lu_ok) {
        VectorXc v2 = lu.solve(rhs2);
        if (!v2.allFinite())
            throw NonUniqueSteadyState("steady_state: perturbed solve diverged (singular system)");
        detail::check_second_direction(L, v, v2);
    }
    return rho;
}

// ---------------------------------------------------------------------------
// evolution records

struct EvolutionRecord {
    std::vector<double> times;
    std::vector<StateVector> pure_states;    // closed evolution
    std::vector<DensityMatrix> mixed_states; // open evolution
    std::map<std::string, std::vector<complexd>> observables;
};

using NamedOps = std::vector<std::pair<std::string, Operator>>;

inline NamedOps default_observables(const SpaceDescriptor& space) {
    return {{"n_a", number_operator(space, Subsystem::photon)},
            {"n_b", number_operator(space, Subsystem::phonon)},
            {"n_m", number_operator(space, Subsystem::magnon)},
            {"p_e", number_operator(space, Subsystem::atom)}};
}

// Closed (unitary) evolution via the spectral decomposition of H: exact up to
// the Hermitian eigensolve, so norm drift stays at machine precision.
inline EvolutionRecord evolve_closed(const StateVector& psi0, const Operator& H,
                                     const std::vector<double>& times,
                                     const NamedOps& observables = {}) {
    if (!(psi0.space == H.space)) throw InvalidArgument("evolve_closed: space mismatch");
    if (times.empty()) throw InvalidArgument("evolve_closed: empty time grid");
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) throw InvalidArgument("evolve_closed: times must be ascending");
    double herm = (H.matrix - H.matrix.adjoint()).norm();
    if (herm > 1e-10 * std::max(1.0, H.matrix.norm()))
        throw InvalidArgument("evolve_closed: Hamiltonian is not Hermitian");

    Eigen::SelfAdjointEigenSolver<MatrixXc> es(H.matrix);
    const MatrixXc& V = es.eigenvectors();
    const Eigen::VectorXd& E = es.eigenvalues();
    VectorXc c0 = V.adjoint() * psi0.amplitudes;

    EvolutionRecord rec;
    rec.times = times;
    rec.pure_states.reserve(times.size());
    for (double t : times) {
        VectorXc phase(E.size());
        for (Eigen::Index k = 0; k < E.size(); ++k)
            phase(k) = std::exp(complexd(0.0, -E(k) * t)) * c0(k);
        StateVector psi(psi0.space, V * phase);
        for (const auto& [name, op] : observables)
            rec.observables[name].push_back(expectation(psi, op));
        rec.pure_states.push_back(std::move(psi));
    }
    return rec;
}

// Open evolution: adaptive RK45 on vec(rho). Hermiticity is restored by
// symmetrization at each sample; trace drift is monitored, not renormalized.
inline EvolutionRecord evolve_open(const DensityMatrix& rho0, const Liouvillian& L,
                                   const std::vector<double>& times,
                                   const NamedOps& observables = {}, OdeOptions ode = {}) {
    if (!(rho0.space == L.space)) throw InvalidArgument("evolve_open: space mismatch");
    if (times.empty()) throw InvalidArgument("evolve_open: empty time grid");
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) throw InvalidArgument("evolve_open: times must be ascending");

    const SparseMatrixXc& G = L.generator;
    Rk45 stepper([&G](double, const VectorXc& y, VectorXc& dy) { dy = G * y; }, ode);

    EvolutionRecord rec;
    rec.times = times;
    rec.mixed_states.reserve(times.size());
    VectorXc v = vectorize(rho0.matrix);
    double t = times.front();
    if (t > 0) {
        VectorXc v0 = vectorize(rho0.matrix);
        stepper.integrate(0.0, t, v0);
        v = v0;
    }
    for (size_t i = 0; i < times.size(); ++i) {
        if (i > 0) stepper.integrate(times[i - 1], times[i], v);
        MatrixXc rho = unvectorize(v, L.dim());
        rho = 0.5 * (rho + rho.adjoint()).eval();
        double tr_err = std::abs(rho.trace() - complexd(rho0.matrix.trace()));
        if (tr_err > 1e-6)
            throw IntegratorFailure("evolve_open: trace drift " + std::to_string(tr_err));
        DensityMatrix dm(L.space, std::move(rho));
        for (const auto& [name, op] : observables)
            rec.observables[name].push_back(expectation(dm, op));
        rec.mixed_states.push_back(std::move(dm));
    }
    return rec;
}

} // namespace nrb
