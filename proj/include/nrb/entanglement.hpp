#pragma once

// Quantum-Fisher-information entanglement witness. For a chosen partition the
// state is reduced, local operator sets are assembled ((sx,sy,sz) for the
// atom; (x, p, x^2, p^2, (xp+px)/2) for a mode), and the witness is the top
// eigenvalue of M = Q - 4*Gamma: F_Q(c) > 4 * sum_j Var(c_j . A_j) is a
// sufficient condition for entanglement across the partition.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"

namespace nrb {

// ---------------------------------------------------------------------------
// spectral decomposition

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues; // retained, descending, >= rank_tol
    MatrixXc eigenvectors;       // matching columns
    double rank_tol = 1e-10;
    Eigen::Index full_dimension = 0;

    Eigen::Index rank() const { return eigenvalues.size(); }

    MatrixXc reconstruct() const {
        MatrixXc rho = MatrixXc::Zero(full_dimension, full_dimension);
        for (Eigen::Index k = 0; k < rank(); ++k)
            rho += eigenvalues(k) * eigenvectors.col(k) * eigenvectors.col(k).adjoint();
        return rho;
    }
};

inline SpectralDecomposition spectral_decompose(const MatrixXc& rho, double rank_tol = 1e-10) {
    const Eigen::Index d = rho.rows();
    if (rho.cols() != d) throw InvalidArgument("spectral_decompose: matrix is not square");
    if ((rho - rho.adjoint()).norm() > 1e-9 * std::max(1.0, rho.norm()))
        throw InvalidState("spectral_decompose: matrix is not Hermitian");
    if (std::abs(rho.trace() - complexd(1.0)) > 1e-8)
        throw InvalidState("spectral_decompose: trace differs from 1");

    Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (rho + rho.adjoint()));
    if (es.info() != Eigen::Success)
        throw InvalidState("spectral_decompose: eigensolver failed");

    std::vector<std::pair<double, Eigen::Index>> order;
    for (Eigen::Index i = 0; i < d; ++i) {
        double p = es.eigenvalues()(i);
        if (p < -1e-8)
            throw InvalidState("spectral_decompose: negative eigenvalue " + std::to_string(p));
        order.emplace_back(std::max(p, 0.0), i);
    }
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    Eigen::Index r = 0;
    while (r < d && order[size_t(r)].first >= rank_tol) ++r;

    SpectralDecomposition dec;
    dec.rank_tol = rank_tol;
    dec.full_dimension = d;
    dec.eigenvalues.resize(r);
    dec.eigenvectors.resize(d, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        dec.eigenvalues(k) = order[size_t(k)].first;
        dec.eigenvectors.col(k) = es.eigenvectors().col(order[size_t(k)].second);
    }
    return dec;
}

inline SpectralDecomposition spectral_decompose(const DensityMatrix& rho,
                                                double rank_tol = 1e-10) {
    return spectral_decompose(rho.matrix, rank_tol);
}

// ---------------------------------------------------------------------------
// local operator sets

struct LocalOperatorSet {
    std::string particle;
    std::vector<std::string> names;
    std::vector<MatrixXc> ops; // Hermitian, embedded in the partition space
};

// kron(I_before, local, I_after) over the factor dimensions
inline MatrixXc embed_in(const std::vector<int>& dims, size_t slot,
                         const MatrixXc& local) {
    if (slot >= dims.size()) throw InvalidArgument("embed_in: slot out of range");
    if (local.rows() != dims[slot] || local.cols() != dims[slot])
        throw InvalidArgument("embed_in: local operator does not match the slot dimension");
    Eigen::Index before = 1, after = 1;
    for (size_t f = 0; f < slot; ++f) before *= dims[f];
    for (size_t f = slot + 1; f < dims.size(); ++f) after *= dims[f];
    MatrixXc out = detail::kron(MatrixXc::Identity(before, before), local);
    return detail::kron(out, MatrixXc::Identity(after, after));
}

inline LocalOperatorSet qubit_operator_set(const std::vector<int>& dims, size_t slot,
                                           const std::string& label) {
    if (dims.at(slot) != 2) throw InvalidArgument("qubit_operator_set: slot dimension is not 2");
    MatrixXc sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, complexd(0, -1), complexd(0, 1), 0;
    sz << 1, 0, 0, -1;
    LocalOperatorSet set;
    set.particle = label;
    set.names = {"sx", "sy", "sz"};
    set.ops = {embed_in(dims, slot, sx), embed_in(dims, slot, sy), embed_in(dims, slot, sz)};
    return set;
}

inline LocalOperatorSet mode_operator_set(const std::vector<int>& dims, size_t slot,
                                          const std::string& label) {
    Eigen::Index n = dims.at(slot);
    if (n < 2) throw InvalidArgument("mode_operator_set: slot dimension below 2");
    MatrixXc a = MatrixXc(detail::fock_annihilator(n));
    MatrixXc ad = a.adjoint();
    MatrixXc x = a + ad;
    MatrixXc p = complexd(0, -1) * (a - ad);
    LocalOperatorSet set;
    set.particle = label;
    set.names = {"x", "p", "x2", "p2", "xp_sym"};
    set.ops = {embed_in(dims, slot, x), embed_in(dims, slot, p), embed_in(dims, slot, x * x),
               embed_in(dims, slot, p * p), embed_in(dims, slot, 0.5 * (x * p + p * x))};
    return set;
}

// per-particle sets in the kept order of a reduced state
inline std::vector<LocalOperatorSet> partition_operator_sets(const ReducedState& reduced) {
    std::vector<LocalOperatorSet> sets;
    for (size_t i = 0; i < reduced.kept.size(); ++i) {
        std::string label = subsystem_name(reduced.kept[i]);
        if (reduced.kept[i] == Subsystem::atom)
            sets.push_back(qubit_operator_set(reduced.dims, i, label));
        else
            sets.push_back(mode_operator_set(reduced.dims, i, label));
    }
    return sets;
}

namespace detail {

inline std::vector<const MatrixXc*> flatten_sets(const std::vector<LocalOperatorSet>& sets) {
    std::vector<const MatrixXc*> ops;
    for (const auto& s : sets)
        for (const auto& op : s.ops) ops.push_back(&op);
    return ops;
}

} // namespace detail

// ---------------------------------------------------------------------------
// QFI and covariance matrices

// (Q)_{jj'} = 2 sum_{k,k'} ((p_k - p_k')^2/(p_k + p_k')) <k|A_j|k'><k'|A_j'|k>,
// including retained<->discarded-kernel cross terms through the orthogonal
// complement projector (weight p_k when p_k' = 0).
inline Eigen::MatrixXd qfi_matrix(const SpectralDecomposition& dec,
                                  const std::vector<LocalOperatorSet>& sets) {
    auto ops = detail::flatten_sets(sets);
    const size_t n = ops.size();
    const Eigen::Index r = dec.rank();
    for (const auto* A : ops)
        if (A->rows() != dec.full_dimension)
            throw InvalidArgument("qfi_matrix: operator dimension mismatch");

    std::vector<MatrixXc> B(n), M(n); // B_A = A Psi (d x r), M_A = Psi^+ A Psi (r x r)
    for (size_t j = 0; j < n; ++j) {
        B[j] = (*ops[j]) * dec.eigenvectors;
        M[j] = dec.eigenvectors.adjoint() * B[j];
    }

    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
    for (size_t j = 0; j < n; ++j)
        for (size_t jp = j; jp < n; ++jp) {
            complexd acc(0, 0);
            for (Eigen::Index k = 0; k < r; ++k)
                for (Eigen::Index kp = 0; kp < r; ++kp) {
                    double ps = dec.eigenvalues(k) + dec.eigenvalues(kp);
                    if (ps < 1e-12) continue;
                    double pd = dec.eigenvalues(k) - dec.eigenvalues(kp);
                    acc += (pd * pd / ps) * M[j](k, kp) * M[jp](kp, k);
                }
            double q = 2.0 * std::real(acc);
            // complement: 4 sum_k p_k Re<k|A P_perp A'|k>
            MatrixXc cross = B[j].adjoint() * B[jp] - M[j] * M[jp];
            double comp = 0.0;
            for (Eigen::Index k = 0; k < r; ++k)
                comp += dec.eigenvalues(k) * std::real(cross(k, k));
            q += 4.0 * comp;
            Q(Eigen::Index(j), Eigen::Index(jp)) = q;
            Q(Eigen::Index(jp), Eigen::Index(j)) = q;
        }
    return Q;
}

namespace detail {

// full symmetrized covariance matrix, cross-particle blocks included
inline Eigen::MatrixXd covariance_full(const MatrixXc& rho,
                                       const std::vector<LocalOperatorSet>& sets) {
    auto ops = flatten_sets(sets);
    const size_t n = ops.size();
    for (const auto* A : ops)
        if (A->rows() != rho.rows())
            throw InvalidArgument("covariance_matrix: operator dimension mismatch");
    std::vector<double> means(n);
    for (size_t j = 0; j < n; ++j) means[j] = std::real(((*ops[j]) * rho).trace());
    Eigen::MatrixXd C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (size_t j = 0; j < n; ++j)
        for (size_t jp = j; jp < n; ++jp) {
            MatrixXc sym = 0.5 * ((*ops[j]) * (*ops[jp]) + (*ops[jp]) * (*ops[j]));
            double cov = std::real((sym * rho).trace()) - means[j] * means[jp];
            C(Eigen::Index(j), Eigen::Index(jp)) = cov;
            C(Eigen::Index(jp), Eigen::Index(j)) = cov;
        }
    return C;
}

inline std::vector<Eigen::Index> set_offsets(const std::vector<LocalOperatorSet>& sets) {
    std::vector<Eigen::Index> off(sets.size() + 1, 0);
    for (size_t m = 0; m < sets.size(); ++m)
        off[m + 1] = off[m] + Eigen::Index(sets[m].ops.size());
    return off;
}

} // namespace detail

// Block-diagonal covariance: particle-m block is the symmetrized covariance
// within that particle's set, cross-particle blocks are zero, so that
// c . Gamma . c = sum_m Var(c_m . A_m) exactly.
inline Eigen::MatrixXd covariance_matrix(const MatrixXc& rho,
                                         const std::vector<LocalOperatorSet>& sets) {
    Eigen::MatrixXd C = detail::covariance_full(rho, sets);
    auto off = detail::set_offsets(sets);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(C.rows(), C.cols());
    for (size_t m = 0; m < sets.size(); ++m)
        G.block(off[m], off[m], off[m + 1] - off[m], off[m + 1] - off[m]) =
            C.block(off[m], off[m], off[m + 1] - off[m], off[m + 1] - off[m]);
    return G;
}

// ---------------------------------------------------------------------------
// optimal witness and bounds

struct OptimalWitness {
    Eigen::VectorXd c; // unit-norm coefficients
    double w = 0;      // top eigenvalue of Q - 4*Gamma
};

inline OptimalWitness optimal_witness(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Gamma) {
    if (Q.rows() != Q.cols() || Gamma.rows() != Gamma.cols() || Q.rows() != Gamma.rows())
        throw InvalidArgument("optimal_witness: dimension mismatch");
    Eigen::MatrixXd M = Q - 4.0 * Gamma;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    Eigen::Index top = M.rows() - 1; // ascending order
    OptimalWitness ow;
    ow.c = es.eigenvectors().col(top);
    ow.w = es.eigenvalues()(top);
    return ow;
}

enum class Partition { ab, am, ab_sigma, am_sigma };

inline const char* partition_name(Partition p) {
    switch (p) {
        case Partition::ab: return "ab";
        case Partition::am: return "am";
        case Partition::ab_sigma: return "ab_sigma";
        case Partition::am_sigma: return "am_sigma";
    }
    throw InvalidArgument("partition_name: unknown partition");
}

inline Partition partition_of(const std::string& name) {
    if (name == "ab") return Partition::ab;
    if (name == "am") return Partition::am;
    if (name == "ab_sigma" || name == "abs") return Partition::ab_sigma;
    if (name == "am_sigma" || name == "ams") return Partition::am_sigma;
    throw InvalidArgument("partition_of: unknown partition '" + name + "'");
}

inline std::vector<Subsystem> partition_subsystems(Partition p) {
    switch (p) {
        case Partition::ab: return {Subsystem::photon, Subsystem::phonon};
        case Partition::am: return {Subsystem::photon, Subsystem::magnon};
        case Partition::ab_sigma: return {Subsystem::atom, Subsystem::photon, Subsystem::phonon};
        case Partition::am_sigma: return {Subsystem::atom, Subsystem::photon, Subsystem::magnon};
    }
    throw InvalidArgument("partition_subsystems: unknown partition");
}

struct WitnessReport {
    std::vector<std::string> particles;
    Eigen::MatrixXd qfi;        // Q
    Eigen::MatrixXd covariance; // Gamma (block diagonal)
    Eigen::VectorXd c;          // optimal unit coefficients
    double f_q = 0;             // c.Q.c
    double b1 = 0;              // 4 sum_m Var(A_m)
    std::optional<double> b2;   // tripartite bipartition bound
    double b3 = 0;              // 4 Var(sum_m A_m)
    double w1 = 0;              // f_q - b1
    std::optional<double> w2;   // f_q - b2
    double d1 = 0;              // max{0, w1}
    std::optional<double> d2;   // max{0, w2}
};

// Witness evaluation on an already-reduced state with explicit operator sets.
inline WitnessReport witness_report(const MatrixXc& rho,
                                    const std::vector<LocalOperatorSet>& sets,
                                    double rank_tol = 1e-10) {
    if (sets.empty()) throw InvalidArgument("witness_report: no operator sets");
    SpectralDecomposition dec = spectral_decompose(rho, rank_tol);
    Eigen::MatrixXd Q = qfi_matrix(dec, sets);
    Eigen::MatrixXd C = detail::covariance_full(rho, sets);
    auto off = detail::set_offsets(sets);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(C.rows(), C.cols());
    for (size_t m = 0; m < sets.size(); ++m)
        G.block(off[m], off[m], off[m + 1] - off[m], off[m + 1] - off[m]) =
            C.block(off[m], off[m], off[m + 1] - off[m], off[m + 1] - off[m]);

    OptimalWitness ow = optimal_witness(Q, G);

    const size_t P = sets.size();
    // per-particle variances and cross covariances at the optimal c
    std::vector<double> var(P);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(Eigen::Index(P), Eigen::Index(P));
    for (size_t m = 0; m < P; ++m) {
        Eigen::VectorXd cm = ow.c.segment(off[m], off[m + 1] - off[m]);
        var[m] = cm.dot(C.block(off[m], off[m], cm.size(), cm.size()) * cm);
        for (size_t mp = m + 1; mp < P; ++mp) {
            Eigen::VectorXd cmp = ow.c.segment(off[mp], off[mp + 1] - off[mp]);
            cov(Eigen::Index(m), Eigen::Index(mp)) =
                cm.dot(C.block(off[m], off[mp], cm.size(), cmp.size()) * cmp);
        }
    }
    double var_sum = 0, cov_sum = 0;
    for (size_t m = 0; m < P; ++m) var_sum += var[m];
    for (size_t m = 0; m < P; ++m)
        for (size_t mp = m + 1; mp < P; ++mp) cov_sum += cov(Eigen::Index(m), Eigen::Index(mp));

    WitnessReport rep;
    for (const auto& s : sets) rep.particles.push_back(s.particle);
    rep.qfi = std::move(Q);
    rep.covariance = std::move(G);
    rep.c = ow.c;
    rep.f_q = ow.c.dot(rep.qfi * ow.c);
    rep.b1 = 4.0 * var_sum;
    rep.b3 = 4.0 * (var_sum + 2.0 * cov_sum);
    if (P == 3) {
        // biseparable bound: max over bipartitions {xy|z} of Var(A_x+A_y)+Var(A_z)
        double best = -std::numeric_limits<double>::infinity();
        for (size_t z = 0; z < 3; ++z) {
            size_t x = (z + 1) % 3, y = (z + 2) % 3;
            size_t lo = std::min(x, y), hi = std::max(x, y);
            double v = var_sum + 2.0 * cov(Eigen::Index(lo), Eigen::Index(hi));
            best = std::max(best, v);
        }
        rep.b2 = 4.0 * best;
        rep.w2 = rep.f_q - *rep.b2;
        rep.d2 = std::max(0.0, *rep.w2);
    }
    rep.w1 = ow.w; // equals f_q - b1 because Gamma is block diagonal
    rep.d1 = std::max(0.0, rep.w1);
    return rep;
}

// Partition-level entry point on the full model space.
inline WitnessReport witness_report(const DensityMatrix& rho, Partition partition,
                                    double rank_tol = 1e-10) {
    ReducedState red = partial_trace(rho, partition_subsystems(partition));
    return witness_report(red.matrix, partition_operator_sets(red), rank_tol);
}

} // namespace nrb
