#pragma once

// Truncated Fock-space bookkeeping for the fixed four-subsystem product space
//   atom (2)  x  photon (photon_cutoff+1)  x  phonon (phonon_cutoff+1)  x  magnon (magnon_cutoff+1)
// Basis ordering: atom index outermost, magnon index innermost (row-major over
// (atom, n_a, n_b, n_m)). Atom level 0 is |g>, level 1 is |e>.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "nrb/errors.hpp"

namespace nrb {

using complexd = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using SparseMatrixXc = Eigen::SparseMatrix<complexd>;

enum class Subsystem { atom = 0, photon = 1, phonon = 2, magnon = 3 };

inline const char* subsystem_name(Subsystem s) {
    switch (s) {
        case Subsystem::atom: return "atom";
        case Subsystem::photon: return "photon";
        case Subsystem::phonon: return "phonon";
        case Subsystem::magnon: return "magnon";
    }
    return "?";
}

struct BasisLabels {
    int atom; // 0 = |g>, 1 = |e>
    int n_a;
    int n_b;
    int n_m;
    bool operator==(const BasisLabels&) const = default;
};

struct SpaceDescriptor {
    int photon_cutoff = 0;
    int phonon_cutoff = 0;
    int magnon_cutoff = 0;

    // factor dimensions in basis order (atom, photon, phonon, magnon)
    std::array<int, 4> factor_dims() const {
        return {2, photon_cutoff + 1, phonon_cutoff + 1, magnon_cutoff + 1};
    }

    int dimension() const {
        auto d = factor_dims();
        return d[0] * d[1] * d[2] * d[3];
    }

    int index(const BasisLabels& l) const {
        auto d = factor_dims();
        if (l.atom < 0 || l.atom >= 2 || l.n_a < 0 || l.n_a >= d[1] || l.n_b < 0 ||
            l.n_b >= d[2] || l.n_m < 0 || l.n_m >= d[3])
            throw InvalidArgument("basis labels out of range for this space");
        return ((l.atom * d[1] + l.n_a) * d[2] + l.n_b) * d[3] + l.n_m;
    }

    BasisLabels labels(int index) const {
        auto d = factor_dims();
        if (index < 0 || index >= dimension())
            throw InvalidArgument("basis index out of range");
        BasisLabels l{};
        l.n_m = index % d[3];
        index /= d[3];
        l.n_b = index % d[2];
        index /= d[2];
        l.n_a = index % d[1];
        l.atom = index / d[1];
        return l;
    }

    bool operator==(const SpaceDescriptor&) const = default;
};

// A cutoff of n keeps Fock levels 0..n for that mode.
inline SpaceDescriptor build_space(int photon_cutoff, int phonon_cutoff, int magnon_cutoff) {
    if (photon_cutoff < 1 || phonon_cutoff < 1 || magnon_cutoff < 1)
        throw InvalidArgument("Fock cutoffs must all be >= 1");
    return SpaceDescriptor{photon_cutoff, phonon_cutoff, magnon_cutoff};
}

// Dense operator on the full product space. Dimensions stay small (<= a few
// hundred) so dense storage is the workhorse; sparse views are built on demand
// where sparsity pays off (Liouvillian assembly, trajectory propagation).
struct Operator {
    SpaceDescriptor space;
    MatrixXc matrix;

    Operator() = default;
    Operator(SpaceDescriptor s, MatrixXc m) : space(s), matrix(std::move(m)) {
        if (matrix.rows() != space.dimension() || matrix.cols() != space.dimension())
            throw InvalidArgument("operator matrix does not match space dimension");
    }

    Operator dagger() const { return Operator(space, matrix.adjoint()); }

    SparseMatrixXc sparse(double drop_tol = 0.0) const {
        return matrix.sparseView(1.0, drop_tol);
    }

    Operator operator*(const Operator& o) const {
        require_same_space(o);
        return Operator(space, matrix * o.matrix);
    }
    Operator operator+(const Operator& o) const {
        require_same_space(o);
        return Operator(space, matrix + o.matrix);
    }
    Operator operator-(const Operator& o) const {
        require_same_space(o);
        return Operator(space, matrix - o.matrix);
    }
    friend Operator operator*(complexd c, const Operator& o) {
        return Operator(o.space, c * o.matrix);
    }

    void require_same_space(const Operator& o) const {
        if (!(space == o.space))
            throw InvalidArgument("operators live on different spaces");
    }
};

namespace detail {

// single-factor annihilation operator on an N-dimensional truncated Fock space
inline MatrixXc fock_annihilator(int N) {
    MatrixXc a = MatrixXc::Zero(N, N);
    for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

inline MatrixXc kron(const MatrixXc& A, const MatrixXc& B) {
    MatrixXc out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

// embed a single-factor operator at the given slot (0=atom,...,3=magnon)
inline MatrixXc embed(const SpaceDescriptor& space, int slot, const MatrixXc& op) {
    auto dims = space.factor_dims();
    MatrixXc out = MatrixXc::Identity(1, 1);
    for (int f = 0; f < 4; ++f) {
        if (f == slot)
            out = kron(out, op);
        else
            out = kron(out, MatrixXc::Identity(dims[f], dims[f]));
    }
    return out;
}

} // namespace detail

inline Operator identity(const SpaceDescriptor& space) {
    return Operator(space, MatrixXc::Identity(space.dimension(), space.dimension()));
}

inline Operator mode_annihilator(const SpaceDescriptor& space, Subsystem which) {
    if (which == Subsystem::atom)
        throw InvalidArgument("mode_annihilator: atom is not a bosonic mode; use atom_lowering");
    int slot = static_cast<int>(which);
    int N = space.factor_dims()[static_cast<size_t>(slot)];
    return Operator(space, detail::embed(space, slot, detail::fock_annihilator(N)));
}

inline Operator atom_lowering(const SpaceDescriptor& space) {
    MatrixXc s = MatrixXc::Zero(2, 2);
    s(0, 1) = 1.0; // |g><e|
    return Operator(space, detail::embed(space, 0, s));
}

inline Operator number_operator(const SpaceDescriptor& space, Subsystem which) {
    if (which == Subsystem::atom) {
        Operator s = atom_lowering(space);
        return s.dagger() * s;
    }
    Operator a = mode_annihilator(space, which);
    return a.dagger() * a;
}

struct StateVector {
    SpaceDescriptor space;
    VectorXc amplitudes;

    StateVector() = default;
    StateVector(SpaceDescriptor s, VectorXc v) : space(s), amplitudes(std::move(v)) {
        if (amplitudes.size() != space.dimension())
            throw InvalidArgument("state vector does not match space dimension");
    }

    double norm() const { return amplitudes.norm(); }

    StateVector normalized() const {
        double n = norm();
        if (n <= 0.0) throw InvalidArgument("cannot normalize a zero state");
        return StateVector(space, amplitudes / n);
    }
};

inline StateVector basis_state(const SpaceDescriptor& space, const BasisLabels& l) {
    VectorXc v = VectorXc::Zero(space.dimension());
    v(space.index(l)) = 1.0;
    return StateVector(space, std::move(v));
}

struct DensityMatrix {
    SpaceDescriptor space;
    MatrixXc matrix;

    DensityMatrix() = default;
    DensityMatrix(SpaceDescriptor s, MatrixXc m) : space(s), matrix(std::move(m)) {
        if (matrix.rows() != space.dimension() || matrix.cols() != space.dimension())
            throw InvalidArgument("density matrix does not match space dimension");
    }

    static DensityMatrix from_pure(const StateVector& psi) {
        return DensityMatrix(psi.space, psi.amplitudes * psi.amplitudes.adjoint());
    }

    complexd trace() const { return matrix.trace(); }

    double hermiticity_defect() const { return (matrix - matrix.adjoint()).norm(); }

    // smallest eigenvalue of the Hermitian part; diagnostic for positivity gates
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (matrix + matrix.adjoint()),
                                                   Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

inline complexd expectation(const DensityMatrix& rho, const Operator& op) {
    if (!(rho.space == op.space))
        throw InvalidArgument("expectation: state and operator spaces differ");
    return (op.matrix * rho.matrix).trace();
}

inline complexd expectation(const StateVector& psi, const Operator& op) {
    if (!(psi.space == op.space))
        throw InvalidArgument("expectation: state and operator spaces differ");
    return psi.amplitudes.dot(op.matrix * psi.amplitudes); // Eigen dot conjugates lhs
}

// Partial trace keeping an ordered subset of the four factors (ascending slot
// order). Result is a plain matrix plus the kept factor dimensions; reduced
// spaces are not SpaceDescriptors (those always carry all four subsystems).
struct ReducedState {
    MatrixXc matrix;
    std::vector<int> dims;            // kept factor dimensions, in kept order
    std::vector<Subsystem> kept;      // which subsystems the factors are
};

inline ReducedState partial_trace(const DensityMatrix& rho, const std::vector<Subsystem>& keep) {
    auto dims = rho.space.factor_dims();
    std::array<bool, 4> keep_mask{false, false, false, false};
    for (auto s : keep) {
        int slot = static_cast<int>(s);
        if (keep_mask[static_cast<size_t>(slot)])
            throw InvalidArgument("partial_trace: duplicate subsystem in keep list");
        keep_mask[static_cast<size_t>(slot)] = true;
    }
    if (keep.empty() ) throw InvalidArgument("partial_trace: keep list is empty");

    std::vector<int> kept_slots, kept_dims;
    std::vector<Subsystem> kept_subsys;
    int dkeep = 1, dtrace = 1;
    std::vector<int> traced_slots;
    for (int f = 0; f < 4; ++f) {
        if (keep_mask[static_cast<size_t>(f)]) {
            kept_slots.push_back(f);
            kept_dims.push_back(dims[static_cast<size_t>(f)]);
            kept_subsys.push_back(static_cast<Subsystem>(f));
            dkeep *= dims[static_cast<size_t>(f)];
        } else {
            traced_slots.push_back(f);
            dtrace *= dims[static_cast<size_t>(f)];
        }
    }

    // strides of each factor in the flattened basis index
    std::array<int, 4> stride{};
    stride[3] = 1;
    for (int f = 2; f >= 0; --f) stride[static_cast<size_t>(f)] = stride[static_cast<size_t>(f) + 1] * dims[static_cast<size_t>(f) + 1];

    auto unrank = [&](int r, const std::vector<int>& slots) {
        // map a flat index over `slots` (row-major in slot order) to a base offset
        int offset = 0;
        for (int i = static_cast<int>(slots.size()) - 1; i >= 0; --i) {
            int f = slots[static_cast<size_t>(i)];
            int d = dims[static_cast<size_t>(f)];
            offset += (r % d) * stride[static_cast<size_t>(f)];
            r /= d;
        }
        return offset;
    };

    MatrixXc out = MatrixXc::Zero(dkeep, dkeep);
    for (int i = 0; i < dkeep; ++i) {
        int oi = unrank(i, kept_slots);
        for (int j = 0; j < dkeep; ++j) {
            int oj = unrank(j, kept_slots);
            complexd acc = 0.0;
            for (int t = 0; t < dtrace; ++t) {
                int ot = unrank(t, traced_slots);
                acc += rho.matrix(oi + ot, oj + ot);
            }
            out(i, j) = acc;
        }
    }
    return ReducedState{std::move(out), std::move(kept_dims), std::move(kept_subsys)};
}

} // namespace nrb
