#pragma once

#include <vector>

#include "cfs/point.hpp"
#include "cfs/spin_space.hpp"

namespace cfs {

// Adjoint with respect to an indefinite spin gram: X* = G^{-1} X^dag G.
MatrixC gram_adjoint(const MatrixC& a, const MatrixC& gram);
bool is_gram_symmetric(const MatrixC& a, const MatrixC& gram,
                       double tolerance = tol::spectral);

// Orthonormal basis (w.r.t. Re tr(X^dag Y)) of the real vector space of
// gram-symmetric endomorphisms; dimension 16 for a four-dimensional spin
// space. Deterministic for a fixed gram.
std::vector<MatrixC> symmetric_basis(const MatrixC& gram);

// Largest principal angle between the real spans of two matrix families,
// in radians. Families must have equal member shapes and sizes.
double subspace_distance(const std::vector<MatrixC>& a, const std::vector<MatrixC>& b);

// Scalar coefficient of (1/2){x, y}; real whenever both arguments are
// gram-symmetric. This is the inner product on frame representatives.
double tangent_form(const MatrixC& x, const MatrixC& y);

// Gram-symmetric involution whose associated form <.|v .> is positive
// definite. `gram` is the spin gram the operator refers to.
struct SignOperator {
    MatrixC matrix;
    MatrixC gram;
};

// Five gram-symmetric generators whose pairwise anticommutators are
// multiples of the identity; `gram` collects the scalars, has signature
// (1,4), and basis[0] is the defining sign operator with <e0,e0> = 1.
struct CliffordSubspace {
    std::vector<MatrixC> basis;
    Eigen::Matrix<double, 5, 5> gram;
    MatrixC spin_gram;
};

// Output of the synchronization solve: the generator anticommutes with
// both input sign operators and unitary = exp(i generator) conjugates the
// distinguished subspace of the first onto that of the second.
struct SyncResult {
    MatrixC generator;
    MatrixC unitary;
};

// A tangent direction held as a concrete representative inside one
// distinguished subspace, together with its coordinates there.
struct TangentVector {
    MatrixC representative;
    Eigen::Matrix<double, 5, 1> coordinates;
    CliffordSubspace frame;
};

// Sign operator whose +-1 eigenspaces are the positive/negative spectral
// subspaces of (-x) restricted to the spin space. Throws NotRegular when
// the spin space is not four-dimensional, DegenerateSpectrum when an
// eigenvalue of the restriction sits at zero.
SignOperator euclidean_sign(const CausalFermionPoint& x, const SpinSpaceBasis& s);

// True when the closed chain of (x, y) has a strictly positive spectrum
// and every eigenspace is definite w.r.t. the spin gram. False for
// non-regular points; symmetric in its arguments.
bool properly_timelike(const CausalFermionPoint& x, const CausalFermionPoint& y);

// Sign operator of the definite-subspace decomposition of the closed
// chain. Throws NotProperlyTimelike.
SignOperator directional_sign(const CausalFermionPoint& x, const CausalFermionPoint& y);

// Numerical rank of [v, w] equals four (singular value cutoff 1e-8
// relative to the largest).
bool generically_separated(const SignOperator& v, const SignOperator& w);

// The distinguished subspace containing `v`, singled out jointly with the
// synchronization generator for the pair (v, partner). Throws
// NotGenericallySeparated, NoConvergence.
CliffordSubspace clifford_extension(const SignOperator& v, const SignOperator& partner);

// Solves for the generator rho with {s, rho} = 0 = {v, rho} such that
// exp(i rho) maps the distinguished subspace of s onto that of v. When
// {s, v} is a multiple of the identity the generator is zero. Among the
// discrete solution branches the one of smallest norm is returned; it is
// the unique branch that vanishes continuously as the anticommutator
// approaches a scalar. A near-tie between branches (which occurs only
// next to the rank-degenerate wall of the commutator) is reported as
// NoConvergence rather than silently resolved.
SyncResult synchronize(const SignOperator& s, const SignOperator& v);

} // namespace cfs
