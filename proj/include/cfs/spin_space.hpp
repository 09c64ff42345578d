#pragma once

#include <utility>
#include <vector>

#include "cfs/point.hpp"
#include "cfs/spectrum.hpp"

namespace cfs {

// Orthonormal basis of image(x) together with the indefinite spin scalar
// product <u|v>_x = -<u|x v> expressed in that basis. With the basis
// ordered by ascending eigenvalue the gram is diagonal, positive entries
// first.
struct SpinSpaceBasis {
    MatrixC basis;   // f x r, columns orthonormal in the ambient product
    MatrixC gram;    // r x r, Hermitian, invertible on the span
    std::pair<int, int> signature; // (p, q), p + q = r
};

SpinSpaceBasis spin_space(const CausalFermionPoint& x);

// Matrix of P(x,y) = pi_x y restricted to S_y, mapping S_y -> S_x in the
// two spin bases.
struct KernelMatrix {
    MatrixC entries; // r_x x r_y
};

KernelMatrix kernel(const CausalFermionPoint& x, const CausalFermionPoint& y);

// A_xy = P(x,y) P(y,x), acting on S_x; isospectral to xy.
MatrixC closed_chain(const CausalFermionPoint& x, const CausalFermionPoint& y);

// Adjoint with respect to the two spin scalar products:
// P(x,y)^* = G_y^{-1} P(x,y)^dag G_x, a map S_x -> S_y.
MatrixC spin_adjoint(const KernelMatrix& k, const SpinSpaceBasis& at_x,
                     const SpinSpaceBasis& at_y);

// Checks U^dag G U = G at the tolerance; members of U(p,q) in the local
// spin basis pass.
bool is_gram_unitary(const MatrixC& U, const MatrixC& gram, double tolerance = tol::spectral);

// Kernel matrices of all ordered pairs after the local basis changes
// P(x_i,x_j) -> U_i P(x_i,x_j) U_j^{-1}. Throws NotGramUnitary if some
// transformation does not preserve its local gram.
struct TransformedKernels {
    std::vector<std::vector<MatrixC>> kernels; // [i][j] maps S_j -> S_i
};

TransformedKernels gauge_transform(const DiscreteUniversalMeasure& measure,
                                   const std::vector<MatrixC>& unitaries);

} // namespace cfs
