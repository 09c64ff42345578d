#pragma once

#include <vector>

#include "cfs/point.hpp"
#include "cfs/types.hpp"

namespace cfs {

// The nontrivial eigenvalues of an operator product xy, padded with exact
// zeros to length 2n. Zeros count as real for classification purposes.
struct ClosedChainSpectrum {
    std::vector<Complex> eigenvalues;
    int spin_dim = 0;
};

enum class CausalClass { Timelike, Spacelike, Lightlike };

const char* to_string(CausalClass c);

// Eigenvalues of xy computed on an invariant subspace of dimension
// rank(x), never on the full particle-space product.
ClosedChainSpectrum product_spectrum(const CausalFermionPoint& x,
                                     const CausalFermionPoint& y);

// Timelike: all eigenvalues real. Spacelike: all strictly complex with
// pairwise equal moduli. Lightlike: everything else (the residual class,
// which also absorbs boundary cases at the tolerance).
CausalClass classify(const ClosedChainSpectrum& spec,
                     double tol_rel = tol::classify_rel);

// Sum of |lambda_i| (the spectral weight |xy|).
double spectral_weight(const ClosedChainSpectrum& spec);

// Sum of |lambda_i|^2 (the spectral weight |(xy)^2|).
double spectral_weight_sq(const ClosedChainSpectrum& spec);

} // namespace cfs
