#pragma once

#include <utility>
#include <vector>

#include "cfs/types.hpp"

namespace cfs {

// A point of the operator manifold: a finite-rank self-adjoint operator
// with at most n positive and at most n negative eigenvalues.
// The eigen-decomposition is computed once at validation and reused by
// every downstream operation (spin spaces, kernels, product spectra).
class CausalFermionPoint {
public:
    int particle_dim() const { return static_cast<int>(entries_.rows()); }
    int spin_dim() const { return spin_dim_; }
    const MatrixC& matrix() const { return entries_; }

    // Full spectral data, eigenvalues ascending.
    const VectorR& eigenvalues() const { return evals_; }
    const MatrixC& eigenvectors() const { return evecs_; }

    // Rank at the module's relative eigenvalue cutoff.
    int rank() const { return rank_; }
    std::pair<int, int> signature() const { return {n_pos_, n_neg_}; }

    // Columns spanning the image, ascending eigenvalue order (negative
    // eigenvalues first); empty for the zero operator.
    MatrixC range_basis() const;
    // The corresponding nonzero eigenvalues, same order.
    VectorR range_eigenvalues() const;

    friend CausalFermionPoint validate_point(const MatrixC& matrix, int spin_dim);

private:
    CausalFermionPoint() = default;

    MatrixC entries_;
    int spin_dim_ = 0;
    VectorR evals_;
    MatrixC evecs_;
    double zero_cut_ = 0.0;
    int rank_ = 0;
    int n_pos_ = 0;
    int n_neg_ = 0;
};

// Validates Hermiticity and the signature bound, caching the spectral
// decomposition. Throws NotHermitian or SignatureViolation.
CausalFermionPoint validate_point(const MatrixC& matrix, int spin_dim);

// Weighted counting measure over points sharing particle and spin dims.
struct DiscreteUniversalMeasure {
    std::vector<CausalFermionPoint> points;
    std::vector<double> weights;
    bool normalized = false;
};

// Checks the measure invariants (non-negative weights, matching dims,
// weight sum if the normalized flag is set). Throws DimensionMismatch
// or DomainError.
DiscreteUniversalMeasure make_measure(std::vector<CausalFermionPoint> points,
                                      std::vector<double> weights,
                                      bool normalized = false);

} // namespace cfs
