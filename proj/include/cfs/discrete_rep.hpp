#pragma once

#include <vector>

#include "cfs/point.hpp"
#include "cfs/spin_space.hpp"

namespace cfs {

// Finite Krein-space form of a discrete system: the direct sum of spin
// spaces with its indefinite inner product, the family of coordinate
// projectors, and the fermionic operator in blocks.
struct DiscreteSpacetimeRep {
    int krein_dim = 0;
    int spin_dim = 0;
    MatrixC krein_gram;          // Hermitian, invertible; block diagonal
    std::vector<int> block_offset;
    std::vector<int> block_size;
    MatrixC fermionic_operator;  // blocks P(x_i, x_j) rho_j
    // Measure weight absorbed into each gram block; all ones when the rep
    // was given abstractly rather than assembled from a measure.
    std::vector<double> block_weight;

    int blocks() const { return static_cast<int>(block_size.size()); }
    MatrixC projector(int i) const; // E_i, idempotent, summing to identity
};

// Residuals of the two defining properties: symmetry of S P and positive
// semi-definiteness of -S P.
struct RepPropertyReport {
    double symmetry_residual = 0.0;   // max-norm of SP - (SP)^dag, relative
    double positivity_min_eig = 0.0;  // smallest eigenvalue of -SP Hermitian part
};

RepPropertyReport check_rep_properties(const DiscreteSpacetimeRep& rep);

// Assembles the Krein representation of a measure: gram blocks rho_i G_i,
// operator blocks P(x_i, x_j) rho_j. Throws ZeroSpinSpace if some point
// has trivial image.
DiscreteSpacetimeRep particle_to_spacetime(const DiscreteUniversalMeasure& measure);

// Recovers local correlation operators from the representation: induced
// positive product on range(P), canonical orthonormalization (descending
// eigenvalue, first nonzero component real positive), then
// F(x)_{ab} = -(1/rho_x) <h_a| S E_x h_b>. Throws DegenerateRange when the
// range collapses below tolerance.
std::vector<CausalFermionPoint> spacetime_to_particle(const DiscreteSpacetimeRep& rep);

struct ProjectorConstraintReport {
    double residual = 0.0;           // norm of (sum rho_i x_i - identity)
    bool projector_checked = false;  // only when the residual passes
    double projector_residual = 0.0; // norm of P^2 - P in the Krein rep
    double trace = 0.0;              // trace of the assembled operator
};

// Verifies sum rho_i x_i = identity and, when it holds, that the
// assembled fermionic operator is idempotent.
ProjectorConstraintReport check_projector_constraint(const DiscreteUniversalMeasure& measure,
                                                     double residual_tol = 1e-8);

} // namespace cfs
