#pragma once

#include <array>
#include <vector>

#include "cfs/dirac_kernel.hpp"
#include "cfs/point.hpp"

namespace cfs::dirac {

struct MomentumNode {
    std::array<double, 3> k{};
    double weight = 0.0;  // momentum-space cell volume
};

// Midpoint product grid over a ball of radius k_top in momentum space,
// in spherical coordinates.
std::vector<MomentumNode> spherical_grid(double k_top, int n_radial,
                                         int n_polar, int n_azimuth);

// Finite-rank model of the filled lower shell: two orthonormal states per
// grid node spanning the negative-energy spinor subspace, weighted by the
// damped cell volume. The local correlation operator of each event is
// returned as a measure point of spin dimension 2; the pairwise operator
// products reproduce, up to overall scale, the chains formed from the
// radial kernel integral discretized on the same grid.
// Throws SingularGram when the grid carries no usable states.
DiscreteUniversalMeasure build_finite_vacuum_system(
    const std::vector<FourVector>& events,
    const std::vector<MomentumNode>& grid, const RegularizationParams& params,
    const GammaBasis& basis);

// Vacuum system carried by the span of the sea wavefunctions at the given
// events, four carrier dimensions per event. Pairwise overlaps are the full
// radial momentum integrals, so no momentum truncation enters and the
// operator products match the damped continuum sea to quadrature accuracy.
// Throws SingularGram when the overlap matrix fails to be positive
// semidefinite beyond quadrature error.
DiscreteUniversalMeasure build_projected_vacuum_system(
    const std::vector<FourVector>& events, const RegularizationParams& params,
    const GammaBasis& basis);

} // namespace cfs::dirac
