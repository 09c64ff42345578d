#pragma once

#include <vector>

#include "cfs/geometry.hpp"
#include "cfs/point.hpp"

namespace cfs {

// Gram-unitary identification of the spin space at the second point with
// the spin space at the first, together with the phase that fixes it
// inside the admissible band (-pi/2, -pi/4) u (pi/4, pi/2).
struct SpinConnectionMap {
    MatrixC matrix;
    double phase = 0.0;
};

enum class TimeOrientation { Future, Past };

// Isometry between two five-dimensional tangent frames, stored as real
// coordinates from domain basis to codomain basis.
struct MetricConnectionMap {
    Eigen::Matrix<double, 5, 5> coordinates;
    CliffordSubspace domain;
    CliffordSubspace codomain;
};

enum class TransportMode { Metric, SpinSpliced, SpinUnspliced };

// Composition over a chain of points, read codomain-first: the result
// maps data at the last point to data at the first. Spin modes fill
// spin_map; metric mode fills metric. A chain whose endpoints coincide
// closes up to an endomorphism of one tangent frame.
struct TransportResult {
    TransportMode mode = TransportMode::Metric;
    MatrixC spin_map;
    MetricConnectionMap metric;
};

// Residuals of the defining relations of the pairwise connection, for
// diagnostics and reporting. All comparisons are Frobenius norms scaled
// by the size of the compared objects; frame residuals are principal
// angles.
struct SpinConnectionReport {
    double adjoint_residual = 0.0;    // map equals the adjoint of its reverse
    double inverse_residual = 0.0;    // map composed with its reverse is 1
    double direction_residual = 0.0;  // conjugation carries the reverse direction operator
    double frame_residual = 0.0;      // conjugation carries the distinguished frame
    double phase_forward = 0.0;
    double phase_backward = 0.0;
    double phase_antisymmetry = 0.0;  // |phi_xy + phi_yx| modulo 2 pi
    TimeOrientation orientation = TimeOrientation::Future;
};

// Four directions spanning the orthogonal complement of a spacelike
// tangent vector, with the restricted form and the involution built from
// the vector itself.
struct ReducedTangent {
    std::vector<MatrixC> basis;
    Eigen::Matrix4d gram;
    MatrixC chiral;
};

struct ChiralSymmetryReport {
    double max_orthogonality = 0.0;  // worst pairing with a direction vector
    double max_parallelism = 0.0;    // worst transport mismatch
    int pairs_checked = 0;
    int pairs_skipped = 0;
};

// Expresses a gram-symmetric matrix in a tangent frame; throws
// NoConvergence when the matrix leaves the frame span beyond tolerance.
TangentVector tangent_in_frame(const MatrixC& representative,
                               const CliffordSubspace& frame);

bool spin_connectable(const CausalFermionPoint& x, const CausalFermionPoint& y);

// Unique gram-unitary map from the spin space at y to the one at x with
// phase in the admissible band. Throws NotSpinConnectable with the failing
// condition ("not properly timelike", "not generically separated",
// "phase on quarter grid"); solver breakdowns surface as NoConvergence.
SpinConnectionMap spin_connection(const CausalFermionPoint& x,
                                  const CausalFermionPoint& y);

SpinConnectionReport check_spin_connection(const CausalFermionPoint& x,
                                           const CausalFermionPoint& y);

// Future when the phase of the connection toward y is positive.
TimeOrientation time_orientation(const CausalFermionPoint& x,
                                 const CausalFermionPoint& y);

// Unit timelike tangent vector at x pointing toward y, expressed in the
// distinguished frame of the pair at x.
TangentVector directional_tangent(const CausalFermionPoint& x,
                                  const CausalFermionPoint& y);

// Isometry from the tangent frame of the pair at y to the one at x.
MetricConnectionMap metric_connection(const CausalFermionPoint& x,
                                      const CausalFermionPoint& y);

// Applies an isometry to a vector expressed in its domain frame.
TangentVector transport_tangent(const MetricConnectionMap& map,
                                const TangentVector& u);

// Gauge correction on the spin space at x when a composition switches the
// neighbor it was built toward from y to z. Identity when y = z.
MatrixC splice_map(const CausalFermionPoint& x, const CausalFermionPoint& z,
                   const CausalFermionPoint& y);

// Composes pairwise transports along consecutive points, inserting the
// splice corrections at interior points (metric and spliced spin modes).
// Throws NotSpinConnectable naming the failing link index.
TransportResult transport_chain(const std::vector<CausalFermionPoint>& points,
                                TransportMode mode);

// Holonomy of the metric transport around the triangle x -> z -> y -> x,
// as an endomorphism of the tangent frame at x.
MetricConnectionMap metric_curvature(const CausalFermionPoint& x,
                                     const CausalFermionPoint& y,
                                     const CausalFermionPoint& z);

// Orthogonal complement of a spacelike tangent vector inside its frame;
// the restricted form has signature (1,3) and chiral squares to 1.
// Throws NotSpacelike when the vector is not spacelike.
ReducedTangent reduce_tangent(const TangentVector& u);

// Checks a per-point spacelike candidate field for orthogonality to the
// pairwise direction vectors and for invariance under the metric
// transport, over all ordered pairs that support the construction.
ChiralSymmetryReport verify_chiral_symmetry(
    const DiscreteUniversalMeasure& system,
    const std::vector<TangentVector>& candidate);

} // namespace cfs
