#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "cfs/point.hpp"
#include "cfs/types.hpp"

namespace cfs::sphere {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b);
Vec3 normalized(const Vec3& v);
double geodesic(const Vec3& a, const Vec3& b);

// Pair potential as a function of the cosine of the enclosed angle:
// 2 tau^2 (1 + c) (2 - tau^2 (1 - c)). Throws DomainError outside [-1,1]
// or for tau < 1.
double d_function(double c, double tau);

// max(0, d_function): the clipped pair Lagrangian on the sphere.
double sphere_lagrangian(const Vec3& x, const Vec3& y, double tau);

// Eigenvalue pair 1 + tau^2 c +- sqrt(2 tau^2 (1+c) - tau^4 (1-c^2)) of
// the product of two embedded points, principal branch when the radicand
// is negative.
std::pair<Complex, Complex> pair_eigenvalues(double c, double tau);

// Opening angle of the timelike cone: arccos(1 - 2/tau^2) for tau > 1,
// no value at tau = 1 (the potential never changes sign). Throws
// DomainError for tau < 1.
std::optional<double> theta_max(double tau);

// The 2x2 operator tau (x . sigma) + 1, a valid point for spin dimension 1.
CausalFermionPoint embed(const Vec3& x, double tau);

struct SphereConfiguration {
    double tau = 1.0;
    std::vector<Vec3> points;
    std::vector<double> weights;
};

// Validates unit norms, simplex weights, tau >= 1.
SphereConfiguration make_config(double tau, std::vector<Vec3> points,
                                std::vector<double> weights);

// Weighted double sum of the clipped potential, diagonal included.
double sphere_action(const SphereConfiguration& config);

// The fixed-trace functional reported alongside the action: weighted
// double sum of (|l1| + |l2|)^2 over embedded pairs.
double sphere_constraint(const SphereConfiguration& config);

// Greedy merge of points within the geodesic tolerance; cluster centers
// are weight-averaged and renormalized, weights summed.
SphereConfiguration support_clusters(const SphereConfiguration& config,
                                     double merge_tolerance);

enum class PlatonicSolid { Tetra, Octa, Cube, Icosa, Dodeca };

// Canonical vertex coordinates with equal weights.
SphereConfiguration platonic(PlatonicSolid solid, double tau);

} // namespace cfs::sphere
