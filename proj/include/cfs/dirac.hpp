#pragma once

#include <array>

#include <Eigen/Dense>

#include "cfs/types.hpp"

namespace cfs::dirac {

using Matrix4 = Eigen::Matrix4cd;

struct FourVector {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double minkowski_sq() const { return t * t - x * x - y * y - z * z; }
    double spatial_norm() const { return std::sqrt(x * x + y * y + z * z); }
    FourVector operator-() const { return {-t, -x, -y, -z}; }
};

// Dirac representation: time component diagonal, spatial components built
// from the Pauli blocks. The inner product psi^dag gamma0 phi has
// signature (2,2) and every gamma matrix is symmetric with respect to it.
struct GammaBasis {
    std::array<Matrix4, 4> gamma;
    Matrix4 spin_gram;

    static GammaBasis standard();
};

// q_t gamma0 - q_x gamma1 - q_y gamma2 - q_z gamma3
Matrix4 slash(const FourVector& q, const GammaBasis& basis);

// adjoint with respect to the indefinite spin product: gamma0 A^dag gamma0
Matrix4 spin_adjoint_matrix(const Matrix4& a, const GammaBasis& basis);

// Residual of the on-shell projector identity
// (slash(q)+m) gamma0 (slash(q)+m) = 2 q_t (slash(q)+m) for q on the lower
// mass shell, normalized by the projector norm. Throws OffShell when q is
// not on the shell or has non-negative energy.
double gamma_identity_check(const FourVector& q, double mass,
                            const GammaBasis& basis);

} // namespace cfs::dirac
