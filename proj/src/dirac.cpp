#include "cfs/dirac.hpp"

#include <cmath>

#include "cfs/errors.hpp"

namespace cfs::dirac {

GammaBasis GammaBasis::standard() {
    GammaBasis b;
    const Complex I(0.0, 1.0);
    Matrix4 g0 = Matrix4::Zero();
    g0(0, 0) = 1.0;
    g0(1, 1) = 1.0;
    g0(2, 2) = -1.0;
    g0(3, 3) = -1.0;

    Eigen::Matrix2cd s1, s2, s3;
    s1 << 0, 1, 1, 0;
    s2 << 0, -I, I, 0;
    s3 << 1, 0, 0, -1;

    auto spatial = [](const Eigen::Matrix2cd& s) {
        Matrix4 g = Matrix4::Zero();
        g.block<2, 2>(0, 2) = s;
        g.block<2, 2>(2, 0) = -s;
        return g;
    };

    b.gamma = {g0, spatial(s1), spatial(s2), spatial(s3)};
    b.spin_gram = g0;
    return b;
}

Matrix4 slash(const FourVector& q, const GammaBasis& basis) {
    return q.t * basis.gamma[0] - q.x * basis.gamma[1] - q.y * basis.gamma[2] -
           q.z * basis.gamma[3];
}

Matrix4 spin_adjoint_matrix(const Matrix4& a, const GammaBasis& basis) {
    return basis.spin_gram * a.adjoint() * basis.spin_gram;
}

double gamma_identity_check(const FourVector& q, double mass,
                            const GammaBasis& basis) {
    if (!(mass > 0.0)) throw OffShell("mass must be positive");
    const double shell = q.minkowski_sq() - mass * mass;
    if (std::abs(shell) > 1e-10 * std::max(1.0, mass * mass))
        throw OffShell("momentum is not on the mass shell");
    if (!(q.t < 0.0)) throw OffShell("momentum must have negative energy");

    const Matrix4 proj =
        slash(q, basis) + mass * Matrix4::Identity();
    const Matrix4 lhs = proj * basis.gamma[0] * proj;
    const Matrix4 rhs = 2.0 * q.t * proj;
    const double denom = proj.norm();
    if (denom == 0.0) return 0.0;
    return (lhs - rhs).norm() / denom;
}

} // namespace cfs::dirac
