#include "cfs/point.hpp"

#include <cmath>
#include <string>

#include "cfs/errors.hpp"

namespace cfs {

MatrixC CausalFermionPoint::range_basis() const {
    const int f = particle_dim();
    MatrixC V(f, rank_);
    int k = 0;
    for (int i = 0; i < f; ++i) {
        if (std::abs(evals_(i)) > zero_cut_) V.col(k++) = evecs_.col(i);
    }
    return V;
}

VectorR CausalFermionPoint::range_eigenvalues() const {
    VectorR d(rank_);
    int k = 0;
    for (int i = 0; i < evals_.size(); ++i) {
        if (std::abs(evals_(i)) > zero_cut_) d(k++) = evals_(i);
    }
    return d;
}

CausalFermionPoint validate_point(const MatrixC& matrix, int spin_dim) {
    if (matrix.rows() != matrix.cols())
        throw DimensionMismatch("matrix is not square");
    if (spin_dim < 1) throw DomainError("spin_dim must be >= 1");

    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol::hermitian * scale)
        throw NotHermitian("deviation " + std::to_string(herm) +
                           " exceeds tolerance at scale " + std::to_string(scale));

    CausalFermionPoint p;
    p.spin_dim_ = spin_dim;
    p.entries_ = ((matrix + matrix.adjoint()) * 0.5).eval();

    Eigen::SelfAdjointEigenSolver<MatrixC> es(p.entries_);
    p.evals_ = es.eigenvalues();
    p.evecs_ = es.eigenvectors();

    const double lmax = p.evals_.size() ? p.evals_.cwiseAbs().maxCoeff() : 0.0;
    p.zero_cut_ = tol::rank_cut * lmax;
    for (int i = 0; i < p.evals_.size(); ++i) {
        if (p.evals_(i) > p.zero_cut_) ++p.n_pos_;
        else if (p.evals_(i) < -p.zero_cut_) ++p.n_neg_;
    }
    p.rank_ = p.n_pos_ + p.n_neg_;
    if (p.n_pos_ > spin_dim || p.n_neg_ > spin_dim)
        throw SignatureViolation("eigenvalue signature (" + std::to_string(p.n_pos_) +
                                 "," + std::to_string(p.n_neg_) +
                                 ") exceeds spin dimension " + std::to_string(spin_dim));
    return p;
}

DiscreteUniversalMeasure make_measure(std::vector<CausalFermionPoint> points,
                                      std::vector<double> weights,
                                      bool normalized) {
    if (points.size() != weights.size())
        throw DimensionMismatch("points and weights differ in length");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DomainError("weights must be non-negative");
        sum += w;
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].particle_dim() != points[0].particle_dim() ||
            points[i].spin_dim() != points[0].spin_dim())
            throw DimensionMismatch("points disagree in particle or spin dimension");
    }
    if (normalized && std::abs(sum - 1.0) > 1e-12)
        throw DomainError("normalized measure must have unit weight sum");
    return DiscreteUniversalMeasure{std::move(points), std::move(weights), normalized};
}

} // namespace cfs
