#include "cfs/spin_space.hpp"

#include <string>

#include "cfs/errors.hpp"

namespace cfs {

SpinSpaceBasis spin_space(const CausalFermionPoint& x) {
    SpinSpaceBasis s;
    s.basis = x.range_basis();
    const VectorR d = x.range_eigenvalues();
    s.gram = (-d.cast<Complex>()).asDiagonal();
    auto [np, nn] = x.signature();
    s.signature = {nn, np}; // -d flips the sign pattern
    return s;
}

KernelMatrix kernel(const CausalFermionPoint& x, const CausalFermionPoint& y) {
    if (x.particle_dim() != y.particle_dim() || x.spin_dim() != y.spin_dim())
        throw DimensionMismatch("kernel of points with different dimensions");
    KernelMatrix k;
    k.entries = x.range_basis().adjoint() * y.matrix() * y.range_basis();
    return k;
}

MatrixC closed_chain(const CausalFermionPoint& x, const CausalFermionPoint& y) {
    return kernel(x, y).entries * kernel(y, x).entries;
}

MatrixC spin_adjoint(const KernelMatrix& k, const SpinSpaceBasis& at_x,
                     const SpinSpaceBasis& at_y) {
    return at_y.gram.inverse() * k.entries.adjoint() * at_x.gram;
}

bool is_gram_unitary(const MatrixC& U, const MatrixC& gram, double tolerance) {
    if (U.rows() != gram.rows() || U.cols() != gram.cols()) return false;
    const MatrixC resid = U.adjoint() * gram * U - gram;
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    return resid.cwiseAbs().maxCoeff() <= tolerance * scale;
}

TransformedKernels gauge_transform(const DiscreteUniversalMeasure& measure,
                                   const std::vector<MatrixC>& unitaries) {
    const std::size_t m = measure.points.size();
    if (unitaries.size() != m)
        throw DimensionMismatch("one transformation per point required");

    std::vector<MatrixC> inv(m);
    for (std::size_t i = 0; i < m; ++i) {
        const SpinSpaceBasis s = spin_space(measure.points[i]);
        if (!is_gram_unitary(unitaries[i], s.gram))
            throw NotGramUnitary("transformation at point " + std::to_string(i) +
                                 " does not preserve the spin gram");
        inv[i] = unitaries[i].inverse();
    }

    TransformedKernels out;
    out.kernels.resize(m, std::vector<MatrixC>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            out.kernels[i][j] =
                unitaries[i] * kernel(measure.points[i], measure.points[j]).entries * inv[j];
    return out;
}

} // namespace cfs
