#include "cfs/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "cfs/errors.hpp"

namespace cfs {

const char* to_string(CausalClass c) {
    switch (c) {
        case CausalClass::Timelike: return "Timelike";
        case CausalClass::Spacelike: return "Spacelike";
        default: return "Lightlike";
    }
}

ClosedChainSpectrum product_spectrum(const CausalFermionPoint& x,
                                     const CausalFermionPoint& y) {
    if (x.particle_dim() != y.particle_dim() || x.spin_dim() != y.spin_dim())
        throw DimensionMismatch("product of points with different dimensions");

    ClosedChainSpectrum spec;
    spec.spin_dim = x.spin_dim();
    spec.eigenvalues.assign(2 * static_cast<std::size_t>(x.spin_dim()), Complex(0.0, 0.0));

    const int r = x.rank();
    if (r == 0 || y.rank() == 0) return spec;

    // Nonzero eigenvalues of xy equal those of D_x (V_x^dag y V_x), an
    // r x r matrix on the image of x.
    const MatrixC V = x.range_basis();
    const VectorR d = x.range_eigenvalues();
    MatrixC C = V.adjoint() * y.matrix() * V;
    for (int i = 0; i < r; ++i) C.row(i) *= d(i);

    Eigen::ComplexEigenSolver<MatrixC> es(C, /*computeEigenvectors=*/false);
    for (int i = 0; i < r; ++i) spec.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(i);

    // Deterministic order: descending modulus, then descending real part.
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
              [](const Complex& a, const Complex& b) {
                  const double ma = std::abs(a), mb = std::abs(b);
                  if (ma != mb) return ma > mb;
                  if (a.real() != b.real()) return a.real() > b.real();
                  return a.imag() > b.imag();
              });
    return spec;
}

CausalClass classify(const ClosedChainSpectrum& spec, double tol_rel) {
    if (!(tol_rel > 0.0)) throw DomainError("tol_rel must be positive");
    double norm = 0.0;
    for (const Complex& l : spec.eigenvalues) norm = std::max(norm, std::abs(l));
    if (norm == 0.0) return CausalClass::Timelike;

    bool all_real = true, all_complex = true;
    for (const Complex& l : spec.eigenvalues) {
        if (std::abs(l.imag()) > tol_rel * norm) all_real = false;
        else all_complex = false;
    }
    if (all_real) return CausalClass::Timelike;
    if (all_complex) {
        double mmin = norm, mmax = 0.0;
        for (const Complex& l : spec.eigenvalues) {
            const double m = std::abs(l);
            mmin = std::min(mmin, m);
            mmax = std::max(mmax, m);
        }
        if (mmax - mmin <= tol_rel * norm) return CausalClass::Spacelike;
    }
    return CausalClass::Lightlike;
}

double spectral_weight(const ClosedChainSpectrum& spec) {
    double s = 0.0;
    for (const Complex& l : spec.eigenvalues) s += std::abs(l);
    return s;
}

double spectral_weight_sq(const ClosedChainSpectrum& spec) {
    double s = 0.0;
    for (const Complex& l : spec.eigenvalues) s += std::norm(l);
    return s;
}

} // namespace cfs
