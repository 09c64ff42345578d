#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cfs {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using VectorR = Eigen::VectorXd;

namespace tol {
// Eigenvalues below rank_cut * (largest singular value) count as zero;
// keeps signature counting stable across near-rank-deficient inputs.
inline constexpr double rank_cut = 1e-10;
// Hermiticity: max-norm of (X - X^dagger) relative to the matrix scale.
inline constexpr double hermitian = 1e-12;
// Default relative tolerance for the causal classification.
inline constexpr double classify_rel = 1e-8;
// Spectral comparisons (isospectrality, gauge invariance).
inline constexpr double spectral = 1e-10;
// Geometry residuals (connection postconditions).
inline constexpr double geometry = 1e-8;
} // namespace tol

} // namespace cfs
