#pragma once

#include <array>
#include <utility>

#include "cfs/dirac.hpp"
#include "cfs/spectrum.hpp"
#include "cfs/types.hpp"

namespace cfs::dirac {

struct RegularizationParams {
    double mass = 1.0;
    double epsilon = 1e-3;
    // radial cutoff is k_max_multiplier / epsilon; the exponential damping
    // makes the discarded tail negligible there
    double k_max_multiplier = 50.0;
    double rel_tolerance = 1e-8;
};

// Lower-shell momentum integral of the regularized two-point kernel,
// reduced to a one-dimensional radial quadrature for the amplitudes
// multiplying the identity, gamma0 and the radial gamma matrix.
// Throws QuadratureFailure when the tolerance cannot be met in budget.
Matrix4 vacuum_kernel(const FourVector& xi, const RegularizationParams& params,
                      const GammaBasis& basis);

// Plain overlap of the sea evaluation maps at separation xi: the momentum
// integral of the damped lower-shell projector times the plane-wave phase.
// Blocks of this matrix form the Gram matrix of the sampled wavefunctions;
// at xi = 0 it is positive semidefinite.
Matrix4 evaluation_overlap(const FourVector& xi,
                           const RegularizationParams& params,
                           const GammaBasis& basis);

struct KernelClosedForm {
    Complex alpha;
    Complex beta;
    double a = 0.0;  // alpha conj(beta) + beta conj(alpha)
    double b = 0.0;  // |alpha|^2 xi^2 + |beta|^2
    double fit_residual = 0.0;
};

// Trace-projection fit of P onto the Lorentz form alpha slash(xi) + beta.
// Throws BadFit when the relative reconstruction residual exceeds
// fit_tolerance; regularization deforms the kernel away from this form at
// order epsilon, so callers probing regularized kernels pass a tolerance
// reflecting their epsilon.
KernelClosedForm kernel_coefficients(const Matrix4& p, const FourVector& xi,
                                     const GammaBasis& basis,
                                     double fit_tolerance = 1e-6);

// b +- sqrt(a^2 xi^2), principal branch; each value carries multiplicity
// two in the 4x4 chain.
std::pair<Complex, Complex> chain_eigenvalues(const KernelClosedForm& cf,
                                              const FourVector& xi);

struct IntervalDiagnostics {
    CausalClass causal_class = CausalClass::Lightlike;
    std::array<Complex, 4> chain_spectrum{};  // directly diagonalized
    std::pair<Complex, Complex> predicted;    // from the fitted form
    KernelClosedForm form;
    double chain_mismatch = 0.0;      // direct spectrum vs prediction
    double reconstruction_gap = 0.0;  // prediction vs the refitted chain
    double max_imag_ratio = 0.0;
    double moduli_spread = 0.0;
};

// Classification of the interval through the spectrum of the closed chain
// P(xi) P(-xi). Throws NearLightCone when |xi^2| falls under the guard
// 0.1 (t^2 + |x|^2): the kernel degenerates near the cone.
IntervalDiagnostics classify_interval(const FourVector& xi,
                                      const RegularizationParams& params,
                                      const GammaBasis& basis);

} // namespace cfs::dirac
