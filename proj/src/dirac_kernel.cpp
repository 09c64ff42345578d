#include "cfs/dirac_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cfs/errors.hpp"

namespace cfs::dirac {
namespace {

// spherical Bessel j0, j1 with series near zero
double sph_j0(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-3) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

double sph_j1(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-3) {
        const double x2 = x * x;
        return x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0));
    }
    return std::sin(x) / (x * x) - std::cos(x) / x;
}

// the three radial amplitudes under the momentum integral: factors of the
// identity, gamma0, and the radial gamma matrix
struct Amplitudes {
    Complex id{};
    Complex g0{};
    Complex rad{};

    Amplitudes& operator+=(const Amplitudes& o) {
        id += o.id;
        g0 += o.g0;
        rad += o.rad;
        return *this;
    }
    Amplitudes operator-(const Amplitudes& o) const {
        return {id - o.id, g0 - o.g0, rad - o.rad};
    }
    Amplitudes operator*(double s) const { return {id * s, g0 * s, rad * s}; }
    double max_abs() const {
        return std::max({std::abs(id), std::abs(g0), std::abs(rad)});
    }
};

struct Integrand {
    double mass;
    double epsilon;
    double t;
    double r;

    Amplitudes operator()(double k) const {
        const double omega = std::sqrt(k * k + mass * mass);
        const double common = k * k / (2.0 * omega);
        const double damp = std::exp(-epsilon * omega);
        const double phase = -t * omega;
        const Complex osc =
            damp * Complex(std::cos(phase), std::sin(phase)) * common;
        const double b0 = sph_j0(k * r);
        Amplitudes a;
        a.id = osc * (mass * b0);
        a.g0 = osc * (-omega * b0);
        a.rad = r > 0.0 ? osc * Complex(0.0, k * sph_j1(k * r)) : Complex(0.0);
        return a;
    }
};

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule
constexpr double kGkNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kGkWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct PanelResult {
    Amplitudes value;
    double error = 0.0;
};

PanelResult gk15(const Integrand& f, double a, double b, long& evals) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Amplitudes kron{};
    Amplitudes gauss{};
    const Amplitudes center = f(mid);
    kron += center * kGkWeights[7];
    gauss += center * kGaussWeights[3];
    for (int i = 0; i < 7; ++i) {
        const double off = half * kGkNodes[i];
        const Amplitudes lo = f(mid - off);
        const Amplitudes hi = f(mid + off);
        Amplitudes sum = lo;
        sum += hi;
        kron += sum * kGkWeights[i];
        if (i % 2 == 1) gauss += sum * kGaussWeights[i / 2];
    }
    evals += 15;
    PanelResult res;
    res.value = kron * half;
    res.error = (kron - gauss).max_abs() * half;
    return res;
}

constexpr long kEvalBudget = 20'000'000;

void refine(const Integrand& f, double a, double b, const PanelResult& seed,
            double tol_abs_per_width, int depth, Amplitudes& total,
            double& total_err, long& evals) {
    if (seed.error <= tol_abs_per_width * (b - a) || depth >= 28) {
        total += seed.value;
        total_err += seed.error;
        return;
    }
    if (evals > kEvalBudget)
        throw QuadratureFailure("radial quadrature exceeded its budget");
    const double mid = 0.5 * (a + b);
    const PanelResult left = gk15(f, a, mid, evals);
    const PanelResult right = gk15(f, mid, b, evals);
    refine(f, a, mid, left, tol_abs_per_width, depth + 1, total, total_err,
           evals);
    refine(f, mid, b, right, tol_abs_per_width, depth + 1, total, total_err,
           evals);
}

Amplitudes integrate_radial(const Integrand& f, double k_max, double rel_tol) {
    // seed panels sized to the oscillation wavelength set by t and r
    const double wavelength = M_PI / (std::abs(f.t) + f.r + 1.0);
    const double width = std::min(wavelength, k_max / 64.0);
    const long n_panels = std::max(1L, static_cast<long>(k_max / width) + 1);
    const double h = k_max / static_cast<double>(n_panels);

    long evals = 0;
    std::vector<PanelResult> seeds(n_panels);
    double scale = 0.0;
    for (long i = 0; i < n_panels; ++i) {
        seeds[i] = gk15(f, i * h, (i + 1) * h, evals);
        scale += seeds[i].value.max_abs();
    }
    scale = std::max(scale, 1e-300);

    // distribute the error budget over the interval proportionally to width
    const double tol_abs_per_width = 0.05 * rel_tol * scale / k_max;
    Amplitudes total{};
    double total_err = 0.0;
    for (long i = 0; i < n_panels; ++i)
        refine(f, i * h, (i + 1) * h, seeds[i], tol_abs_per_width, 0, total,
               total_err, evals);

    if (total_err > rel_tol * scale)
        throw QuadratureFailure("radial quadrature tolerance not met");
    return total;
}

void check_params(const RegularizationParams& p) {
    if (!(p.mass > 0.0)) throw InvalidOptions("mass must be positive");
    if (!(p.epsilon > 0.0))
        throw InvalidOptions("regularization length must be positive");
    if (!(p.k_max_multiplier > 0.0))
        throw InvalidOptions("cutoff multiplier must be positive");
    if (!(p.rel_tolerance > 0.0))
        throw InvalidOptions("quadrature tolerance must be positive");
}

} // namespace

Matrix4 vacuum_kernel(const FourVector& xi, const RegularizationParams& params,
                      const GammaBasis& basis) {
    check_params(params);
    const double r = xi.spatial_norm();
    Integrand f{params.mass, params.epsilon, xi.t, r};
    const double k_max = params.k_max_multiplier / params.epsilon;
    const Amplitudes amp = integrate_radial(f, k_max, params.rel_tolerance);

    const double prefactor = 1.0 / (4.0 * M_PI * M_PI * M_PI);
    Matrix4 radial = Matrix4::Zero();
    if (r > 0.0) {
        radial = (xi.x / r) * basis.gamma[1] + (xi.y / r) * basis.gamma[2] +
                 (xi.z / r) * basis.gamma[3];
    }
    return prefactor * (amp.id * Matrix4::Identity() + amp.g0 * basis.gamma[0] +
                        amp.rad * radial);
}

Matrix4 evaluation_overlap(const FourVector& xi,
                           const RegularizationParams& params,
                           const GammaBasis& basis) {
    check_params(params);
    const double r = xi.spatial_norm();
    // the overlap carries e^{+i omega xi^0}, the mirrored sign of the
    // kernel's phase, so the integrand runs at -xi^0
    Integrand f{params.mass, params.epsilon, -xi.t, r};
    const double k_max = params.k_max_multiplier / params.epsilon;
    const Amplitudes amp = integrate_radial(f, k_max, params.rel_tolerance);

    const double prefactor = 1.0 / (4.0 * M_PI * M_PI * M_PI);
    Matrix4 radial = Matrix4::Zero();
    if (r > 0.0) {
        radial = (xi.x / r) * basis.gamma[1] + (xi.y / r) * basis.gamma[2] +
                 (xi.z / r) * basis.gamma[3];
    }
    // the shell projector swaps the roles of the mass and frequency
    // amplitudes relative to the kernel and rides on an extra gamma0
    return prefactor *
           (-amp.g0 * Matrix4::Identity() - amp.id * basis.gamma[0] +
            amp.rad * radial * basis.gamma[0]);
}

KernelClosedForm kernel_coefficients(const Matrix4& p, const FourVector& xi,
                                     const GammaBasis& basis,
                                     double fit_tolerance) {
    const double xi_norm2 =
        xi.t * xi.t + xi.x * xi.x + xi.y * xi.y + xi.z * xi.z;
    if (xi_norm2 == 0.0)
        throw DomainError("coefficient fit needs a nonzero separation");

    KernelClosedForm cf;
    cf.beta = p.trace() / 4.0;

    // trace projections give the contravariant components directly:
    // tr(gamma^j P)/4 = alpha xi^j
    const std::array<double, 4> comp{xi.t, xi.x, xi.y, xi.z};
    Complex weighted{};
    for (int j = 0; j < 4; ++j)
        weighted += comp[j] * (basis.gamma[j] * p).trace() / 4.0;
    cf.alpha = weighted / xi_norm2;

    const Matrix4 recon =
        cf.alpha * slash(xi, basis) + cf.beta * Matrix4::Identity();
    const double denom = p.norm();
    cf.fit_residual = denom > 0.0 ? (p - recon).norm() / denom : 0.0;
    if (cf.fit_residual > fit_tolerance)
        throw BadFit("kernel is not of Lorentz form: residual " +
                     std::to_string(cf.fit_residual));

    cf.a = 2.0 * std::real(cf.alpha * std::conj(cf.beta));
    cf.b = std::norm(cf.alpha) * xi.minkowski_sq() + std::norm(cf.beta);
    return cf;
}

std::pair<Complex, Complex> chain_eigenvalues(const KernelClosedForm& cf,
                                              const FourVector& xi) {
    const double radicand = cf.a * cf.a * xi.minkowski_sq();
    const Complex root = std::sqrt(Complex(radicand, 0.0));
    return {Complex(cf.b, 0.0) + root, Complex(cf.b, 0.0) - root};
}

namespace {

// worst matched distance between two four-element spectra, relative to the
// largest direct eigenvalue; pairs greedily by proximity
double spectrum_mismatch(const std::array<Complex, 4>& direct,
                         const std::array<Complex, 4>& predicted) {
    double scale = 0.0;
    for (const Complex& v : direct) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;
    std::array<bool, 4> used{};
    double worst = 0.0;
    for (const Complex& d : direct) {
        int best = -1;
        double best_dist = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (used[j]) continue;
            const double dist = std::abs(d - predicted[j]);
            if (best < 0 || dist < best_dist) {
                best = j;
                best_dist = dist;
            }
        }
        used[best] = true;
        worst = std::max(worst, best_dist);
    }
    return worst / scale;
}

} // namespace

IntervalDiagnostics classify_interval(const FourVector& xi,
                                      const RegularizationParams& params,
                                      const GammaBasis& basis) {
    const double euclid =
        xi.t * xi.t + xi.x * xi.x + xi.y * xi.y + xi.z * xi.z;
    if (std::abs(xi.minkowski_sq()) < 0.1 * euclid)
        throw NearLightCone("separation too close to the cone boundary");

    const Matrix4 p = vacuum_kernel(xi, params, basis);
    // the reverse kernel is the exact spin adjoint of the forward one,
    // so a second quadrature would only duplicate rounding
    const Matrix4 p_rev = spin_adjoint_matrix(p, basis);
    const Matrix4 chain = p * p_rev;

    IntervalDiagnostics diag;
    Eigen::ComplexEigenSolver<Matrix4> solver(chain);
    std::array<Complex, 4> direct;
    for (int i = 0; i < 4; ++i) direct[i] = solver.eigenvalues()(i);
    std::sort(direct.begin(), direct.end(), [](const Complex& a,
                                               const Complex& b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    diag.chain_spectrum = direct;

    const double spatial = xi.spatial_norm();
    const double interval_scale =
        std::sqrt(xi.t * xi.t + spatial * spatial);
    const double fit_tol =
        std::max(1e-6, 10.0 * params.epsilon / interval_scale);
    diag.form = kernel_coefficients(p, xi, basis, fit_tol);
    diag.predicted = chain_eigenvalues(diag.form, xi);

    const std::array<Complex, 4> pred{diag.predicted.first,
                                      diag.predicted.first,
                                      diag.predicted.second,
                                      diag.predicted.second};
    diag.chain_mismatch = spectrum_mismatch(direct, pred);

    // self-consistency: the chain rebuilt from the fitted form must land
    // exactly on the predicted pair
    const Matrix4 recon =
        diag.form.alpha * slash(xi, basis) +
        diag.form.beta * Matrix4::Identity();
    const Matrix4 recon_chain = recon * spin_adjoint_matrix(recon, basis);
    Eigen::ComplexEigenSolver<Matrix4> rsolver(recon_chain);
    std::array<Complex, 4> rebuilt;
    for (int i = 0; i < 4; ++i) rebuilt[i] = rsolver.eigenvalues()(i);
    diag.reconstruction_gap = spectrum_mismatch(rebuilt, pred);

    double scale = 0.0;
    for (const Complex& v : direct) scale = std::max(scale, std::abs(v));
    double max_imag = 0.0, max_mod = 0.0, min_mod = 0.0;
    bool first = true;
    for (const Complex& v : direct) {
        if (std::abs(v) > tol::rank_cut * scale)
            max_imag = std::max(max_imag, std::abs(v.imag()) / std::abs(v));
        if (first || std::abs(v) > max_mod) max_mod = std::abs(v);
        if (first || std::abs(v) < min_mod) min_mod = std::abs(v);
        first = false;
    }
    diag.max_imag_ratio = max_imag;
    diag.moduli_spread = max_mod > 0.0 ? (max_mod - min_mod) / max_mod : 0.0;

    ClosedChainSpectrum spec;
    spec.eigenvalues.assign(direct.begin(), direct.end());
    spec.spin_dim = 2;
    diag.causal_class = classify(spec);
    return diag;
}

} // namespace cfs::dirac
