#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "cfs/action.hpp"
#include "cfs/discrete_rep.hpp"
#include "cfs/errors.hpp"
#include "cfs/point.hpp"
#include "cfs/spectrum.hpp"
#include "cfs/spin_space.hpp"

using namespace cfs;

namespace {

const double kSqrt2 = std::sqrt(2.0);

MatrixC diag2(double a, double b) {
    MatrixC m = MatrixC::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// tau * (x . sigma) + 1 on C^2.
MatrixC bloch(double tau, double x, double y, double z) {
    MatrixC m(2, 2);
    m(0, 0) = 1.0 + tau * z;
    m(0, 1) = tau * Complex(x, -y);
    m(1, 0) = tau * Complex(x, y);
    m(1, 1) = 1.0 - tau * z;
    return m;
}

// Random rank-2 point with one positive and one negative eigenvalue
// embedded in dimension f.
CausalFermionPoint random_point(std::mt19937_64& rng, int f, double lo = 0.3, double hi = 2.0) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> mag(lo, hi);
    MatrixC A(f, f);
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j) A(i, j) = Complex(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<MatrixC> qr(A);
    MatrixC Q = qr.householderQ();
    MatrixC X = mag(rng) * Q.col(0) * Q.col(0).adjoint() - mag(rng) * Q.col(1) * Q.col(1).adjoint();
    return validate_point(X, 1);
}

// Greedy nearest matching; robust against the sort instability of nearly
// coincident real parts in conjugate pairs.
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    REQUIRE(a.size() == b.size());
    std::vector<bool> used(b.size(), false);
    double d = 0.0;
    for (const Complex& va : a) {
        double best = 1e300;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double dist = std::abs(va - b[j]);
            if (dist < best) {
                best = dist;
                arg = j;
            }
        }
        used[arg] = true;
        d = std::max(d, best);
    }
    return d;
}

} // namespace

TEST_CASE("point validation accepts balanced signatures and rejects violations") {
    const CausalFermionPoint p = validate_point(diag2(1.0, -1.0), 1);
    CHECK(p.rank() == 2);
    CHECK(p.signature() == std::pair<int, int>{1, 1});

    CHECK_THROWS_AS(validate_point(diag2(1.0, 1.0), 1), SignatureViolation);

    const CausalFermionPoint q = validate_point(diag2(1.0 + kSqrt2, 1.0 - kSqrt2), 1);
    CHECK(q.signature() == std::pair<int, int>{1, 1});

    MatrixC bad = diag2(1.0, -1.0);
    bad(0, 1) = 0.5; // upper-only entry breaks Hermiticity
    CHECK_THROWS_AS(validate_point(bad, 1), NotHermitian);

    MatrixC rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(validate_point(rect, 1), DimensionMismatch);
}

TEST_CASE("product spectrum on identity-like pair and zero operator") {
    const CausalFermionPoint x = validate_point(diag2(1.0, -1.0), 1);
    const ClosedChainSpectrum s = product_spectrum(x, x);
    REQUIRE(s.eigenvalues.size() == 2);
    CHECK(std::abs(s.eigenvalues[0] - Complex(1.0)) < 1e-14);
    CHECK(std::abs(s.eigenvalues[1] - Complex(1.0)) < 1e-14);

    const CausalFermionPoint zero = validate_point(MatrixC::Zero(2, 2), 1);
    const ClosedChainSpectrum sz = product_spectrum(x, zero);
    CHECK(std::abs(sz.eigenvalues[0]) == 0.0);
    CHECK(std::abs(sz.eigenvalues[1]) == 0.0);
}

TEST_CASE("product spectrum matches the two-level closed form at tau=2, c=-0.5") {
    const double tau = 2.0;
    const CausalFermionPoint x = validate_point(bloch(tau, 0, 0, 1), 1);
    const CausalFermionPoint y =
        validate_point(bloch(tau, std::sqrt(3.0) / 2.0, 0, -0.5), 1);
    const ClosedChainSpectrum s = product_spectrum(x, y);
    const std::vector<Complex> expect = {Complex(-1.0, 2.0 * kSqrt2),
                                         Complex(-1.0, -2.0 * kSqrt2)};
    CHECK(multiset_distance(s.eigenvalues, expect) < 1e-12);
    CHECK(classify(s) == CausalClass::Spacelike);
}

TEST_CASE("product spectrum uses the invariant subspace, matching a dense solve") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const CausalFermionPoint x = random_point(rng, 6);
        const CausalFermionPoint y = random_point(rng, 6);
        const ClosedChainSpectrum s = product_spectrum(x, y);

        Eigen::ComplexEigenSolver<MatrixC> es(x.matrix() * y.matrix(), false);
        std::vector<Complex> dense;
        for (int i = 0; i < 6; ++i) dense.push_back(es.eigenvalues()(i));
        std::sort(dense.begin(), dense.end(),
                  [](const Complex& a, const Complex& b) { return std::abs(a) > std::abs(b); });
        dense.resize(2); // rank(xy) <= 2 here; the rest are numerical zeros
        std::vector<Complex> got(s.eigenvalues.begin(), s.eigenvalues.end());
        CHECK(multiset_distance(got, dense) < 1e-10);
    }
}

TEST_CASE("isospectrality of xy and yx, symmetric classification") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const CausalFermionPoint x = random_point(rng, 4);
        const CausalFermionPoint y = random_point(rng, 4);
        const ClosedChainSpectrum sxy = product_spectrum(x, y);
        const ClosedChainSpectrum syx = product_spectrum(y, x);
        CHECK(multiset_distance(sxy.eigenvalues, syx.eigenvalues) < 1e-10);
        CHECK(classify(sxy) == classify(syx));
    }
}

TEST_CASE("classification of the three kinds") {
    ClosedChainSpectrum timelike{{Complex(1), Complex(1)}, 1};
    CHECK(classify(timelike) == CausalClass::Timelike);

    ClosedChainSpectrum spacelike{{Complex(-1, 2 * kSqrt2), Complex(-1, -2 * kSqrt2)}, 1};
    CHECK(classify(spacelike) == CausalClass::Spacelike);

    ClosedChainSpectrum mixed{{Complex(2, 1), Complex(1, -0.5)}, 1};
    CHECK(classify(mixed) == CausalClass::Lightlike);

    // Padded zeros count as real, so a conjugate pair next to padding is
    // the residual class.
    ClosedChainSpectrum padded{{Complex(0, 1), Complex(0, -1), Complex(0), Complex(0)}, 2};
    CHECK(classify(padded) == CausalClass::Lightlike);

    CHECK_THROWS_AS(classify(timelike, -1.0), DomainError);
}

TEST_CASE("classification is invariant under ambient unitaries") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 50; ++rep) {
        const CausalFermionPoint x = random_point(rng, 4);
        const CausalFermionPoint y = random_point(rng, 4);
        MatrixC A(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) A(i, j) = Complex(gauss(rng), gauss(rng));
        const MatrixC U = Eigen::HouseholderQR<MatrixC>(A).householderQ();
        const CausalFermionPoint xu = validate_point(U * x.matrix() * U.adjoint(), 1);
        const CausalFermionPoint yu = validate_point(U * y.matrix() * U.adjoint(), 1);
        CHECK(multiset_distance(product_spectrum(x, y).eigenvalues,
                                product_spectrum(xu, yu).eigenvalues) < 1e-9);
    }
}

TEST_CASE("lagrangian values and the spacelike annihilation") {
    const CausalFermionPoint x = validate_point(diag2(1.0, -1.0), 1);
    CHECK(lagrangian(x, x) == doctest::Approx(0.0).epsilon(1e-12));

    const CausalFermionPoint e = validate_point(bloch(kSqrt2, 0, 0, 1), 1);
    CHECK(lagrangian(e, e) == doctest::Approx(16.0).epsilon(1e-12));

    const CausalFermionPoint a = validate_point(bloch(2.0, 0, 0, 1), 1);
    const CausalFermionPoint b = validate_point(bloch(2.0, std::sqrt(3.0) / 2.0, 0, -0.5), 1);
    CHECK(lagrangian(a, b) == 0.0); // spacelike pair, exact zero

    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const CausalFermionPoint u = random_point(rng, 3);
        const CausalFermionPoint v = random_point(rng, 3);
        CHECK(lagrangian(u, v) >= 0.0);
    }
}

namespace {

DiscreteUniversalMeasure tetrahedron_sqrt2() {
    const double s = 1.0 / std::sqrt(3.0);
    std::vector<CausalFermionPoint> pts;
    pts.push_back(validate_point(bloch(kSqrt2, s, s, s), 1));
    pts.push_back(validate_point(bloch(kSqrt2, s, -s, -s), 1));
    pts.push_back(validate_point(bloch(kSqrt2, -s, s, -s), 1));
    pts.push_back(validate_point(bloch(kSqrt2, -s, -s, s), 1));
    return make_measure(std::move(pts), {0.25, 0.25, 0.25, 0.25}, true);
}

} // namespace

TEST_CASE("action on the canonical configurations") {
    // Single point: only the diagonal term contributes.
    std::vector<CausalFermionPoint> one;
    one.push_back(validate_point(bloch(kSqrt2, 0, 0, 1), 1));
    const ActionReport single = action(make_measure(std::move(one), {1.0}, true));
    CHECK(single.action_S == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(single.constraint_T == doctest::Approx(36.0).epsilon(1e-12));

    const ActionReport tet = action(tetrahedron_sqrt2());
    CHECK(tet.action_S == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(tet.constraint_T == doctest::Approx(12.0).epsilon(1e-12));

    const ActionReport empty = action(DiscreteUniversalMeasure{});
    CHECK(empty.action_S == 0.0);
    CHECK(empty.constraint_T == 0.0);
}

TEST_CASE("spin spaces: span, gram, signature, degenerate cases") {
    const CausalFermionPoint x = validate_point(diag2(1.0, -1.0), 1);
    const SpinSpaceBasis s = spin_space(x);
    CHECK(s.basis.cols() == 2);
    CHECK(s.signature == std::pair<int, int>{1, 1});
    CHECK(std::abs(s.gram(0, 0) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(s.gram(1, 1) - Complex(-1.0)) < 1e-14);

    MatrixC m3 = MatrixC::Zero(3, 3);
    m3(0, 0) = 2.0;
    m3(1, 1) = -3.0;
    const SpinSpaceBasis s3 = spin_space(validate_point(m3, 1));
    CHECK(s3.basis.cols() == 2);
    CHECK(s3.signature == std::pair<int, int>{1, 1});

    const SpinSpaceBasis sz = spin_space(validate_point(MatrixC::Zero(2, 2), 1));
    CHECK(sz.basis.cols() == 0);
}

TEST_CASE("kernel: restriction at coincidence, chain isospectrality, conjugation") {
    const CausalFermionPoint x = validate_point(diag2(1.0, -1.0), 1);
    const KernelMatrix kxx = kernel(x, x);
    // On the ascending eigenbasis the restriction of x is diag(-1, 1).
    CHECK(std::abs(kxx.entries(0, 0) - Complex(-1.0)) < 1e-14);
    CHECK(std::abs(kxx.entries(1, 1) - Complex(1.0)) < 1e-14);
    CHECK(std::abs(kxx.entries(0, 1)) < 1e-14);

    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const CausalFermionPoint a = random_point(rng, 5);
        const CausalFermionPoint b = random_point(rng, 5);

        const MatrixC A = closed_chain(a, b);
        Eigen::ComplexEigenSolver<MatrixC> es(A, false);
        std::vector<Complex> chain;
        for (int i = 0; i < A.rows(); ++i) chain.push_back(es.eigenvalues()(i));
        std::vector<Complex> prod(product_spectrum(a, b).eigenvalues);
        CHECK(multiset_distance(chain, prod) < 1e-10);

        // P(y,x) equals the spin adjoint of P(x,y).
        const SpinSpaceBasis sa = spin_space(a), sb = spin_space(b);
        const MatrixC adj = spin_adjoint(kernel(a, b), sa, sb);
        CHECK((adj - kernel(b, a).entries).cwiseAbs().maxCoeff() < 1e-10);
    }
}

namespace {

// U(1,1) element for the gram diag(g0, -g1), g0, g1 > 0: a hyperbolic
// rotation conjugated into the scaled basis, times phases.
MatrixC u11(std::mt19937_64& rng, const MatrixC& gram) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rap(-1.0, 1.0);
    const double t = rap(rng), phi = ang(rng), a = ang(rng), b = ang(rng);
    MatrixC H(2, 2);
    H(0, 0) = std::cosh(t);
    H(0, 1) = std::sinh(t) * std::exp(Complex(0, phi));
    H(1, 0) = std::sinh(t) * std::exp(Complex(0, -phi));
    H(1, 1) = std::cosh(t);
    MatrixC U = H;
    U.col(0) *= std::exp(Complex(0, a));
    U.col(1) *= std::exp(Complex(0, b));
    // Rescale into the actual gram normalization diag(g0, -g1).
    const double g0 = gram(0, 0).real(), g1 = -gram(1, 1).real();
    MatrixC S = MatrixC::Zero(2, 2), Si = MatrixC::Zero(2, 2);
    S(0, 0) = std::sqrt(g0);
    S(1, 1) = std::sqrt(g1);
    Si(0, 0) = 1.0 / S(0, 0);
    Si(1, 1) = 1.0 / S(1, 1);
    return Si * U * S;
}

} // namespace

TEST_CASE("gauge transformations preserve spectra, class, and action") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<CausalFermionPoint> pts;
        pts.push_back(random_point(rng, 4));
        pts.push_back(random_point(rng, 4));
        const DiscreteUniversalMeasure m = make_measure(std::move(pts), {0.5, 0.5}, true);

        std::vector<MatrixC> us;
        for (int i = 0; i < 2; ++i) us.push_back(u11(rng, spin_space(m.points[i]).gram));
        const TransformedKernels tk = gauge_transform(m, us);

        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const MatrixC chain = tk.kernels[i][j] * tk.kernels[j][i];
                Eigen::ComplexEigenSolver<MatrixC> es(chain, false);
                std::vector<Complex> got;
                for (int k = 0; k < chain.rows(); ++k) got.push_back(es.eigenvalues()(k));
                std::vector<Complex> ref(product_spectrum(m.points[i], m.points[j]).eigenvalues);
                CHECK(multiset_distance(got, ref) < 1e-9);
            }
        }
    }

    // Identity transformations change nothing.
    std::vector<CausalFermionPoint> pts;
    pts.push_back(validate_point(diag2(1.0, -1.0), 1));
    const DiscreteUniversalMeasure m1 = make_measure(std::move(pts), {1.0}, true);
    const TransformedKernels id = gauge_transform(m1, {MatrixC::Identity(2, 2)});
    CHECK((id.kernels[0][0] - kernel(m1.points[0], m1.points[0]).entries).cwiseAbs().maxCoeff() <
          1e-14);

    // A map that scales one axis is not gram-unitary.
    CHECK_THROWS_AS(gauge_transform(m1, {2.0 * MatrixC::Identity(2, 2)}), NotGramUnitary);
}

TEST_CASE("krein representation satisfies symmetry and positivity") {
    // Single point: P = x restricted to its image.
    std::vector<CausalFermionPoint> one;
    one.push_back(validate_point(diag2(1.0, -1.0), 1));
    const DiscreteSpacetimeRep r1 = particle_to_spacetime(make_measure(std::move(one), {1.0}, true));
    RepPropertyReport rep1 = check_rep_properties(r1);
    CHECK(rep1.symmetry_residual < 1e-12);
    CHECK(rep1.positivity_min_eig >= -1e-10);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> wdist(0.1, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<CausalFermionPoint> pts;
        std::vector<double> ws;
        for (int i = 0; i < 3; ++i) {
            pts.push_back(random_point(rng, 4));
            ws.push_back(wdist(rng));
        }
        const DiscreteSpacetimeRep r = particle_to_spacetime(make_measure(pts, ws, false));
        const RepPropertyReport pr = check_rep_properties(r);
        CHECK(pr.symmetry_residual < 1e-12);
        CHECK(pr.positivity_min_eig >= -1e-10);
    }

    const DiscreteSpacetimeRep rt = particle_to_spacetime(tetrahedron_sqrt2());
    const RepPropertyReport pt = check_rep_properties(rt);
    CHECK(pt.symmetry_residual < 1e-12);
    CHECK(pt.positivity_min_eig >= -1e-10);

    // Projectors: idempotent, mutually orthogonal, summing to identity.
    MatrixC esum = MatrixC::Zero(rt.krein_dim, rt.krein_dim);
    for (int i = 0; i < rt.blocks(); ++i) {
        const MatrixC E = rt.projector(i);
        CHECK((E * E - E).cwiseAbs().maxCoeff() == 0.0);
        for (int j = 0; j < i; ++j)
            CHECK((E * rt.projector(j)).cwiseAbs().maxCoeff() == 0.0);
        esum += E;
    }
    CHECK((esum - MatrixC::Identity(rt.krein_dim, rt.krein_dim)).cwiseAbs().maxCoeff() == 0.0);

    // A zero point cannot enter the representation.
    std::vector<CausalFermionPoint> wz;
    wz.push_back(validate_point(MatrixC::Zero(2, 2), 1));
    CHECK_THROWS_AS(particle_to_spacetime(make_measure(std::move(wz), {1.0}, true)),
                    ZeroSpinSpace);
}

namespace {

DiscreteSpacetimeRep two_block_rep(const VectorC& psi) {
    DiscreteSpacetimeRep rep;
    rep.krein_dim = 4;
    rep.spin_dim = 1;
    rep.block_offset = {0, 2};
    rep.block_size = {2, 2};
    rep.krein_gram = MatrixC::Zero(4, 4);
    rep.krein_gram(0, 0) = 1.0;
    rep.krein_gram(1, 1) = -1.0;
    rep.krein_gram(2, 2) = 1.0;
    rep.krein_gram(3, 3) = -1.0;
    // One occupied state: P phi = -psi <psi|phi>.
    rep.fermionic_operator = -psi * (rep.krein_gram * psi).adjoint();
    return rep;
}

} // namespace

TEST_CASE("two spanning vectors give one particle representation") {
    VectorC psi1(4), psi2(4);
    psi1 << 0, 1, 0, 0;
    psi2 << 0, 1, 1, 1;

    const auto f1 = spacetime_to_particle(two_block_rep(psi1));
    const auto f2 = spacetime_to_particle(two_block_rep(psi2));
    REQUIRE(f1.size() == 2);
    REQUIRE(f2.size() == 2);
    CHECK(f1[0].particle_dim() == 1);
    CHECK(std::abs(f1[0].matrix()(0, 0) - Complex(1.0)) < 1e-12);
    CHECK(std::abs(f1[1].matrix()(0, 0)) < 1e-12);
    for (int x = 0; x < 2; ++x)
        CHECK((f1[x].matrix() - f2[x].matrix()).cwiseAbs().maxCoeff() < 1e-12);

    DiscreteSpacetimeRep degenerate = two_block_rep(psi1);
    degenerate.fermionic_operator.setZero();
    CHECK_THROWS_AS(spacetime_to_particle(degenerate), DegenerateRange);
}

TEST_CASE("representation round trip recovers the points spectrally") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<CausalFermionPoint> pts;
        pts.push_back(random_point(rng, 4));
        pts.push_back(random_point(rng, 4));
        const DiscreteUniversalMeasure m = make_measure(pts, {1.0, 1.0}, false);

        const auto recovered = spacetime_to_particle(particle_to_spacetime(m));
        REQUIRE(recovered.size() == 2);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const auto ref = product_spectrum(m.points[i], m.points[j]);
                const auto got = product_spectrum(recovered[i], recovered[j]);
                CHECK(multiset_distance(ref.eigenvalues, got.eigenvalues) < 1e-8);
            }
        }
    }
}

TEST_CASE("projector constraint on an exactly resolving measure") {
    std::vector<CausalFermionPoint> pts;
    pts.push_back(validate_point(diag2(2.0, -1.0), 1));
    pts.push_back(validate_point(diag2(0.0, 3.0), 1));
    const DiscreteUniversalMeasure m = make_measure(std::move(pts), {0.5, 0.5}, true);

    const ProjectorConstraintReport r = check_projector_constraint(m);
    CHECK(r.residual < 1e-12);
    CHECK(r.projector_checked);
    CHECK(r.projector_residual < 1e-8);
    CHECK(r.trace == doctest::Approx(2.0).epsilon(1e-10));

    // An unbalanced measure reports its defect and skips the projector check.
    std::vector<CausalFermionPoint> pts2;
    pts2.push_back(validate_point(diag2(2.0, -1.0), 1));
    const ProjectorConstraintReport r2 =
        check_projector_constraint(make_measure(std::move(pts2), {1.0}, false));
    CHECK(r2.residual > 0.5);
    CHECK(!r2.projector_checked);
}
