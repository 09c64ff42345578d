#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <vector>

#include "cfs/action.hpp"
#include "cfs/errors.hpp"
#include "cfs/point.hpp"
#include "cfs/spectrum.hpp"
#include "cfs/sphere.hpp"

using namespace cfs;
using namespace cfs::sphere;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    return normalized(v);
}

Vec3 rotate(const std::array<Vec3, 3>& rows, const Vec3& v) {
    return {dot(rows[0], v), dot(rows[1], v), dot(rows[2], v)};
}

// random rotation from orthonormalizing a Gaussian triple
std::array<Vec3, 3> random_rotation(std::mt19937_64& rng) {
    Vec3 a = random_unit(rng);
    Vec3 b = random_unit(rng);
    double ab = dot(a, b);
    Vec3 t{b[0] - ab * a[0], b[1] - ab * a[1], b[2] - ab * a[2]};
    t = normalized(t);
    Vec3 c{a[1] * t[2] - a[2] * t[1], a[2] * t[0] - a[0] * t[2],
           a[0] * t[1] - a[1] * t[0]};
    return {a, t, c};
}

} // namespace

TEST_CASE("pair potential closed form") {
    const double rt2 = std::sqrt(2.0);
    CHECK(d_function(1.0, rt2) == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(d_function(0.0, rt2) == doctest::Approx(0.0));
    CHECK(d_function(-1.0, rt2) == doctest::Approx(0.0));
    CHECK(d_function(-1.0, 3.7) == doctest::Approx(0.0));
    // at the critical coupling the potential vanishes at right angles and
    // is negative just below them
    CHECK(d_function(-0.1, rt2) < 0.0);
    CHECK(d_function(0.1, rt2) > 0.0);

    // tau = 1 collapses to 2 (1+c)^2, which is never negative
    for (double c : {-1.0, -0.5, 0.0, 0.3, 1.0}) {
        const double expect = 2.0 * (1.0 + c) * (1.0 + c);
        CHECK(d_function(c, 1.0) == doctest::Approx(expect).epsilon(1e-14));
    }

    CHECK_THROWS_AS(d_function(1.5, rt2), DomainError);
    CHECK_THROWS_AS(d_function(-1.1, rt2), DomainError);
    CHECK_THROWS_AS(d_function(0.0, 0.9), DomainError);
}

TEST_CASE("timelike cone opening angle") {
    const double pi = std::acos(-1.0);
    auto t1 = theta_max(std::sqrt(2.0));
    REQUIRE(t1.has_value());
    CHECK(*t1 == doctest::Approx(pi / 2).epsilon(1e-14));
    auto t2 = theta_max(2.0);
    REQUIRE(t2.has_value());
    CHECK(*t2 == doctest::Approx(pi / 3).epsilon(1e-14));
    CHECK(!theta_max(1.0).has_value());
    CHECK_THROWS_AS(theta_max(0.99), DomainError);

    // the potential changes sign exactly at the cone boundary
    for (double tau : {1.3, std::sqrt(2.0), 2.0, 3.0}) {
        const double border = std::cos(*theta_max(tau));
        CHECK(std::abs(d_function(border, tau)) < 1e-12);
        CHECK(d_function(border + 1e-6, tau) > 0.0);
        CHECK(d_function(border - 1e-6, tau) < 0.0);
    }
}

TEST_CASE("embedded points") {
    const double rt2 = std::sqrt(2.0);
    auto north = embed({0.0, 0.0, 1.0}, rt2);
    CHECK(north.matrix()(0, 0).real() == doctest::Approx(1.0 + rt2));
    CHECK(north.matrix()(1, 1).real() == doctest::Approx(1.0 - rt2));
    CHECK(std::abs(north.matrix()(0, 1)) < 1e-15);
    CHECK(north.signature() == std::pair<int, int>(1, 1));

    std::mt19937_64 rng(401);
    for (int rep = 0; rep < 40; ++rep) {
        const double tau = 1.0 + 2.0 * (rep % 5) / 4.0;
        auto p = embed(random_unit(rng), tau);
        const Complex tr = p.matrix().trace();
        const Complex det = p.matrix().determinant();
        CHECK(std::abs(tr - Complex(2.0, 0.0)) < 1e-12);
        CHECK(std::abs(det - Complex(1.0 - tau * tau, 0.0)) < 1e-12);
        if (tau > 1.0)
            CHECK(p.signature() == std::pair<int, int>(1, 1));
        else
            CHECK(p.signature() == std::pair<int, int>(1, 0));
    }

    // tau = 1 puts the south pole eigenvalue at zero; still a valid point
    auto border = embed({0.0, 0.0, 1.0}, 1.0);
    CHECK(border.rank() == 1);
}

TEST_CASE("pair eigenvalues match the operator product") {
    std::mt19937_64 rng(402);
    for (int rep = 0; rep < 60; ++rep) {
        const double tau = 1.0 + 2.5 * (rep % 7) / 6.0;
        const Vec3 x = random_unit(rng);
        const Vec3 y = random_unit(rng);
        const double c = std::clamp(dot(x, y), -1.0, 1.0);
        auto [l1, l2] = pair_eigenvalues(c, tau);
        auto spec = product_spectrum(embed(x, tau), embed(y, tau));
        REQUIRE(spec.eigenvalues.size() == 2);
        const double d11 = std::abs(spec.eigenvalues[0] - l1) +
                           std::abs(spec.eigenvalues[1] - l2);
        const double d12 = std::abs(spec.eigenvalues[0] - l2) +
                           std::abs(spec.eigenvalues[1] - l1);
        CHECK(std::min(d11, d12) < 1e-9 * std::max(1.0, std::abs(l1)));
    }
}

TEST_CASE("closed form agrees with the spectral Lagrangian") {
    std::mt19937_64 rng(403);
    int clipped = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        const double tau = 1.0 + 2.0 * (rep % 11) / 10.0;
        const Vec3 x = random_unit(rng);
        const Vec3 y = random_unit(rng);
        const double closed = sphere_lagrangian(x, y, tau);
        const double spectral =
            lagrangian(product_spectrum(embed(x, tau), embed(y, tau)));
        const double scale = std::max({1.0, closed, spectral});
        CHECK(std::abs(closed - spectral) <= 1e-10 * scale);
        if (closed == 0.0) ++clipped;
    }
    CHECK(clipped > 100); // the sweep must exercise both branches
}

TEST_CASE("classification against the cone angle") {
    const double rt2 = std::sqrt(2.0);
    for (double tau : {1.2, rt2, 2.5}) {
        const double border = std::cos(*theta_max(tau));
        std::mt19937_64 rng(404);
        for (int rep = 0; rep < 30; ++rep) {
            const double margin = 1e-3 + 0.4 * (rep / 30.0);
            for (double c : {border + margin, border - margin}) {
                if (c > 1.0 || c < -1.0) continue;
                const double s = std::sqrt(1.0 - c * c);
                const Vec3 x{0.0, 0.0, 1.0};
                const Vec3 y{s, 0.0, c};
                auto cls = classify(product_spectrum(embed(x, tau), embed(y, tau)));
                if (c > border)
                    CHECK(cls == CausalClass::Timelike);
                else
                    CHECK(cls == CausalClass::Spacelike);
            }
            (void)rng;
        }
    }
}

TEST_CASE("configuration validation") {
    CHECK_THROWS_AS(make_config(1.5, {{0, 0, 2}}, {1.0}), DomainError);
    CHECK_THROWS_AS(make_config(1.5, {{0, 0, 1}}, {0.5}), DomainError);
    CHECK_THROWS_AS(make_config(1.5, {{0, 0, 1}}, {-1.0, 2.0}), DimensionMismatch);
    CHECK_THROWS_AS(make_config(0.5, {{0, 0, 1}}, {1.0}), DomainError);
    auto ok = make_config(1.5, {{0, 0, 1}, {0, 0, -1}}, {0.25, 0.75});
    CHECK(ok.points.size() == 2);
}

TEST_CASE("action values for reference configurations") {
    const double rt2 = std::sqrt(2.0);

    auto single = make_config(rt2, {{0, 0, 1}}, {1.0});
    CHECK(sphere_action(single) == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(sphere_constraint(single) == doctest::Approx(36.0).epsilon(1e-13));

    auto tetra = platonic(PlatonicSolid::Tetra, rt2);
    CHECK(sphere_action(tetra) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(sphere_constraint(tetra) == doctest::Approx(12.0).epsilon(1e-13));

    auto octa = platonic(PlatonicSolid::Octa, rt2);
    CHECK(sphere_action(octa) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("platonic vertex geometry") {
    auto tetra = platonic(PlatonicSolid::Tetra, 2.0);
    REQUIRE(tetra.points.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            CHECK(dot(tetra.points[i], tetra.points[j]) ==
                  doctest::Approx(-1.0 / 3.0).epsilon(1e-13));

    auto octa = platonic(PlatonicSolid::Octa, 2.0);
    REQUIRE(octa.points.size() == 6);

    auto cube = platonic(PlatonicSolid::Cube, 2.0);
    REQUIRE(cube.points.size() == 8);

    auto icosa = platonic(PlatonicSolid::Icosa, 2.0);
    REQUIRE(icosa.points.size() == 12);
    const double inv5 = 1.0 / std::sqrt(5.0);
    for (std::size_t i = 0; i < icosa.points.size(); ++i) {
        CHECK(std::abs(dot(icosa.points[i], icosa.points[i]) - 1.0) < 1e-12);
        for (std::size_t j = i + 1; j < icosa.points.size(); ++j) {
            const double c = dot(icosa.points[i], icosa.points[j]);
            const double nearest =
                std::min({std::abs(c - inv5), std::abs(c + inv5), std::abs(c + 1.0)});
            CHECK(nearest < 1e-12);
        }
    }

    auto dodeca = platonic(PlatonicSolid::Dodeca, 2.0);
    REQUIRE(dodeca.points.size() == 20);
    for (const auto& p : dodeca.points)
        CHECK(std::abs(dot(p, p) - 1.0) < 1e-12);

    for (auto solid : {PlatonicSolid::Tetra, PlatonicSolid::Octa,
                       PlatonicSolid::Cube, PlatonicSolid::Icosa,
                       PlatonicSolid::Dodeca}) {
        auto cfg = platonic(solid, 1.5);
        double total = 0.0;
        for (double w : cfg.weights) total += w;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("action is rotation invariant") {
    std::mt19937_64 rng(405);
    for (int rep = 0; rep < 20; ++rep) {
        const double tau = 1.0 + 1.7 * (rep % 4) / 3.0;
        std::vector<Vec3> pts;
        std::vector<double> w;
        std::uniform_real_distribution<double> uni(0.1, 1.0);
        const int n = 5;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            pts.push_back(random_unit(rng));
            w.push_back(uni(rng));
            total += w.back();
        }
        for (double& x : w) x /= total;
        auto cfg = make_config(tau, pts, w);
        auto rot = random_rotation(rng);
        std::vector<Vec3> rpts;
        for (const Vec3& p : pts) rpts.push_back(rotate(rot, p));
        for (Vec3& p : rpts) p = normalized(p);
        auto rcfg = make_config(tau, rpts, w);
        CHECK(sphere_action(cfg) ==
              doctest::Approx(sphere_action(rcfg)).epsilon(1e-11));
        CHECK(sphere_constraint(cfg) ==
              doctest::Approx(sphere_constraint(rcfg)).epsilon(1e-11));
    }
}

TEST_CASE("support clustering") {
    const double rt2 = std::sqrt(2.0);

    auto tetra = platonic(PlatonicSolid::Tetra, rt2);
    auto kept = support_clusters(tetra, 0.1);
    CHECK(kept.points.size() == 4);

    // duplicated vertices collapse and weights add
    std::vector<Vec3> pts = tetra.points;
    std::vector<double> w(4, 0.125);
    for (const Vec3& p : tetra.points) pts.push_back(p);
    for (int i = 0; i < 4; ++i) w.push_back(0.125);
    auto doubled = make_config(rt2, pts, w);
    auto merged = support_clusters(doubled, 1e-6);
    REQUIRE(merged.points.size() == 4);
    for (double x : merged.weights) CHECK(x == doctest::Approx(0.25));

    // a near pair merges to its weighted spherical mean
    const double eps = 1e-3;
    auto near_pair = make_config(
        rt2,
        {{std::sin(eps), 0.0, std::cos(eps)}, {-std::sin(eps), 0.0, std::cos(eps)}},
        {0.5, 0.5});
    auto one = support_clusters(near_pair, 0.01);
    REQUIRE(one.points.size() == 1);
    CHECK(one.weights[0] == doctest::Approx(1.0));
    CHECK(one.points[0][2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(one.points[0][0]) < 1e-12);

    // well separated points survive a loose tolerance
    auto octa = platonic(PlatonicSolid::Octa, rt2);
    CHECK(support_clusters(octa, 0.5).points.size() == 6);
}
