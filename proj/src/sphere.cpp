#include "cfs/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "cfs/errors.hpp"

namespace cfs::sphere {

double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    if (n == 0.0) throw DomainError("cannot normalize the zero vector");
    return {v[0] / n, v[1] / n, v[2] / n};
}

double geodesic(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(dot(a, b), -1.0, 1.0);
    return std::acos(c);
}

namespace {

void check_cosine(double c) {
    if (!(c >= -1.0 - 1e-12 && c <= 1.0 + 1e-12))
        throw DomainError("cosine argument outside [-1, 1]");
}

void check_tau(double tau) {
    if (!(tau >= 1.0)) throw DomainError("coupling must satisfy tau >= 1");
}

} // namespace

double d_function(double c, double tau) {
    check_cosine(c);
    check_tau(tau);
    c = std::clamp(c, -1.0, 1.0);
    const double t2 = tau * tau;
    return 2.0 * t2 * (1.0 + c) * (2.0 - t2 * (1.0 - c));
}

double sphere_lagrangian(const Vec3& x, const Vec3& y, double tau) {
    const double c = std::clamp(dot(x, y), -1.0, 1.0);
    return std::max(0.0, d_function(c, tau));
}

std::pair<Complex, Complex> pair_eigenvalues(double c, double tau) {
    check_cosine(c);
    check_tau(tau);
    c = std::clamp(c, -1.0, 1.0);
    const double t2 = tau * tau;
    const double mean = 1.0 + t2 * c;
    const double radicand = 2.0 * t2 * (1.0 + c) - t2 * t2 * (1.0 - c * c);
    const Complex root = std::sqrt(Complex(radicand, 0.0));
    return {Complex(mean, 0.0) + root, Complex(mean, 0.0) - root};
}

std::optional<double> theta_max(double tau) {
    if (!(tau >= 1.0)) throw DomainError("coupling must satisfy tau >= 1");
    if (tau == 1.0) return std::nullopt;
    return std::acos(1.0 - 2.0 / (tau * tau));
}

CausalFermionPoint embed(const Vec3& x, double tau) {
    check_tau(tau);
    const Vec3 u = normalized(x);
    MatrixC m(2, 2);
    m(0, 0) = Complex(1.0 + tau * u[2], 0.0);
    m(1, 1) = Complex(1.0 - tau * u[2], 0.0);
    m(0, 1) = Complex(tau * u[0], -tau * u[1]);
    m(1, 0) = Complex(tau * u[0], tau * u[1]);
    return validate_point(m, 1);
}

SphereConfiguration make_config(double tau, std::vector<Vec3> points,
                                std::vector<double> weights) {
    check_tau(tau);
    if (points.size() != weights.size())
        throw DimensionMismatch("points and weights differ in length");
    for (const Vec3& p : points) {
        const double n2 = dot(p, p);
        if (std::abs(n2 - 1.0) > 1e-12)
            throw DomainError("configuration point is not on the unit sphere");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DomainError("weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw DomainError("weights must sum to one");
    return SphereConfiguration{tau, std::move(points), std::move(weights)};
}

double sphere_action(const SphereConfiguration& config) {
    const std::size_t n = config.points.size();
    double action = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = config.weights[i];
        if (wi == 0.0) continue;
        action += wi * wi *
                  sphere_lagrangian(config.points[i], config.points[i], config.tau);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double wj = config.weights[j];
            if (wj == 0.0) continue;
            action += 2.0 * wi * wj *
                      sphere_lagrangian(config.points[i], config.points[j],
                                        config.tau);
        }
    }
    return action;
}

double sphere_constraint(const SphereConfiguration& config) {
    const std::size_t n = config.points.size();
    auto weight_sq = [&](std::size_t i, std::size_t j) {
        const double c = std::clamp(dot(config.points[i], config.points[j]),
                                    -1.0, 1.0);
        const auto [l1, l2] = pair_eigenvalues(c, config.tau);
        const double s = std::abs(l1) + std::abs(l2);
        return s * s;
    };
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = config.weights[i];
        if (wi == 0.0) continue;
        total += wi * wi * weight_sq(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double wj = config.weights[j];
            if (wj == 0.0) continue;
            total += 2.0 * wi * wj * weight_sq(i, j);
        }
    }
    return total;
}

SphereConfiguration support_clusters(const SphereConfiguration& config,
                                     double merge_tolerance) {
    if (!(merge_tolerance >= 0.0))
        throw DomainError("merge tolerance must be non-negative");
    std::vector<Vec3> sums;       // weighted, unnormalized cluster centers
    std::vector<double> weights;
    std::vector<Vec3> centers;
    for (std::size_t i = 0; i < config.points.size(); ++i) {
        const Vec3& p = config.points[i];
        const double w = config.weights[i];
        std::size_t hit = centers.size();
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (geodesic(centers[k], p) <= merge_tolerance) {
                hit = k;
                break;
            }
        }
        if (hit == centers.size()) {
            sums.push_back({w * p[0], w * p[1], w * p[2]});
            weights.push_back(w);
            centers.push_back(p);
        } else {
            sums[hit][0] += w * p[0];
            sums[hit][1] += w * p[1];
            sums[hit][2] += w * p[2];
            weights[hit] += w;
            // a zero-weight cluster keeps its first representative
            if (weights[hit] > 0.0 && dot(sums[hit], sums[hit]) > 0.0)
                centers[hit] = normalized(sums[hit]);
        }
    }
    SphereConfiguration out;
    out.tau = config.tau;
    out.points = std::move(centers);
    out.weights = std::move(weights);
    return out;
}

SphereConfiguration platonic(PlatonicSolid solid, double tau) {
    check_tau(tau);
    std::vector<Vec3> pts;
    switch (solid) {
    case PlatonicSolid::Tetra: {
        const double s = 1.0 / std::sqrt(3.0);
        pts = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
        break;
    }
    case PlatonicSolid::Octa:
        pts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        break;
    case PlatonicSolid::Cube: {
        const double s = 1.0 / std::sqrt(3.0);
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1}) pts.push_back({sx * s, sy * s, sz * s});
        break;
    }
    case PlatonicSolid::Icosa: {
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const double n = std::sqrt(1.0 + phi * phi);
        const double a = 1.0 / n, b = phi / n;
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) {
                pts.push_back({0.0, s1 * a, s2 * b});
                pts.push_back({s1 * a, s2 * b, 0.0});
                pts.push_back({s2 * b, 0.0, s1 * a});
            }
        break;
    }
    case PlatonicSolid::Dodeca: {
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const double s = 1.0 / std::sqrt(3.0);
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1}) pts.push_back({sx * s, sy * s, sz * s});
        const double a = (1.0 / phi) / std::sqrt(3.0), b = phi / std::sqrt(3.0);
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) {
                pts.push_back({0.0, s1 * a, s2 * b});
                pts.push_back({s1 * a, s2 * b, 0.0});
                pts.push_back({s2 * b, 0.0, s1 * a});
            }
        break;
    }
    }
    const double w = 1.0 / static_cast<double>(pts.size());
    SphereConfiguration out;
    out.tau = tau;
    out.points = std::move(pts);
    out.weights.assign(out.points.size(), w);
    return out;
}

} // namespace cfs::sphere
