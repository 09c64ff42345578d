#include "cfs/vacuum_system.hpp"

#include <cmath>
#include <complex>

#include "cfs/errors.hpp"

namespace cfs::dirac {

std::vector<MomentumNode> spherical_grid(double k_top, int n_radial,
                                         int n_polar, int n_azimuth) {
    if (!(k_top > 0.0) || n_radial < 1 || n_polar < 1 || n_azimuth < 1)
        throw InvalidOptions("spherical grid needs positive extents");
    std::vector<MomentumNode> grid;
    const double dr = k_top / n_radial;
    const double dtheta = M_PI / n_polar;
    const double dphi = 2.0 * M_PI / n_azimuth;
    for (int ir = 0; ir < n_radial; ++ir) {
        const double r = (ir + 0.5) * dr;
        for (int it = 0; it < n_polar; ++it) {
            const double theta = (it + 0.5) * dtheta;
            for (int ip = 0; ip < n_azimuth; ++ip) {
                const double phi = (ip + 0.5) * dphi;
                MomentumNode node;
                node.k = {r * std::sin(theta) * std::cos(phi),
                          r * std::sin(theta) * std::sin(phi),
                          r * std::cos(theta)};
                node.weight = r * r * std::sin(theta) * dr * dtheta * dphi;
                grid.push_back(node);
            }
        }
    }
    return grid;
}

DiscreteUniversalMeasure build_finite_vacuum_system(
    const std::vector<FourVector>& events,
    const std::vector<MomentumNode>& grid, const RegularizationParams& params,
    const GammaBasis& basis) {
    if (!(params.mass > 0.0)) throw InvalidOptions("mass must be positive");
    if (!(params.epsilon > 0.0))
        throw InvalidOptions("regularization length must be positive");
    if (events.empty()) throw DomainError("at least one event is required");
    for (std::size_t i = 0; i < events.size(); ++i)
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            const FourVector d{events[i].t - events[j].t,
                               events[i].x - events[j].x,
                               events[i].y - events[j].y,
                               events[i].z - events[j].z};
            if (d.t * d.t + d.x * d.x + d.y * d.y + d.z * d.z < 1e-24)
                throw DomainError("events must be distinct");
        }
    if (grid.empty()) throw SingularGram("momentum grid is empty");

    const double m = params.mass;
    struct NodeStates {
        FourVector q;
        double amplitude = 0.0;
        Eigen::Matrix<Complex, 4, 2> span;
    };
    std::vector<NodeStates> nodes;
    for (const MomentumNode& node : grid) {
        if (!(node.weight > 0.0))
            throw SingularGram("momentum grid weights must be positive");
        const double k2 = node.k[0] * node.k[0] + node.k[1] * node.k[1] +
                          node.k[2] * node.k[2];
        const double omega = std::sqrt(k2 + m * m);
        NodeStates st;
        st.q = FourVector{-omega, node.k[0], node.k[1], node.k[2]};

        // orthogonal projector onto the negative-energy spinor plane
        const Matrix4 proj = -(slash(st.q, basis) + m * Matrix4::Identity()) *
                             basis.gamma[0] / (2.0 * omega);
        Eigen::SelfAdjointEigenSolver<Matrix4> eig(proj);
        int found = 0;
        for (int i = 0; i < 4 && found < 2; ++i) {
            if (eig.eigenvalues()(i) > 0.5)
                st.span.col(found++) = eig.eigenvectors().col(i);
        }
        if (found != 2)
            throw SingularGram("degenerate shell projector on the grid");

        const double damped = node.weight * std::exp(-params.epsilon * omega);
        st.amplitude = std::sqrt(
            damped / (16.0 * M_PI * M_PI * M_PI * M_PI));
        nodes.push_back(st);
    }

    const int dim = 2 * static_cast<int>(nodes.size());
    std::vector<CausalFermionPoint> points;
    for (const FourVector& ev : events) {
        Eigen::MatrixXcd evaluation(4, dim);
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            const NodeStates& st = nodes[a];
            const double phase_arg = -(st.q.t * ev.t - st.q.x * ev.x -
                                       st.q.y * ev.y - st.q.z * ev.z);
            const Complex phase =
                st.amplitude * Complex(std::cos(phase_arg), std::sin(phase_arg));
            evaluation.block<4, 2>(0, 2 * static_cast<int>(a)) =
                phase * st.span;
        }
        const MatrixC correlation =
            -(evaluation.adjoint() * basis.spin_gram * evaluation);
        points.push_back(validate_point(correlation, 2));
    }

    std::vector<double> weights(points.size(),
                                1.0 / static_cast<double>(points.size()));
    return make_measure(std::move(points), std::move(weights), true);
}

DiscreteUniversalMeasure build_projected_vacuum_system(
    const std::vector<FourVector>& events, const RegularizationParams& params,
    const GammaBasis& basis) {
    if (events.empty()) throw DomainError("at least one event is required");
    for (std::size_t i = 0; i < events.size(); ++i)
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            const FourVector d{events[i].t - events[j].t,
                               events[i].x - events[j].x,
                               events[i].y - events[j].y,
                               events[i].z - events[j].z};
            if (d.t * d.t + d.x * d.x + d.y * d.y + d.z * d.z < 1e-24)
                throw DomainError("events must be distinct");
        }

    const int n = static_cast<int>(events.size());
    MatrixC overlaps = MatrixC::Zero(4 * n, 4 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const FourVector d{events[i].t - events[j].t,
                               events[i].x - events[j].x,
                               events[i].y - events[j].y,
                               events[i].z - events[j].z};
            const Matrix4 block = evaluation_overlap(d, params, basis);
            overlaps.block<4, 4>(4 * i, 4 * j) = block;
            overlaps.block<4, 4>(4 * j, 4 * i) = block.adjoint();
        }
    overlaps = ((overlaps + overlaps.adjoint()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<MatrixC> eig(overlaps);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw SingularGram("event overlaps vanish");
    if (eig.eigenvalues().minCoeff() < -1e-8 * top)
        throw SingularGram("event overlap matrix is indefinite");

    std::vector<int> keep;
    for (int i = 0; i < 4 * n; ++i)
        if (eig.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
    const int rank = static_cast<int>(keep.size());

    // factor the overlap Gram so stacked rows realize the wavefunction span
    MatrixC factor(4 * n, rank);
    for (int c = 0; c < rank; ++c)
        factor.col(c) = eig.eigenvectors().col(keep[c]) *
                        std::sqrt(eig.eigenvalues()(keep[c]));

    std::vector<CausalFermionPoint> points;
    for (int i = 0; i < n; ++i) {
        const MatrixC evaluation = factor.middleRows(4 * i, 4);
        const MatrixC correlation =
            -(evaluation.adjoint() * basis.spin_gram * evaluation);
        points.push_back(validate_point(correlation, 2));
    }

    std::vector<double> weights(points.size(),
                                1.0 / static_cast<double>(points.size()));
    return make_measure(std::move(points), std::move(weights), true);
}

} // namespace cfs::dirac
