#include "cfs/connection.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "cfs/errors.hpp"
#include "cfs/spin_space.hpp"

namespace cfs {

namespace {

constexpr int kFrameDim = 5;

template <class F>
double golden_min(F f, double lo, double hi, int iters) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double wrap_angle(double phi) {
    phi = std::fmod(phi, 2 * M_PI);
    if (phi <= -M_PI) phi += 2 * M_PI;
    if (phi > M_PI) phi -= 2 * M_PI;
    return phi;
}

CliffordSubspace conjugate_frame(const CliffordSubspace& frame, const MatrixC& u) {
    CliffordSubspace out = frame;
    const MatrixC uinv = u.inverse();
    for (auto& e : out.basis) e = u * e * uinv;
    return out;
}

std::vector<MatrixC> conjugate_family(const std::vector<MatrixC>& basis,
                                      const MatrixC& u) {
    std::vector<MatrixC> out;
    out.reserve(basis.size());
    const MatrixC uinv = u.inverse();
    for (const auto& e : basis) out.push_back(u * e * uinv);
    return out;
}

// One endpoint of a pair: local structures plus the frames distinguished
// by the pair.
struct SideGeometry {
    SpinSpaceBasis space;
    SignOperator sign;         // from the local spectral split
    SignOperator direction;    // toward the other point
    SyncResult sync;
    CliffordSubspace near_frame;  // extension of sign singled out by the pair
    CliffordSubspace far_frame;   // the same frame carried to the direction operator
};

struct PairGeometry {
    SideGeometry at_x, at_y;
    MatrixC kernel_xy;        // spin space of y into spin space of x
    MatrixC core_map;         // chain^{-1/2} * kernel_xy
    double phase = 0.0;
    MatrixC connection;       // phase factor * core_map
};

SideGeometry make_side(const CausalFermionPoint& here,
                       const CausalFermionPoint& there) {
    SideGeometry s;
    s.space = spin_space(here);
    s.sign = euclidean_sign(here, s.space);
    s.direction = directional_sign(here, there);
    if (!generically_separated(s.sign, s.direction))
        throw NotSpinConnectable("sign operators are not generically separated");
    s.sync = synchronize(s.sign, s.direction);
    s.near_frame = clifford_extension(s.sign, s.direction);
    s.far_frame = conjugate_frame(s.near_frame, s.sync.unitary);
    return s;
}

PairGeometry make_pair(const CausalFermionPoint& x, const CausalFermionPoint& y) {
    if (!properly_timelike(x, y))
        throw NotSpinConnectable("pair is not properly timelike");

    PairGeometry g;
    g.at_x = make_side(x, y);
    g.at_y = make_side(y, x);
    g.kernel_xy = kernel(x, y).entries;

    const MatrixC chain = closed_chain(x, y);
    Eigen::ComplexEigenSolver<MatrixC> es(chain);
    if (es.info() != Eigen::Success)
        throw NoConvergence("chain eigendecomposition failed");
    MatrixC d = MatrixC::Zero(chain.rows(), chain.cols());
    for (Eigen::Index i = 0; i < chain.rows(); ++i) {
        const double lam = es.eigenvalues()(i).real();
        if (lam <= 0.0)
            throw NotSpinConnectable("pair is not properly timelike");
        d(i, i) = 1.0 / std::sqrt(lam);
    }
    g.core_map = es.eigenvectors() * d * es.eigenvectors().inverse() * g.kernel_xy;

    // The frame-transport condition pins the phase modulo a quarter
    // period; scan one full turn, refine, then pick the representative in
    // the admissible band.
    const MatrixC& dir = g.at_x.direction.matrix;
    const MatrixC ident = MatrixC::Identity(4, 4);
    auto residual = [&](double phi) {
        const MatrixC m = (std::cos(phi) * ident + Complex(0, std::sin(phi)) * dir) *
                          g.core_map;
        return subspace_distance(conjugate_family(g.at_y.far_frame.basis, m),
                                 g.at_x.far_frame.basis);
    };
    constexpr int kGrid = 64;
    int best = 0;
    double best_val = residual(-M_PI + 2 * M_PI / kGrid);
    for (int i = 1; i < kGrid; ++i) {
        const double val = residual(-M_PI + 2 * M_PI * (i + 1) / kGrid);
        if (val < best_val) {
            best = i;
            best_val = val;
        }
    }
    const double step = 2 * M_PI / kGrid;
    const double center = -M_PI + step * (best + 1);
    const double raw = golden_min(residual, center - step, center + step, 70);
    if (residual(raw) > 1e-5)
        throw NoConvergence("phase alignment residual stays above tolerance");

    double rem = raw - 0.5 * M_PI * std::floor(raw / (0.5 * M_PI));
    if (std::min({rem, 0.5 * M_PI - rem, std::abs(rem - 0.25 * M_PI)}) < 1e-6)
        throw NotSpinConnectable("phase on quarter grid");
    double band = 0.0;
    int hits = 0;
    for (int k = 0; k < 4; ++k) {
        const double cand = wrap_angle(raw + 0.5 * M_PI * k);
        if ((cand > 0.25 * M_PI && cand < 0.5 * M_PI) ||
            (cand > -0.5 * M_PI && cand < -0.25 * M_PI)) {
            band = cand;
            ++hits;
        }
    }
    if (hits != 1)
        throw NoConvergence("admissible band selection is ambiguous");
    g.phase = band;
    g.connection =
        (std::cos(band) * ident + Complex(0, std::sin(band)) * dir) * g.core_map;
    return g;
}

// e^{i tau s}: the gauge circle relating two frames through a common
// sign operator.
MatrixC gauge_circle(const MatrixC& s, double tau) {
    return std::cos(tau) * MatrixC::Identity(4, 4) + Complex(0, std::sin(tau)) * s;
}

// Rotation identifying one extension of a sign operator with another;
// the representative with the smallest rotation angle among the gauge
// copies.
MatrixC identify_frames(const CliffordSubspace& from, const CliffordSubspace& to) {
    const MatrixC& s = from.basis[0];
    if ((s - to.basis[0]).norm() > 1e-6 * s.norm())
        throw DimensionMismatch("frames do not extend a common sign operator");

    auto residual = [&](double tau) {
        const MatrixC v = gauge_circle(s, tau);
        const MatrixC vinv = gauge_circle(s, -tau);
        return subspace_distance(conjugate_family(from.basis, v), to.basis) +
               subspace_distance(from.basis, conjugate_family(to.basis, vinv));
    };
    constexpr int kGrid = 64;
    const double period = 0.5 * M_PI;
    int best = 0;
    double best_val = residual(-0.25 * M_PI + period / kGrid);
    for (int i = 1; i < kGrid; ++i) {
        const double val = residual(-0.25 * M_PI + period * (i + 1) / kGrid);
        if (val < best_val) {
            best = i;
            best_val = val;
        }
    }
    const double step = period / kGrid;
    const double center = -0.25 * M_PI + step * (best + 1);
    double tau = golden_min(residual, center - step, center + step, 70);
    if (residual(tau) > 1e-5)
        throw NoConvergence("frame identification residual stays above tolerance");

    // All gauge copies act identically on the frame; take the smallest
    // rotation, preferring the negative one on an exact tie.
    double chosen = 0.0;
    double chosen_abs = 10.0;
    for (int k = -2; k <= 2; ++k) {
        const double cand = wrap_angle(tau + 0.5 * M_PI * k);
        if (std::abs(cand) < chosen_abs - 1e-12 ||
            (std::abs(std::abs(cand) - chosen_abs) <= 1e-12 && cand < chosen)) {
            chosen = cand;
            chosen_abs = std::abs(cand);
        }
    }
    if (std::abs(chosen) < 1e-9) return MatrixC::Identity(4, 4);
    return gauge_circle(s, chosen);
}

Eigen::Matrix<double, 5, 1> frame_coords(const MatrixC& target,
                                         const CliffordSubspace& frame) {
    Eigen::Matrix<double, 5, 1> rhs;
    for (int j = 0; j < kFrameDim; ++j) rhs(j) = tangent_form(frame.basis[j], target);
    const Eigen::Matrix<double, 5, 1> c =
        frame.gram.fullPivLu().solve(rhs);
    MatrixC rebuilt = MatrixC::Zero(4, 4);
    for (int j = 0; j < kFrameDim; ++j) rebuilt += c(j) * frame.basis[j];
    if ((rebuilt - target).norm() > 1e-5 * std::max(1.0, target.norm()))
        throw NoConvergence("representative leaves the tangent frame span");
    return c;
}

// conj by m maps the domain frame into the codomain frame; express it in
// coordinates.
MetricConnectionMap coordinates_of_conjugation(const MatrixC& m,
                                               const CliffordSubspace& domain,
                                               const CliffordSubspace& codomain) {
    MetricConnectionMap out;
    out.domain = domain;
    out.codomain = codomain;
    const MatrixC minv = m.inverse();
    for (int j = 0; j < kFrameDim; ++j)
        out.coordinates.col(j) = frame_coords(m * domain.basis[j] * minv, codomain);
    return out;
}

MatrixC transport_conjugator(const PairGeometry& g) {
    return g.at_x.sync.unitary.inverse() * g.connection * g.at_y.sync.unitary;
}

} // namespace

TangentVector tangent_in_frame(const MatrixC& representative,
                               const CliffordSubspace& frame) {
    TangentVector out;
    out.representative = representative;
    out.coordinates = frame_coords(representative, frame);
    out.frame = frame;
    return out;
}

bool spin_connectable(const CausalFermionPoint& x, const CausalFermionPoint& y) {
    try {
        make_pair(x, y);
        return true;
    } catch (const Error&) {
        return false;
    }
}

SpinConnectionMap spin_connection(const CausalFermionPoint& x,
                                  const CausalFermionPoint& y) {
    const PairGeometry g = make_pair(x, y);
    return {g.connection, g.phase};
}

SpinConnectionReport check_spin_connection(const CausalFermionPoint& x,
                                           const CausalFermionPoint& y) {
    const PairGeometry fwd = make_pair(x, y);
    const PairGeometry rev = make_pair(y, x);
    const MatrixC& dxy = fwd.connection;
    const MatrixC& dyx = rev.connection;

    SpinConnectionReport rep;
    const MatrixC adj =
        fwd.at_x.space.gram.inverse() * dyx.adjoint() * fwd.at_y.space.gram;
    rep.adjoint_residual = (dxy - adj).norm() / dxy.norm();
    rep.inverse_residual = (dxy * dyx - MatrixC::Identity(4, 4)).norm() / 2.0;
    rep.direction_residual =
        (fwd.at_x.direction.matrix - dxy * fwd.at_y.direction.matrix * dyx).norm() /
        fwd.at_x.direction.matrix.norm();
    rep.frame_residual = subspace_distance(
        conjugate_family(fwd.at_y.far_frame.basis, dxy), fwd.at_x.far_frame.basis);
    rep.phase_forward = fwd.phase;
    rep.phase_backward = rev.phase;
    rep.phase_antisymmetry = std::abs(wrap_angle(fwd.phase + rev.phase));
    rep.orientation =
        fwd.phase > 0 ? TimeOrientation::Future : TimeOrientation::Past;
    return rep;
}

TimeOrientation time_orientation(const CausalFermionPoint& x,
                                 const CausalFermionPoint& y) {
    const PairGeometry g = make_pair(x, y);
    return g.phase > 0 ? TimeOrientation::Future : TimeOrientation::Past;
}

TangentVector directional_tangent(const CausalFermionPoint& x,
                                  const CausalFermionPoint& y) {
    const PairGeometry g = make_pair(x, y);
    const MatrixC uinv = g.at_x.sync.unitary.inverse();
    return tangent_in_frame(uinv * g.at_x.direction.matrix * g.at_x.sync.unitary,
                            g.at_x.near_frame);
}

MetricConnectionMap metric_connection(const CausalFermionPoint& x,
                                      const CausalFermionPoint& y) {
    const PairGeometry g = make_pair(x, y);
    return coordinates_of_conjugation(transport_conjugator(g), g.at_y.near_frame,
                                      g.at_x.near_frame);
}

TangentVector transport_tangent(const MetricConnectionMap& map,
                                const TangentVector& u) {
    if (subspace_distance(u.frame.basis, map.domain.basis) > 1e-6)
        throw DimensionMismatch("vector is not expressed in the isometry domain");
    const Eigen::Matrix<double, 5, 1> c = map.coordinates * u.coordinates;
    MatrixC rep = MatrixC::Zero(4, 4);
    for (int j = 0; j < kFrameDim; ++j) rep += c(j) * map.codomain.basis[j];
    TangentVector out;
    out.representative = std::move(rep);
    out.coordinates = c;
    out.frame = map.codomain;
    return out;
}

MatrixC splice_map(const CausalFermionPoint& x, const CausalFermionPoint& z,
                   const CausalFermionPoint& y) {
    const PairGeometry toward_z = make_pair(x, z);
    const PairGeometry toward_y = make_pair(x, y);
    const MatrixC ident =
        identify_frames(toward_y.at_x.near_frame, toward_z.at_x.near_frame);
    return toward_z.at_x.sync.unitary * ident *
           toward_y.at_x.sync.unitary.inverse();
}

TransportResult transport_chain(const std::vector<CausalFermionPoint>& points,
                                TransportMode mode) {
    if (points.size() < 2)
        throw InvalidOptions("transport chain needs at least two points");
    const int n = static_cast<int>(points.size());

    std::vector<PairGeometry> links;
    links.reserve(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        try {
            links.push_back(make_pair(points[i], points[i + 1]));
        } catch (const NotSpinConnectable& e) {
            throw NotSpinConnectable("link " + std::to_string(i) + ": " + e.what());
        } catch (const NoConvergence& e) {
            throw NoConvergence("link " + std::to_string(i) + ": " + e.what());
        }
    }

    TransportResult out;
    out.mode = mode;
    if (mode == TransportMode::SpinUnspliced) {
        MatrixC m = links[0].connection;
        for (int i = 1; i + 1 < n; ++i) m = m * links[i].connection;
        out.spin_map = std::move(m);
        return out;
    }
    if (mode == TransportMode::SpinSpliced) {
        MatrixC m = links[0].connection;
        for (int i = 1; i + 1 < n; ++i) {
            const MatrixC ident = identify_frames(links[i].at_x.near_frame,
                                                  links[i - 1].at_y.near_frame);
            const MatrixC splice = links[i - 1].at_y.sync.unitary * ident *
                                   links[i].at_x.sync.unitary.inverse();
            m = m * splice * links[i].connection;
        }
        out.spin_map = std::move(m);
        return out;
    }

    MatrixC m = transport_conjugator(links[0]);
    for (int i = 1; i + 1 < n; ++i) {
        const MatrixC ident = identify_frames(links[i].at_x.near_frame,
                                              links[i - 1].at_y.near_frame);
        m = m * ident * transport_conjugator(links[i]);
    }
    const CliffordSubspace domain = links.back().at_y.near_frame;
    const double endpoint_gap =
        (points.front().matrix() - points.back().matrix()).norm();
    if (endpoint_gap <= 1e-12 * std::max(1.0, points.front().matrix().norm())) {
        // Closed chain: bring the arrival frame back onto the departure
        // frame so the result is an endomorphism.
        const MatrixC closing = identify_frames(links[0].at_x.near_frame, domain);
        m = closing * m;
        out.metric = coordinates_of_conjugation(m, domain, domain);
    } else {
        out.metric = coordinates_of_conjugation(m, domain, links[0].at_x.near_frame);
    }
    return out;
}

MetricConnectionMap metric_curvature(const CausalFermionPoint& x,
                                     const CausalFermionPoint& y,
                                     const CausalFermionPoint& z) {
    return transport_chain({x, y, z, x}, TransportMode::Metric).metric;
}

ReducedTangent reduce_tangent(const TangentVector& u) {
    const double sq = tangent_form(u.representative, u.representative);
    if (!(sq < -1e-10))
        throw NotSpacelike("tangent vector is not spacelike");

    const Eigen::MatrixXd gram5 = u.frame.gram;
    Eigen::MatrixXd functional = gram5 * Eigen::MatrixXd(u.coordinates);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(functional);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd complement = q.rightCols(4);

    ReducedTangent out;
    out.gram = complement.transpose() * gram5 * complement;
    for (int k = 0; k < 4; ++k) {
        MatrixC e = MatrixC::Zero(4, 4);
        for (int j = 0; j < kFrameDim; ++j) e += complement(j, k) * u.frame.basis[j];
        out.basis.push_back(std::move(e));
    }
    out.chiral = Complex(0, -1) * u.representative / std::sqrt(-sq);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> gs(out.gram);
    int pos = 0, neg = 0;
    for (int i = 0; i < 4; ++i) {
        if (gs.eigenvalues()(i) > 1e-10) ++pos;
        if (gs.eigenvalues()(i) < -1e-10) ++neg;
    }
    if (pos != 1 || neg != 3)
        throw NoConvergence("reduced form does not have signature (1,3)");
    return out;
}

ChiralSymmetryReport verify_chiral_symmetry(
    const DiscreteUniversalMeasure& system,
    const std::vector<TangentVector>& candidate) {
    if (candidate.size() != system.points.size())
        throw DimensionMismatch("candidate field size does not match the system");
    for (const auto& u : candidate)
        if (!(tangent_form(u.representative, u.representative) < -1e-10))
            throw NotSpacelike("candidate field has a non-spacelike member");

    ChiralSymmetryReport rep;
    const int n = static_cast<int>(system.points.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            PairGeometry g;
            try {
                g = make_pair(system.points[i], system.points[j]);
            } catch (const Error&) {
                ++rep.pairs_skipped;
                continue;
            }
            const MatrixC vi = identify_frames(candidate[i].frame, g.at_x.near_frame);
            const MatrixC ui = vi * candidate[i].representative * vi.inverse();
            const MatrixC uinv = g.at_x.sync.unitary.inverse();
            const MatrixC yhat =
                uinv * g.at_x.direction.matrix * g.at_x.sync.unitary;
            const double uu = tangent_form(ui, ui);
            rep.max_orthogonality = std::max(
                rep.max_orthogonality, std::abs(tangent_form(ui, yhat)) / std::sqrt(-uu));

            const MatrixC vj = identify_frames(candidate[j].frame, g.at_y.near_frame);
            const MatrixC uj = vj * candidate[j].representative * vj.inverse();
            const MatrixC w = transport_conjugator(g);
            const MatrixC transported = w * uj * w.inverse();
            rep.max_parallelism =
                std::max(rep.max_parallelism,
                         (transported - ui).norm() / std::max(1.0, ui.norm()));
            ++rep.pairs_checked;
        }
    return rep;
}

} // namespace cfs
