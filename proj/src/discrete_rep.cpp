#include "cfs/discrete_rep.hpp"

#include <cmath>
#include <string>

#include "cfs/errors.hpp"

namespace cfs {

MatrixC DiscreteSpacetimeRep::projector(int i) const {
    MatrixC E = MatrixC::Zero(krein_dim, krein_dim);
    for (int k = 0; k < block_size[i]; ++k)
        E(block_offset[i] + k, block_offset[i] + k) = 1.0;
    return E;
}

RepPropertyReport check_rep_properties(const DiscreteSpacetimeRep& rep) {
    const MatrixC SP = rep.krein_gram * rep.fermionic_operator;
    RepPropertyReport out;
    const double scale = std::max(1.0, SP.cwiseAbs().maxCoeff());
    out.symmetry_residual = (SP - SP.adjoint()).cwiseAbs().maxCoeff() / scale;
    const MatrixC H = -0.5 * (SP + SP.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixC> es(H);
    out.positivity_min_eig = es.eigenvalues().size() ? es.eigenvalues().minCoeff() : 0.0;
    return out;
}

DiscreteSpacetimeRep particle_to_spacetime(const DiscreteUniversalMeasure& measure) {
    const int m = static_cast<int>(measure.points.size());
    DiscreteSpacetimeRep rep;
    rep.spin_dim = m ? measure.points[0].spin_dim() : 0;

    std::vector<SpinSpaceBasis> bases(m);
    for (int i = 0; i < m; ++i) {
        bases[i] = spin_space(measure.points[i]);
        const int r = static_cast<int>(bases[i].basis.cols());
        if (r == 0)
            throw ZeroSpinSpace("point " + std::to_string(i) + " has trivial spin space");
        rep.block_offset.push_back(rep.krein_dim);
        rep.block_size.push_back(r);
        rep.krein_dim += r;
    }

    rep.krein_gram = MatrixC::Zero(rep.krein_dim, rep.krein_dim);
    rep.fermionic_operator = MatrixC::Zero(rep.krein_dim, rep.krein_dim);
    rep.block_weight = measure.weights;
    for (int i = 0; i < m; ++i) {
        rep.krein_gram.block(rep.block_offset[i], rep.block_offset[i],
                             rep.block_size[i], rep.block_size[i]) =
            measure.weights[i] * bases[i].gram;
        for (int j = 0; j < m; ++j) {
            rep.fermionic_operator.block(rep.block_offset[i], rep.block_offset[j],
                                         rep.block_size[i], rep.block_size[j]) =
                kernel(measure.points[i], measure.points[j]).entries * measure.weights[j];
        }
    }
    return rep;
}

std::vector<CausalFermionPoint> spacetime_to_particle(const DiscreteSpacetimeRep& rep) {
    const MatrixC& P = rep.fermionic_operator;
    if (P.rows() == 0 || P.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateRange("fermionic operator has trivial range");

    // Induced product on range(P): <P phi | P phi'> = phi^dag (-S P) phi'.
    const MatrixC M = -0.5 * (rep.krein_gram * P + (rep.krein_gram * P).adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixC> es(M);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double cut = tol::rank_cut * lmax;

    // Canonical basis: descending eigenvalue, null directions dropped,
    // phase fixed on the first nonzero component.
    std::vector<VectorC> h;
    for (int i = static_cast<int>(es.eigenvalues().size()) - 1; i >= 0; --i) {
        const double lam = es.eigenvalues()(i);
        if (lam <= cut) continue;
        VectorC v = P * es.eigenvectors().col(i) / std::sqrt(lam);
        for (int k = 0; k < v.size(); ++k) {
            if (std::abs(v(k)) > 1e-8 * v.cwiseAbs().maxCoeff()) {
                v *= std::conj(v(k)) / std::abs(v(k));
                break;
            }
        }
        h.push_back(std::move(v));
    }
    if (h.empty()) throw DegenerateRange("range of the fermionic operator collapsed");

    const int d = static_cast<int>(h.size());
    std::vector<CausalFermionPoint> out;
    for (int x = 0; x < rep.blocks(); ++x) {
        const double rho = rep.block_weight.empty() ? 1.0 : rep.block_weight[x];
        MatrixC F(d, d);
        for (int a = 0; a < d; ++a) {
            const VectorC Sh_a = rep.krein_gram.adjoint() * h[a];
            for (int b = 0; b < d; ++b) {
                Complex acc = 0.0;
                for (int k = 0; k < rep.block_size[x]; ++k) {
                    const int idx = rep.block_offset[x] + k;
                    acc += std::conj(Sh_a(idx)) * h[b](idx);
                }
                F(a, b) = -acc / rho;
            }
        }
        out.push_back(validate_point(F, rep.spin_dim));
    }
    return out;
}

ProjectorConstraintReport check_projector_constraint(const DiscreteUniversalMeasure& measure,
                                                     double residual_tol) {
    ProjectorConstraintReport out;
    if (measure.points.empty()) {
        out.residual = 0.0;
        return out;
    }
    const int f = measure.points[0].particle_dim();
    MatrixC acc = MatrixC::Zero(f, f);
    for (std::size_t i = 0; i < measure.points.size(); ++i)
        acc += measure.weights[i] * measure.points[i].matrix();
    acc -= MatrixC::Identity(f, f);
    Eigen::SelfAdjointEigenSolver<MatrixC> es(acc);
    out.residual = es.eigenvalues().cwiseAbs().maxCoeff();

    if (out.residual <= residual_tol) {
        const DiscreteSpacetimeRep rep = particle_to_spacetime(measure);
        const MatrixC& P = rep.fermionic_operator;
        out.projector_checked = true;
        out.projector_residual = (P * P - P).cwiseAbs().maxCoeff();
        out.trace = P.trace().real();
    }
    return out;
}

} // namespace cfs
