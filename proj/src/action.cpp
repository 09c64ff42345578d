#include "cfs/action.hpp"

#include <atomic>
#include <cmath>

namespace cfs {

namespace {
std::atomic<std::uint64_t> g_clip_count{0};
}

std::uint64_t lagrangian_clip_count() { return g_clip_count.load(); }

double lagrangian(const ClosedChainSpectrum& spec) {
    if (classify(spec) == CausalClass::Spacelike) return 0.0;
    const double w1 = spectral_weight(spec);
    const double w2 = spectral_weight_sq(spec);
    const double raw = w2 - w1 * w1 / (2.0 * spec.spin_dim);
    const double scale = std::max(1.0, w2);
    if (raw < -1e-10 * scale) ++g_clip_count;
    return raw > 0.0 ? raw : 0.0;
}

double lagrangian(const CausalFermionPoint& x, const CausalFermionPoint& y) {
    return lagrangian(product_spectrum(x, y));
}

ActionReport action(const DiscreteUniversalMeasure& measure) {
    const int m = static_cast<int>(measure.points.size());
    ActionReport rep;
    rep.lagrangian_matrix = Eigen::MatrixXd::Zero(m, m);
    // xy and yx are isospectral, so both functionals are symmetric and
    // only the upper triangle needs a spectral solve.
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const ClosedChainSpectrum spec =
                product_spectrum(measure.points[i], measure.points[j]);
            const double L = lagrangian(spec);
            const double w1 = spectral_weight(spec);
            rep.lagrangian_matrix(i, j) = L;
            rep.lagrangian_matrix(j, i) = L;
            const double ww = measure.weights[i] * measure.weights[j];
            const double mult = (i == j) ? 1.0 : 2.0;
            rep.action_S += mult * ww * L;
            rep.constraint_T += mult * ww * w1 * w1;
        }
    }
    return rep;
}

} // namespace cfs
