#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "cfs/point.hpp"
#include "cfs/spectrum.hpp"

namespace cfs {

struct ActionReport {
    double action_S = 0.0;
    double constraint_T = 0.0;
    Eigen::MatrixXd lagrangian_matrix; // per-pair values, diagonal included
};

// Spectral Lagrangian: sum |l|^2 - (1/2n) (sum |l|)^2, clamped to >= 0.
// A spacelike pair returns exactly zero. Values below the negative
// tolerance budget are counted (see lagrangian_clip_count) before
// clamping rather than trusted.
double lagrangian(const CausalFermionPoint& x, const CausalFermionPoint& y);
double lagrangian(const ClosedChainSpectrum& spec);

// Number of clamp events where the raw value fell below -1e-10 * scale.
std::uint64_t lagrangian_clip_count();

// Double sum over all ordered pairs of the measure, diagonal included.
ActionReport action(const DiscreteUniversalMeasure& measure);

} // namespace cfs
