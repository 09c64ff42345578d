#pragma once

#include <cstdint>
#include <vector>

#include "cfs/sphere.hpp"

namespace cfs::sphere {

struct MinimizeOptions {
    std::uint64_t master_seed = 1;
    int restarts = 8;
    // per-sweep geometric temperature schedule
    double initial_temperature = 1.0;
    double cooling_factor = 0.9716;
    int annealing_steps = 400;
    int polish_iterations = 1500;
    double merge_tolerance = 1e-3;
    double convergence_tolerance = 1e-12;
    // rounds of kick-and-repolish escape moves after the first descent
    int hop_rounds = 24;
};

struct MinimizationResult {
    SphereConfiguration best;
    double action = 0.0;
    SphereConfiguration support;          // clustered, negligible weights dropped
    std::vector<double> history;          // best value seen so far, per phase
    std::vector<double> restart_actions;  // final action of each replica
};

// Global search over weighted point configurations with at most max_points
// support points. Deterministic for a fixed master_seed; replicas run in
// parallel capped by CFS_LAB_THREADS without affecting the result.
MinimizationResult minimize(double tau, int max_points,
                            const MinimizeOptions& options);

// Same search started from an explicit configuration; the point budget is
// the configuration size and the result never exceeds its action.
MinimizationResult minimize(const SphereConfiguration& initial,
                            const MinimizeOptions& options);

struct SweepRow {
    double tau = 0.0;
    int m = 0;
    std::uint64_t seed = 0;
    double min_action = 0.0;
    int support_size = 0;
    double constraint_T = 0.0;
};

// Minimization over the product grid, one row per (tau, m), sorted by
// (tau, m). Empty grids give an empty table.
std::vector<SweepRow> sweep(const std::vector<double>& tau_grid,
                            const std::vector<int>& m_grid,
                            const MinimizeOptions& options);

} // namespace cfs::sphere
