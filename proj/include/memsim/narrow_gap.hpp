// Small-aspect-ratio model: closed-form potential phi = (z-v)/(u-v) and the
// semilinear heat system with the singular 1/(u-v)^2 coupling, plus the
// eps -> 0 convergence comparison against the full model.
#pragma once

#include <vector>

#include "memsim/evolution.hpp"
#include "memsim/mapping.hpp"
#include "memsim/membrane.hpp"
#include "memsim/params.hpp"

namespace memsim {

// Potential in transformed coordinates (identically z' on the mapped grid).
Field2D sar_potential(const MembranePair& state);
// Potential sampled on the physical lattice with indicator mask.
MovingSamples sar_potential_physical(const MembranePair& state);

// Same IMEX scheme as the full model with A(0) diffusion and explicit
// forcing -lambda/(u-v)^2, +mu/(u-v)^2; no elliptic solve.
MembranePair sar_step(const MembranePair& state, double lambda, double mu, double dt);

Trajectory sar_evolve(const MembranePair& initial, const Params& p);

struct ConvergenceRow {
    double eps = 0.0;
    double d_state = 0.0;      // max over sample times of sup-node distance
    double d_potential = 0.0;  // L2 indicator-embedded distance at final time
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double tau = 0.0;
};

// Max over shared sample times of the sup-node distance between two
// trajectories; rejects mismatched time grids.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

// Runs the full model for each eps in eps_list (concurrently) and the SAR
// model once, all sharing initial data, grid and time grid, and tabulates
// the distances. Every run must reach t_end = tau.
ConvergenceTable compare_to_sar(const std::vector<double>& eps_list,
                                const MembranePair& initial, const Params& p);

}  // namespace memsim
