// Pull-back / push-forward between the moving domain Omega_{u,v} and the fixed
// rectangle via T(x,z) = (x, (z-v)/(u-v)).
//
// Moving-domain functions are sampled on the physical lattice I x [-1,0]
// (the z nodes are z'_j - 1) with a per-column validity mask v_i <= z <= u_i.
// This representation supports the indicator-function embedding used by the
// vanishing-aspect-ratio comparison.
#pragma once

#include <cstdint>

#include "memsim/grid.hpp"
#include "memsim/membrane.hpp"

namespace memsim {

struct MovingSamples {
    GridPtr grid;
    std::vector<double> values;  // nx * nz, row-major like Field2D
    std::vector<uint8_t> mask;   // 1 where v_i <= z_k <= u_i

    MovingSamples() = default;
    explicit MovingSamples(GridPtr g);

    double z(int k) const { return grid->zp[static_cast<size_t>(k)] - 1.0; }
    double& at(int i, int k) { return values[static_cast<size_t>(i) * grid->nz + k]; }
    double at(int i, int k) const { return values[static_cast<size_t>(i) * grid->nz + k]; }
    bool valid(int i, int k) const { return mask[static_cast<size_t>(i) * grid->nz + k] != 0; }

    static MovingSamples sample(const MembranePair& m,
                                const std::function<double(double, double)>& w);
};

// Composition with T^{-1}: resamples w onto the mapped nodes z'_j(u-v)+v by
// linear interpolation in z. Throws std::domain_error on a collapsed gap.
Field2D push_forward(const MovingSamples& w, const MembranePair& m);

// Composition with T: evaluates a fixed-rectangle field at (x, (z-v)/(u-v))
// for the lattice nodes inside the moving domain.
MovingSamples pull_back(const Field2D& w, const MembranePair& m);

double sup_diff_on_mask(const MovingSamples& a, const MovingSamples& b);

}  // namespace memsim
