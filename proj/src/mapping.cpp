#include "memsim/mapping.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

namespace {

void require_positive_gap(const MembranePair& m) {
    if (!(m.min_gap() > 0.0)) throw std::domain_error("domain collapsed");
}

// Linear interpolation of a column sampled at z_k = k*h - 1 restricted to the
// valid index range [k_lo, k_hi]; the stencil is clamped into the range, so
// queries within one cell outside become second-order extrapolation.
double interp_column(const double* col, int k_lo, int k_hi, double h, double z) {
    int k = static_cast<int>(std::floor((z + 1.0) / h));
    k = std::clamp(k, k_lo, k_hi - 1);
    const double zk = static_cast<double>(k) * h - 1.0;
    const double t = (z - zk) / h;
    return (1.0 - t) * col[k] + t * col[k + 1];
}

}  // namespace

MovingSamples::MovingSamples(GridPtr g)
    : grid(std::move(g)),
      values(static_cast<size_t>(grid->nx) * grid->nz, 0.0),
      mask(static_cast<size_t>(grid->nx) * grid->nz, 0) {}

MovingSamples MovingSamples::sample(const MembranePair& m,
                                    const std::function<double(double, double)>& w) {
    MovingSamples s(m.grid());
    const auto& g = *s.grid;
    for (int i = 0; i < g.nx; ++i) {
        for (int k = 0; k < g.nz; ++k) {
            const double z = s.z(k);
            if (z >= m.v[i] && z <= m.u[i]) {
                s.at(i, k) = w(g.x[static_cast<size_t>(i)], z);
                s.mask[static_cast<size_t>(i) * g.nz + k] = 1;
            }
        }
    }
    return s;
}

Field2D push_forward(const MovingSamples& w, const MembranePair& m) {
    require_positive_gap(m);
    const auto& g = *w.grid;
    Field2D out(w.grid);
    for (int i = 0; i < g.nx; ++i) {
        // contiguous valid range of the column
        int k_lo = 0, k_hi = g.nz - 1;
        while (k_lo < g.nz && !w.valid(i, k_lo)) ++k_lo;
        while (k_hi >= 0 && !w.valid(i, k_hi)) --k_hi;
        if (k_lo >= k_hi) throw std::domain_error("domain collapsed");
        const double* col = &w.values[static_cast<size_t>(i) * g.nz];
        for (int j = 0; j < g.nz; ++j) {
            const double z = g.zp[static_cast<size_t>(j)] * (m.u[i] - m.v[i]) + m.v[i];
            out.at(i, j) = interp_column(col, k_lo, k_hi, g.hz, z);
        }
    }
    ensure_finite(out.values, "push_forward");
    return out;
}

MovingSamples pull_back(const Field2D& w, const MembranePair& m) {
    require_positive_gap(m);
    const auto& g = *w.grid;
    MovingSamples out(w.grid);
    for (int i = 0; i < g.nx; ++i) {
        const double gap = m.u[i] - m.v[i];
        for (int k = 0; k < g.nz; ++k) {
            const double z = out.z(k);
            if (z < m.v[i] || z > m.u[i]) continue;
            const double zp = (z - m.v[i]) / gap;
            int j = static_cast<int>(std::floor(zp / g.hz));
            j = std::clamp(j, 0, g.nz - 2);
            const double t = (zp - g.zp[static_cast<size_t>(j)]) / g.hz;
            out.at(i, k) = (1.0 - t) * w.at(i, j) + t * w.at(i, j + 1);
            out.mask[static_cast<size_t>(i) * g.nz + k] = 1;
        }
    }
    ensure_finite(out.values, "pull_back");
    return out;
}

double sup_diff_on_mask(const MovingSamples& a, const MovingSamples& b) {
    double m = 0.0;
    for (size_t idx = 0; idx < a.values.size(); ++idx) {
        if (a.mask[idx] && b.mask[idx]) {
            m = std::max(m, std::abs(a.values[idx] - b.values[idx]));
        }
    }
    return m;
}

}  // namespace memsim
