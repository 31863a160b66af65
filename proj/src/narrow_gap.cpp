#include "memsim/narrow_gap.hpp"

#include <cmath>
#include <sstream>

#include "memsim/norms.hpp"
#include "memsim/parallel.hpp"

namespace memsim {

namespace {

std::vector<double> sar_forcing(const MembranePair& state) {
    std::vector<double> f(state.u.values.size());
    for (size_t i = 0; i < f.size(); ++i) {
        const double gap = state.u.values[i] - state.v.values[i];
        f[i] = 1.0 / (gap * gap);
    }
    return f;
}

// (I - dt d_xx) w = rhs with w(+-1) = 0; the matrix is shared by both
// membranes so mirror-symmetric data stays exactly mirror-symmetric.
std::vector<double> heat_solve(const std::vector<double>& rhs, double dt, double hx) {
    const size_t n = rhs.size();
    const size_t ni = n - 2;
    const double r = dt / (hx * hx);
    std::vector<double> diag(ni, 1.0 + 2.0 * r), b(ni);
    for (size_t k = 0; k < ni; ++k) b[k] = rhs[k + 1];
    for (size_t k = 1; k < ni; ++k) {
        const double w = r / diag[k - 1];
        diag[k] -= w * r;
        b[k] += w * b[k - 1];
    }
    b[ni - 1] /= diag[ni - 1];
    for (size_t k = ni - 1; k-- > 0;) b[k] = (b[k] + r * b[k + 1]) / diag[k];
    std::vector<double> out(n, 0.0);
    for (size_t k = 0; k < ni; ++k) out[k + 1] = b[k];
    return out;
}

}  // namespace

Field2D sar_potential(const MembranePair& state) {
    if (!(state.min_gap() > 0.0)) throw std::domain_error("domain collapsed");
    // phi = (z - v)/(u - v) evaluated at the mapped nodes z = z'(u-v)+v is z'
    // itself; the gap dependence sits in the z-derivative 1/(u-v).
    const auto g = state.grid();
    Field2D out(g);
    for (int i = 0; i < g->nx; ++i) {
        for (int j = 0; j < g->nz; ++j) out.at(i, j) = g->zp[static_cast<size_t>(j)];
    }
    return out;
}

MovingSamples sar_potential_physical(const MembranePair& state) {
    if (!(state.min_gap() > 0.0)) throw std::domain_error("domain collapsed");
    MovingSamples s(state.grid());
    const auto& g = *s.grid;
    for (int i = 0; i < g.nx; ++i) {
        const double gap = state.u[i] - state.v[i];
        for (int k = 0; k < g.nz; ++k) {
            const double z = s.z(k);
            if (z >= state.v[i] && z <= state.u[i]) {
                s.at(i, k) = (z - state.v[i]) / gap;
                s.mask[static_cast<size_t>(i) * g.nz + k] = 1;
            }
        }
    }
    return s;
}

MembranePair sar_step(const MembranePair& state, double lambda, double mu, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(state.min_gap() > 0.0)) throw std::domain_error("domain collapsed");
    const auto grid = state.grid();
    const int n = grid->nx;
    const auto f = sar_forcing(state);

    std::vector<double> rhs_u(static_cast<size_t>(n)), rhs_v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        rhs_u[static_cast<size_t>(i)] = state.u[i] - dt * lambda * f[static_cast<size_t>(i)];
        rhs_v[static_cast<size_t>(i)] =
            (state.v[i] + 1.0) + dt * mu * f[static_cast<size_t>(i)];
    }

    MembranePair next;
    next.u = GridFunction1D(grid, 0.0);
    next.v = GridFunction1D(grid, 0.0);
    next.u.values = heat_solve(rhs_u, dt, grid->hx);
    const auto vhat = heat_solve(rhs_v, dt, grid->hx);
    for (int i = 0; i < n; ++i) next.v[i] = vhat[static_cast<size_t>(i)] - 1.0;
    next.v[0] = next.v[n - 1] = -1.0;

    ensure_finite(next.u.values, "sar_step u");
    ensure_finite(next.v.values, "sar_step v");
    return next;
}

Trajectory sar_evolve(const MembranePair& initial, const Params& p) {
    p.validate();
    const auto grid = initial.grid();
    const double dt = p.dt > 0.0 ? p.dt : p.default_dt(grid->hx);

    Trajectory traj;
    traj.dt = dt;

    auto record = [&](const MembranePair& s, double t) {
        DiagnosticsRow row;
        row.t = t;
        row.min_gap = s.min_gap();
        row.gap_E = gap_functional(s);
        // SAR electrostatic energy: integral over the gap of |phi_z|^2 is
        // 1/(u-v) per column
        std::vector<double> e(s.u.values.size());
        const auto f = sar_forcing(s);
        for (size_t i = 0; i < e.size(); ++i) e[i] = 1.0 / (s.u.values[i] - s.v.values[i]);
        row.energy = trapezoid(e, grid->hx);
        row.norm_u = discrete_norm(s.u, 2, p.q);
        GridFunction1D vhat = s.v;
        for (auto& val : vhat.values) val += 1.0;
        row.norm_v = discrete_norm(vhat, 2, p.q);
        row.g1_max = max_abs(f);
        row.g2_max = row.g1_max;
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.diagnostics.push_back(row);
    };

    MembranePair state = initial;
    long step = 0;
    const long max_steps = static_cast<long>(std::ceil(p.t_end / dt - 1e-9));
    for (;;) {
        const double t = static_cast<double>(step) * dt;
        if (state.min_gap() < p.gap_tol) {
            traj.termination = Termination::touchdown;
            record(state, t);
            break;
        }
        GridFunction1D vhat = state.v;
        for (auto& val : vhat.values) val += 1.0;
        if (discrete_norm(state.u, 2, p.q) > p.norm_cap ||
            discrete_norm(vhat, 2, p.q) > p.norm_cap) {
            traj.termination = Termination::norm_blowup;
            record(state, t);
            break;
        }
        if (step >= max_steps) {
            traj.termination = Termination::completed;
            record(state, t);
            break;
        }
        if (step % p.sample_every == 0) record(state, t);
        state = sar_step(state, p.lambda, p.mu, dt);
        ++step;
    }
    return traj;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size()) {
        throw std::invalid_argument("trajectory_distance: sample counts differ");
    }
    double d = 0.0;
    for (size_t k = 0; k < a.times.size(); ++k) {
        if (a.times[k] != b.times[k]) {
            throw std::invalid_argument("trajectory_distance: time grids differ");
        }
        d = std::max(d, max_abs_diff(a.states[k].u.values, b.states[k].u.values));
        d = std::max(d, max_abs_diff(a.states[k].v.values, b.states[k].v.values));
    }
    return d;
}

namespace {

// L2(I x (-1,0)) distance between indicator-embedded potentials.
double potential_distance(const MovingSamples& a, const MovingSamples& b) {
    const auto& g = *a.grid;
    double total = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
        for (int k = 0; k < g.nz; ++k) {
            const double wz = (k == 0 || k == g.nz - 1) ? 0.5 : 1.0;
            const double va = a.valid(i, k) ? a.at(i, k) : 0.0;
            const double vb = b.valid(i, k) ? b.at(i, k) : 0.0;
            total += wx * wz * (va - vb) * (va - vb);
        }
    }
    return std::sqrt(total * g.hx * g.hz);
}

}  // namespace

ConvergenceTable compare_to_sar(const std::vector<double>& eps_list,
                                const MembranePair& initial, const Params& p) {
    p.validate();
    if (eps_list.empty()) throw std::invalid_argument("compare_to_sar: empty eps list");
    if (!(p.dt > 0.0)) {
        throw std::invalid_argument("compare_to_sar: explicit dt required (shared time grid)");
    }

    const Trajectory sar = sar_evolve(initial, p);
    if (sar.termination != Termination::completed) {
        throw std::runtime_error(std::string("compare_to_sar: SAR run terminated with ") +
                                 to_string(sar.termination));
    }
    const MovingSamples sar_phi = sar_potential_physical(sar.states.back());

    std::vector<Trajectory> runs(eps_list.size());
    std::vector<std::string> failures(eps_list.size());
    parallel_for(eps_list.size(), [&](size_t k) {
        Params pk = p;
        pk.eps = eps_list[k];
        auto [traj, report] = evolve(initial, pk);
        (void)report;
        if (traj.termination != Termination::completed) {
            std::ostringstream os;
            os << "eps=" << eps_list[k] << " terminated with " << to_string(traj.termination);
            failures[k] = os.str();
        }
        runs[k] = std::move(traj);
    });
    for (const auto& f : failures) {
        if (!f.empty()) throw std::runtime_error("compare_to_sar: " + f);
    }

    ConvergenceTable table;
    table.tau = p.t_end;
    for (size_t k = 0; k < eps_list.size(); ++k) {
        ConvergenceRow row;
        row.eps = eps_list[k];
        row.d_state = trajectory_distance(runs[k], sar);

        Params pk = p;
        pk.eps = eps_list[k];
        pk.kappa = std::min(0.499, 0.5 * p.gap_tol);
        const auto& final_state = runs[k].states.back();
        const auto phi = solve_potential(final_state, pk);
        const MovingSamples full_phi = pull_back(phi.phi_tilde, final_state);
        row.d_potential = potential_distance(full_phi, sar_phi);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace memsim
