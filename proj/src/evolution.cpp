#include "memsim/evolution.hpp"

#include <cmath>
#include <limits>

#include "memsim/norms.hpp"

namespace memsim {

namespace {

// One implicit diffusion solve: (I - dt beta d_xx) w = rhs with w(+-1) = 0.
// beta is frozen per node; row k couples to both neighbors with weight -r_k,
// so the system is tridiagonal and strictly diagonally dominant. Thomas
// elimination, no pivoting.
std::vector<double> implicit_curvature_solve(const std::vector<double>& beta,
                                             const std::vector<double>& rhs,
                                             double dt, double hx) {
    const size_t n = rhs.size();
    const size_t ni = n - 2;
    std::vector<double> diag(ni), r(ni), b(ni);
    for (size_t k = 0; k < ni; ++k) {
        r[k] = dt * beta[k + 1] / (hx * hx);
        diag[k] = 1.0 + 2.0 * r[k];
        b[k] = rhs[k + 1];
    }
    for (size_t k = 1; k < ni; ++k) {
        const double w = r[k] / diag[k - 1];  // eliminate the -r_k lower entry
        diag[k] -= w * r[k - 1];
        b[k] += w * b[k - 1];
    }
    b[ni - 1] /= diag[ni - 1];
    for (size_t k = ni - 1; k-- > 0;) {
        b[k] = (b[k] + r[k] * b[k + 1]) / diag[k];
    }
    std::vector<double> out(n, 0.0);
    for (size_t k = 0; k < ni; ++k) out[k + 1] = b[k];
    return out;
}

std::vector<double> frozen_beta(const GridFunction1D& w, double eps) {
    const auto wx = diff1(w.values, w.grid->hx);
    std::vector<double> beta(wx.size());
    for (size_t i = 0; i < wx.size(); ++i) {
        const double s = eps * wx[i];
        beta[i] = 1.0 / std::pow(1.0 + s * s, 1.5);
    }
    return beta;
}

double l1_norm_of_gap(const GridFunction1D& u0, const GridFunction1D& v0) {
    std::vector<double> a(u0.values.size());
    for (size_t i = 0; i < a.size(); ++i) a[i] = std::abs(u0.values[i] - v0.values[i]);
    return trapezoid(a, u0.grid->hx);
}

}  // namespace

const char* to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::touchdown: return "touchdown";
        case Termination::norm_blowup: return "norm_blowup";
        case Termination::solver_failure: return "solver_failure";
    }
    return "unknown";
}

GridFunction1D curvature_apply(const GridFunction1D& w1, const GridFunction1D& w2) {
    if (w1.grid != w2.grid) throw std::invalid_argument("curvature_apply: grid mismatch");
    const double hx = w1.grid->hx;
    const auto w1x = diff1(w1.values, hx);
    GridFunction1D out(w1.grid, 0.0, Role::residual);
    for (int i = 1; i < w1.size() - 1; ++i) {
        const double w2xx = (w2[i + 1] - 2.0 * w2[i] + w2[i - 1]) / (hx * hx);
        const double s = w1x[static_cast<size_t>(i)];
        out[i] = -w2xx / std::pow(1.0 + s * s, 1.5);
    }
    return out;
}

MembranePair step_imex(const MembranePair& state, const Params& p, double dt,
                       const TraceForcing& g) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    const auto grid = state.grid();
    const double hx = grid->hx;
    const int n = grid->nx;

    const auto beta_u = frozen_beta(state.u, p.eps);
    GridFunction1D vhat = state.v;
    for (auto& val : vhat.values) val += 1.0;
    const auto beta_v = frozen_beta(vhat, p.eps);

    std::vector<double> rhs_u(static_cast<size_t>(n)), rhs_v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        rhs_u[static_cast<size_t>(i)] = state.u[i] - dt * p.lambda * g.g1[i];
        rhs_v[static_cast<size_t>(i)] = vhat[i] + dt * p.mu * g.g2[i];
    }

    MembranePair next;
    next.u = GridFunction1D(grid, 0.0);
    next.v = GridFunction1D(grid, 0.0);
    next.u.values = implicit_curvature_solve(beta_u, rhs_u, dt, hx);
    const auto vhat_next = implicit_curvature_solve(beta_v, rhs_v, dt, hx);
    for (int i = 0; i < n; ++i) next.v[i] = vhat_next[static_cast<size_t>(i)] - 1.0;
    next.v[0] = next.v[n - 1] = -1.0;

    ensure_finite(next.u.values, "step_imex u");
    ensure_finite(next.v.values, "step_imex v");
    return next;
}

MembranePair step_imex(const MembranePair& state, const Params& p, double dt) {
    return step_imex(state, p, dt, trace_forcing(state, p));
}

double gap_functional(const MembranePair& state) {
    std::vector<double> integrand(state.u.values.size());
    for (size_t i = 0; i < integrand.size(); ++i) {
        integrand[i] = state.u.values[i] - (state.v.values[i] + 1.0);
    }
    return -0.5 * trapezoid(integrand, state.grid()->hx);
}

double total_energy(const MembranePair& state, const PotentialField& phi,
                    const Params& p) {
    const double hx = state.grid()->hx;
    const double e2 = p.eps * p.eps;
    const auto ux = diff1(state.u.values, hx);
    const auto vx = diff1(state.v.values, hx);
    std::vector<double> su(ux.size()), sv(vx.size());
    for (size_t i = 0; i < ux.size(); ++i) {
        su[i] = std::sqrt(1.0 + e2 * ux[i] * ux[i]) - 1.0;
        sv[i] = std::sqrt(1.0 + e2 * vx[i] * vx[i]) - 1.0;
    }
    // second elastic term carries the tension ratio T2/T1 = lambda/mu
    const double ratio = p.mu > 0.0 ? p.lambda / p.mu : 0.0;
    return p.lambda * e2 * gradient_energy(phi, state, p) + trapezoid(su, hx) +
           ratio * trapezoid(sv, hx);
}

std::optional<double> touchdown_bound(const GridFunction1D& u0,
                                      const GridFunction1D& v0, const Params& p) {
    const double m = std::max(p.lambda, p.mu);
    if (!(m > 4.0 / p.eps)) return std::nullopt;
    return l1_norm_of_gap(u0, v0) / (m - 4.0 / p.eps);
}

std::pair<Trajectory, TouchdownReport> evolve(const MembranePair& initial,
                                              const Params& p) {
    p.validate();
    const auto grid = initial.grid();
    const int n = grid->nx;
    if (initial.u[0] != 0.0 || initial.u[n - 1] != 0.0 || initial.v[0] != -1.0 ||
        initial.v[n - 1] != -1.0) {
        throw std::invalid_argument("evolve: initial data must satisfy (u,v)(+-1)=(0,-1)");
    }
    for (int i = 0; i < n; ++i) {
        if (!(initial.v[i] >= -1.0 && initial.v[i] < initial.u[i] && initial.u[i] <= 0.0)) {
            throw std::invalid_argument("evolve: initial data must satisfy -1 <= v0 < u0 <= 0");
        }
    }

    const double dt = p.dt > 0.0 ? p.dt : p.default_dt(grid->hx);
    // Elliptic solvability is tied to the touchdown threshold: the in-loop
    // admissibility gate uses kappa = gap_tol/2, so every state that has not
    // reached touchdown stays inside the closed admissible set.
    Params p_loop = p;
    p_loop.kappa = std::min(0.499, 0.5 * p.gap_tol);

    PotentialSolver solver(grid);
    Trajectory traj;
    traj.dt = dt;
    TouchdownReport report;

    const double bound_den = std::max(p.lambda, p.mu) - 4.0 / p.eps;
    report.bound_applicable = bound_den > 0.0 && mirror_mismatch(initial) <= 1e-12;
    if (bound_den > 0.0) {
        report.analytic_bound = l1_norm_of_gap(initial.u, initial.v) / bound_den;
    }

    auto record = [&](const MembranePair& s, double t, const PotentialField* phi,
                      const TraceForcing* g) {
        DiagnosticsRow row;
        row.t = t;
        row.min_gap = s.min_gap();
        row.gap_E = gap_functional(s);
        row.norm_u = discrete_norm(s.u, 2, p.q);
        GridFunction1D vhat = s.v;
        for (auto& val : vhat.values) val += 1.0;
        row.norm_v = discrete_norm(vhat, 2, p.q);
        if (phi != nullptr && g != nullptr) {
            row.energy = total_energy(s, *phi, p);
            row.g1_max = max_abs(g->g1.values);
            row.g2_max = max_abs(g->g2.values);
        } else {
            row.energy = std::numeric_limits<double>::quiet_NaN();
            row.g1_max = std::numeric_limits<double>::quiet_NaN();
            row.g2_max = std::numeric_limits<double>::quiet_NaN();
        }
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.diagnostics.push_back(row);
    };

    // terminal diagnostics: the gate no longer applies, but the potential is
    // still well defined for any positive gap
    auto record_terminal = [&](const MembranePair& s, double t) {
        if (s.min_gap() > 0.0) {
            try {
                const auto op = detail::assemble_raw(s, p_loop);
                PotentialField phi;
                phi.psi = solver.solve_dirichlet(op, op.cz, p.lin_tol);
                phi.phi_tilde = phi.psi;
                for (int i = 0; i < grid->nx; ++i) {
                    for (int j = 0; j < grid->nz; ++j) {
                        phi.phi_tilde.at(i, j) += grid->zp[static_cast<size_t>(j)];
                    }
                }
                const auto g = trace_forcing(s, p_loop, phi);
                record(s, t, &phi, &g);
                return;
            } catch (const std::exception&) {
                // fall through to the state-only row
            }
        }
        record(s, t, nullptr, nullptr);
    };

    MembranePair state = initial;
    long step = 0;
    const long max_steps = static_cast<long>(std::ceil(p.t_end / dt - 1e-9));

    for (;;) {
        const double t = static_cast<double>(step) * dt;
        const double gap = state.min_gap();

        if (gap < p.gap_tol) {
            traj.termination = Termination::touchdown;
            record_terminal(state, t);
            report.observed_time = t;
            break;
        }
        {
            GridFunction1D vhat = state.v;
            for (auto& val : vhat.values) val += 1.0;
            if (discrete_norm(state.u, 2, p.q) > p.norm_cap ||
                discrete_norm(vhat, 2, p.q) > p.norm_cap) {
                traj.termination = Termination::norm_blowup;
                record_terminal(state, t);
                break;
            }
        }
        if (step >= max_steps) {
            traj.termination = Termination::completed;
            record_terminal(state, t);
            break;
        }

        try {
            const auto phi = solver.solve(state, p_loop);
            const auto g = trace_forcing(state, p_loop, phi);
            if (step % p.sample_every == 0) record(state, t, &phi, &g);
            state = step_imex(state, p_loop, dt, g);
        } catch (const std::exception& e) {
            traj.termination = Termination::solver_failure;
            traj.failure_detail = e.what();
            record_terminal(state, t);
            break;
        }
        ++step;
    }

    report.min_gap_at_end = traj.states.back().min_gap();
    return {traj, report};
}

}  // namespace memsim
