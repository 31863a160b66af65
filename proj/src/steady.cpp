#include "memsim/steady.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "memsim/norms.hpp"
#include "memsim/parallel.hpp"

namespace memsim {

double J(double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("J requires r >= 0");
    return r * (2.0 * r * r + 3.0) / (3.0 * std::pow(r * r + 1.0, 1.5));
}

double xi0(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("xi0 requires eps > 0");
    return std::min(2.0 * J(eps) / eps, 2.0 / (3.0 * eps));
}

namespace {

// -w_xx = h on the interior with w(+-1) = 0 (inverse of A(0)).
std::vector<double> dirichlet_laplacian_inverse(const std::vector<double>& h,
                                                double hx) {
    const size_t n = h.size();
    const size_t ni = n - 2;
    const double r = 1.0 / (hx * hx);
    std::vector<double> diag(ni, 2.0 * r), b(ni);
    for (size_t k = 0; k < ni; ++k) b[k] = h[k + 1];
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

// h_eps of the fixed-point formulation: quintic curvature factors times the
// squared traces over the squared gap.
std::pair<std::vector<double>, std::vector<double>> h_eps(const MembranePair& U,
                                                          const Params& p,
                                                          const PotentialField& phi) {
    const double hx = U.grid()->hx;
    const double e2 = p.eps * p.eps;
    const auto ux = diff1(U.u.values, hx);
    const auto vx = diff1(U.v.values, hx);
    const auto [tr1, tr0] = boundary_traces(phi);
    const size_t n = U.u.values.size();
    std::vector<double> h1(n), h2(n);
    for (size_t i = 0; i < n; ++i) {
        const double gap2 = (U.u.values[i] - U.v.values[i]) * (U.u.values[i] - U.v.values[i]);
        h1[i] = std::pow(1.0 + e2 * ux[i] * ux[i], 2.5) / gap2 * tr1[static_cast<int>(i)] *
                tr1[static_cast<int>(i)];
        h2[i] = std::pow(1.0 + e2 * vx[i] * vx[i], 2.5) / gap2 * tr0[static_cast<int>(i)] *
                tr0[static_cast<int>(i)];
    }
    return {h1, h2};
}

struct StackedResidual {
    Eigen::VectorXd r;      // interior residuals, u block then v^ block
    double norm = 0.0;
};

int interior_count(const GridPtr& g) { return g->nx - 2; }

Eigen::VectorXd pack_state(const MembranePair& m) {
    const int ni = interior_count(m.grid());
    Eigen::VectorXd x(2 * ni);
    for (int i = 0; i < ni; ++i) {
        x[i] = m.u[i + 1];
        x[ni + i] = m.v[i + 1] + 1.0;
    }
    return x;
}

MembranePair unpack_state(const Eigen::VectorXd& x, const GridPtr& g) {
    const int ni = interior_count(g);
    MembranePair m;
    m.u = GridFunction1D(g, 0.0);
    m.v = GridFunction1D(g, -1.0);
    for (int i = 0; i < ni; ++i) {
        m.u[i + 1] = x[i];
        m.v[i + 1] = x[ni + i] - 1.0;
    }
    return m;
}

}  // namespace

std::pair<GridFunction1D, GridFunction1D> stationary_residual(
    const MembranePair& U, const Params& p, const PotentialField& phi) {
    const auto g = U.grid();
    const double hx = g->hx;
    const double e2 = p.eps * p.eps;
    const auto ux = diff1(U.u.values, hx);
    const auto vx = diff1(U.v.values, hx);
    const auto [tr1, tr0] = boundary_traces(phi);

    GridFunction1D r1(g, 0.0, Role::residual), r2(g, 0.0, Role::residual);
    for (int i = 1; i < g->nx - 1; ++i) {
        const double gap2 = (U.u[i] - U.v[i]) * (U.u[i] - U.v[i]);
        const double uxx = (U.u[i + 1] - 2.0 * U.u[i] + U.u[i - 1]) / (hx * hx);
        const double vxx = (U.v[i + 1] - 2.0 * U.v[i] + U.v[i - 1]) / (hx * hx);
        r1[i] = uxx - p.lambda * std::pow(1.0 + e2 * ux[static_cast<size_t>(i)] *
                                                    ux[static_cast<size_t>(i)], 2.5) /
                          gap2 * tr1[i] * tr1[i];
        r2[i] = vxx + p.mu * std::pow(1.0 + e2 * vx[static_cast<size_t>(i)] *
                                                vx[static_cast<size_t>(i)], 2.5) /
                          gap2 * tr0[i] * tr0[i];
    }
    return {r1, r2};
}

std::pair<GridFunction1D, GridFunction1D> stationary_residual(const MembranePair& U,
                                                              const Params& p) {
    return stationary_residual(U, p, solve_potential(U, p));
}

MembranePair fixed_point_map(double lambda, double mu, const MembranePair& U,
                             const Params& p) {
    const auto g = U.grid();
    const auto phi = solve_potential(U, p);
    const auto [h1, h2] = h_eps(U, p, phi);
    const auto w1 = dirichlet_laplacian_inverse(h1, g->hx);
    const auto w2 = dirichlet_laplacian_inverse(h2, g->hx);

    // F in membrane convention: the flat state is the zero of the map.
    MembranePair out;
    out.u = GridFunction1D(g, 0.0);
    out.v = GridFunction1D(g, -1.0);
    for (int i = 0; i < g->nx; ++i) {
        out.u[i] = U.u[i] + lambda * w1[static_cast<size_t>(i)];
        out.v[i] = (U.v[i] + 1.0) - mu * w2[static_cast<size_t>(i)] - 1.0;
    }
    out.u[0] = out.u[g->nx - 1] = 0.0;
    out.v[0] = out.v[g->nx - 1] = -1.0;
    return out;
}

namespace {

// Residual in stacked form; nullopt when the state is not solvable (left the
// admissible closure or the linear solve failed).
std::optional<StackedResidual> try_residual(const MembranePair& m, const Params& p,
                                            PotentialSolver& solver) {
    try {
        const auto phi = solver.solve(m, p);
        const auto [r1, r2] = stationary_residual(m, p, phi);
        const int ni = interior_count(m.grid());
        StackedResidual out;
        out.r.resize(2 * ni);
        for (int i = 0; i < ni; ++i) {
            out.r[i] = r1[i + 1];
            out.r[ni + i] = r2[i + 1];
        }
        out.norm = out.r.lpNorm<Eigen::Infinity>();
        return out;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Eigen::MatrixXd fd_jacobian(const Eigen::VectorXd& x, const GridPtr& g,
                            const std::function<Eigen::VectorXd(const MembranePair&,
                                                                PotentialSolver&)>& eval) {
    const int n = static_cast<int>(x.size());
    const double step = 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    Eigen::MatrixXd Jm(n, n);
    std::exception_ptr column_error;
    std::mutex error_mutex;
    parallel_for(static_cast<size_t>(n), [&](size_t k) {
        try {
            PotentialSolver solver(g);
            Eigen::VectorXd xp = x, xm = x;
            xp[static_cast<Eigen::Index>(k)] += step;
            xm[static_cast<Eigen::Index>(k)] -= step;
            const Eigen::VectorXd fp = eval(unpack_state(xp, g), solver);
            const Eigen::VectorXd fm = eval(unpack_state(xm, g), solver);
            Jm.col(static_cast<Eigen::Index>(k)) = (fp - fm) / (2.0 * step);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!column_error) column_error = std::current_exception();
        }
    });
    if (column_error) std::rethrow_exception(column_error);
    return Jm;
}

}  // namespace

SteadyState solve_steady(const Params& p, const MembranePair& init, int max_iters) {
    p.validate();
    const auto g = init.grid();
    const double tol = 1e-10;

    SteadyState out;
    out.state = init;

    PotentialSolver solver(g);
    Eigen::VectorXd x = pack_state(init);
    auto current = try_residual(init, p, solver);
    if (!current) {
        out.detail = "initial state not solvable";
        return out;
    }

    auto eval_res = [&p](const MembranePair& m, PotentialSolver& s) -> Eigen::VectorXd {
        const auto phi = s.solve(m, p);
        const auto [r1, r2] = stationary_residual(m, p, phi);
        const int ni = interior_count(m.grid());
        Eigen::VectorXd r(2 * ni);
        for (int i = 0; i < ni; ++i) {
            r[i] = r1[i + 1];
            r[ni + i] = r2[i + 1];
        }
        return r;
    };

    for (int iter = 0; iter < max_iters; ++iter) {
        if (current->norm <= tol) {
            out.state = unpack_state(x, g);
            out.phi = solve_potential(out.state, p);
            out.residual_norm = current->norm;
            out.newton_iters = iter;
            out.converged = admissible_check(out.state, p, true).in_S;
            if (!out.converged) out.detail = "converged outside admissible closure";
            return out;
        }

        Eigen::MatrixXd Jm;
        try {
            Jm = fd_jacobian(x, g, eval_res);
        } catch (const std::exception& e) {
            out.detail = std::string("jacobian evaluation failed: ") + e.what();
            out.newton_iters = iter;
            return out;
        }
        const Eigen::VectorXd delta = Jm.partialPivLu().solve(-current->r);
        if (!delta.allFinite()) {
            out.detail = "singular Newton system";
            out.newton_iters = iter;
            return out;
        }

        // damping: halve until the residual norm decreases, down to 2^-10
        bool accepted = false;
        double scale = 1.0;
        for (int half = 0; half <= 10; ++half, scale *= 0.5) {
            const Eigen::VectorXd x_try = x + scale * delta;
            const auto res_try = try_residual(unpack_state(x_try, g), p, solver);
            if (res_try && res_try->norm < current->norm) {
                x = x_try;
                current = res_try;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.detail = "line search exhausted";
            out.newton_iters = iter + 1;
            out.residual_norm = current->norm;
            return out;
        }
    }

    if (current->norm <= tol) {
        out.state = unpack_state(x, g);
        out.phi = solve_potential(out.state, p);
        out.residual_norm = current->norm;
        out.newton_iters = max_iters;
        out.converged = admissible_check(out.state, p, true).in_S;
        if (!out.converged) out.detail = "converged outside admissible closure";
    } else {
        out.detail = "max iterations reached";
        out.residual_norm = current->norm;
        out.newton_iters = max_iters;
    }
    return out;
}

ContinuationResult pullin_sweep(const Params& p, const std::vector<double>& lambda_grid,
                                GridPtr g, double mu_ratio) {
    p.validate();
    if (lambda_grid.empty()) throw std::invalid_argument("pullin_sweep: empty grid");
    for (size_t k = 1; k < lambda_grid.size(); ++k) {
        if (!(lambda_grid[k] > lambda_grid[k - 1])) {
            throw std::invalid_argument("pullin_sweep: grid must be increasing");
        }
    }

    ContinuationResult result;
    MembranePair warm = MembranePair::flat(g);

    auto attempt = [&](double lambda) -> std::optional<SteadyState> {
        Params pl = p;
        pl.lambda = lambda;
        pl.mu = mu_ratio * lambda;
        SteadyState s = solve_steady(pl, warm);
        if (!s.converged) return std::nullopt;
        return s;
    };

    auto accept = [&](double lambda, SteadyState&& s) {
        warm = s.state;
        result.steps.push_back({lambda, s.residual_norm, s.state.min_gap(), s.newton_iters});
        result.fold_estimate = lambda;
        result.states.push_back(std::move(s));
    };

    double last_success = 0.0;
    bool have_success = false;
    for (double lambda : lambda_grid) {
        auto s = attempt(lambda);
        if (s) {
            accept(lambda, std::move(*s));
            last_success = lambda;
            have_success = true;
            continue;
        }
        // step halving toward the fold between the last success and the failure
        if (have_success) {
            double lo = last_success, hi = lambda;
            while (hi - lo > 1e-3) {
                const double mid = 0.5 * (lo + hi);
                auto sm = attempt(mid);
                if (sm) {
                    accept(mid, std::move(*sm));
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        break;
    }

    if (result.fold_estimate) {
        const double fold_max = *result.fold_estimate * std::max(1.0, mu_ratio);
        if (fold_max > xi0(p.eps) + 1e-2) {
            std::ostringstream os;
            os << "pullin_sweep: steady state found at max{lambda,mu}=" << fold_max
               << " above the non-existence threshold xi0=" << xi0(p.eps);
            throw std::logic_error(os.str());
        }
    }
    return result;
}

namespace {

Eigen::VectorXd evolution_rhs(const MembranePair& m, const Params& p,
                              PotentialSolver& solver) {
    const auto g = m.grid();
    const double hx = g->hx;
    const double e2 = p.eps * p.eps;
    const auto phi = solver.solve(m, p);
    const auto forcing = trace_forcing(m, p, phi);

    GridFunction1D vhat = m.v;
    for (auto& val : vhat.values) val += 1.0;
    const auto ux = diff1(m.u.values, hx);
    const auto vx = diff1(vhat.values, hx);

    const int ni = interior_count(g);
    Eigen::VectorXd q(2 * ni);
    for (int i = 1; i < g->nx - 1; ++i) {
        const double uxx = (m.u[i + 1] - 2.0 * m.u[i] + m.u[i - 1]) / (hx * hx);
        const double vhxx = (vhat[i + 1] - 2.0 * vhat[i] + vhat[i - 1]) / (hx * hx);
        const double su = e2 * ux[static_cast<size_t>(i)] * ux[static_cast<size_t>(i)];
        const double sv = e2 * vx[static_cast<size_t>(i)] * vx[static_cast<size_t>(i)];
        q[i - 1] = uxx / std::pow(1.0 + su, 1.5) - p.lambda * forcing.g1[i];
        q[ni + i - 1] = vhxx / std::pow(1.0 + sv, 1.5) + p.mu * forcing.g2[i];
    }
    return q;
}

}  // namespace

Eigen::MatrixXd linearize(const SteadyState& S, const Params& p) {
    if (!S.converged) throw std::invalid_argument("linearize requires a converged state");
    const auto g = S.state.grid();
    return fd_jacobian(pack_state(S.state), g,
                       [&p](const MembranePair& m, PotentialSolver& s) {
                           return evolution_rhs(m, p, s);
                       });
}

Eigen::MatrixXd curvature_jacobian(const GridFunction1D& w, double eps) {
    const auto g = w.grid;
    const double hx = g->hx;
    const int ni = g->nx - 2;
    const auto wx = diff1(w.values, hx);

    Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(ni, ni);
    for (int i = 1; i < g->nx - 1; ++i) {
        const double wxx = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (hx * hx);
        const double s = eps * wx[static_cast<size_t>(i)];
        const double beta = 1.0 / std::pow(1.0 + s * s, 1.5);
        const double gamma =
            3.0 * eps * eps * wx[static_cast<size_t>(i)] * wxx / std::pow(1.0 + s * s, 2.5);
        const int r = i - 1;
        Jm(r, r) += -2.0 * beta / (hx * hx);
        if (r > 0) Jm(r, r - 1) += beta / (hx * hx) + gamma / (2.0 * hx);
        if (r < ni - 1) Jm(r, r + 1) += beta / (hx * hx) - gamma / (2.0 * hx);
    }
    return Jm;
}

Eigen::MatrixXd curvature_jacobian_fd(const GridFunction1D& w, double eps) {
    const auto g = w.grid;
    const double hx = g->hx;
    const int ni = g->nx - 2;

    auto rhs = [&](const std::vector<double>& vals) {
        const auto vx = diff1(vals, hx);
        Eigen::VectorXd q(ni);
        for (int i = 1; i < g->nx - 1; ++i) {
            const double vxx = (vals[static_cast<size_t>(i + 1)] -
                                2.0 * vals[static_cast<size_t>(i)] +
                                vals[static_cast<size_t>(i - 1)]) / (hx * hx);
            const double s = eps * vx[static_cast<size_t>(i)];
            q[i - 1] = vxx / std::pow(1.0 + s * s, 1.5);
        }
        return q;
    };

    const double step = 1e-6 * std::max(1.0, max_abs(w.values));
    Eigen::MatrixXd Jm(ni, ni);
    for (int k = 0; k < ni; ++k) {
        auto vp = w.values, vm = w.values;
        vp[static_cast<size_t>(k + 1)] += step;
        vm[static_cast<size_t>(k + 1)] -= step;
        Jm.col(k) = (rhs(vp) - rhs(vm)) / (2.0 * step);
    }
    return Jm;
}

double spectral_abscissa(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    double a = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        a = std::max(a, es.eigenvalues()[k].real());
    }
    return a;
}

StabilityReport stability_experiment(const SteadyState& S, const Params& p,
                                     const MembranePair& perturbed_init) {
    StabilityReport report;
    const Eigen::MatrixXd Jm = linearize(S, p);
    report.spectral_abscissa = spectral_abscissa(Jm);
    report.matrix_dim = static_cast<int>(Jm.rows());

    auto [traj, td] = evolve(perturbed_init, p);
    (void)td;

    std::vector<double> ts, ds;
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double d = std::max(max_abs_diff(traj.states[k].u.values, S.state.u.values),
                                  max_abs_diff(traj.states[k].v.values, S.state.v.values));
        ts.push_back(traj.times[k]);
        ds.push_back(d);
    }

    // fit window: last half of the samples that sit above the noise floor
    const double floor_eps = 100.0 * std::numeric_limits<double>::epsilon();
    const double noise_level = std::max(1e-9, 100.0 * S.residual_norm);
    double d_max = 0.0;
    for (double d : ds) d_max = std::max(d_max, d);
    if (d_max <= noise_level) return report;  // fixed point: fit skipped

    std::vector<size_t> eligible;
    for (size_t k = 0; k < ds.size(); ++k) {
        if (ds[k] > floor_eps) eligible.push_back(k);
    }
    if (eligible.size() < 4) return report;
    const size_t start = eligible.size() / 2;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t idx = start; idx < eligible.size(); ++idx) {
        const double t = ts[eligible[idx]];
        const double y = std::log(ds[eligible[idx]]);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++n;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return report;
    const double slope = (n * sxy - sx * sy) / denom;
    report.fitted_decay_rate = -slope;
    report.fit_samples = n;
    return report;
}

std::vector<MembranePair> standard_init_family(GridPtr g) {
    std::vector<MembranePair> family;
    family.push_back(MembranePair::flat(g));
    family.push_back(MembranePair::parabolic(g, 0.1));
    family.push_back(MembranePair::parabolic(g, 0.2));
    family.push_back(MembranePair::parabolic(g, 0.3));
    return family;
}

}  // namespace memsim
