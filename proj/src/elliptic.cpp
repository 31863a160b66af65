#include "memsim/elliptic.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "memsim/norms.hpp"

namespace memsim {

namespace {

struct MembraneDerivatives {
    std::vector<double> ux, uxx, vx, vxx;
};

MembraneDerivatives membrane_derivatives(const MembranePair& m) {
    const double h = m.grid()->hx;
    return {diff1(m.u.values, h), diff2(m.u.values, h), diff1(m.v.values, h),
            diff2(m.v.values, h)};
}

void gate_admissible(const MembranePair& m, const Params& p) {
    const auto rep = admissible_check(m, p, /*closure=*/true);
    if (!rep.in_S) {
        std::ostringstream os;
        os << "state outside S_q(kappa) closure:";
        for (const auto& name : rep.violated) os << ' ' << name;
        throw std::domain_error(os.str());
    }
}

}  // namespace

namespace detail {

TransformedOperator assemble_raw(const MembranePair& m, const Params& p) {
    if (!(m.min_gap() > 0.0)) throw std::domain_error("domain collapsed");
    const auto g = m.grid();
    const auto d = membrane_derivatives(m);
    const double e2 = p.eps * p.eps;

    TransformedOperator op;
    op.grid = g;
    op.eps = p.eps;
    op.cxz = Field2D(g);
    op.czz = Field2D(g);
    op.cz = Field2D(g);

    for (int i = 0; i < g->nx; ++i) {
        const double gap = m.u[i] - m.v[i];
        const double dux = d.ux[static_cast<size_t>(i)] - d.vx[static_cast<size_t>(i)];
        const double duxx = d.uxx[static_cast<size_t>(i)] - d.vxx[static_cast<size_t>(i)];
        for (int j = 0; j < g->nz; ++j) {
            const double zp = g->zp[static_cast<size_t>(j)];
            // slope blend eta = z'(u_x - v_x) + v_x
            const double eta = zp * dux + d.vx[static_cast<size_t>(i)];
            op.cxz.at(i, j) = -2.0 * e2 * eta / gap;
            op.czz.at(i, j) = (1.0 + e2 * eta * eta) / (gap * gap);
            op.cz.at(i, j) =
                e2 * (2.0 * dux * eta / (gap * gap) -
                      (zp * duxx + d.vxx[static_cast<size_t>(i)]) / gap);
        }
    }
    ensure_finite(op.cxz.values, "operator cxz");
    ensure_finite(op.czz.values, "operator czz");
    ensure_finite(op.cz.values, "operator cz");
    return op;
}

Field2D source_term_raw(const MembranePair& m, const Params& p) {
    // f = Lap~ z', which is exactly the first-order z' coefficient.
    return assemble_raw(m, p).cz;
}

}  // namespace detail

TransformedOperator assemble(const MembranePair& m, const Params& p) {
    gate_admissible(m, p);
    return detail::assemble_raw(m, p);
}

Field2D source_term(const MembranePair& m, const Params& p) {
    gate_admissible(m, p);
    return detail::source_term_raw(m, p);
}

struct PotentialSolver::Impl {
    GridPtr grid;
    Eigen::SparseMatrix<double> A;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analyzed = false;

    explicit Impl(GridPtr g) : grid(std::move(g)) {
        const int n = (grid->nx - 2) * (grid->nz - 2);
        A.resize(n, n);
    }

    int index(int i, int j) const { return (i - 1) * (grid->nz - 2) + (j - 1); }

    void build_matrix(const TransformedOperator& op) {
        const auto& g = *grid;
        const double rx = 1.0 / (g.hx * g.hx);
        const double rz = 1.0 / (g.hz * g.hz);
        const double rxz = 1.0 / (4.0 * g.hx * g.hz);
        const double r1z = 1.0 / (2.0 * g.hz);
        const double cxx = op.cxx();

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(9) * (g.nx - 2) * (g.nz - 2));
        auto add = [&](int row, int i, int j, double val) {
            // neighbors on the boundary carry psi = 0 and drop out
            if (i <= 0 || i >= g.nx - 1 || j <= 0 || j >= g.nz - 1) return;
            trip.emplace_back(row, index(i, j), val);
        };

        for (int i = 1; i < g.nx - 1; ++i) {
            for (int j = 1; j < g.nz - 1; ++j) {
                const int row = index(i, j);
                const double cxz = op.cxz.at(i, j);
                const double czz = op.czz.at(i, j);
                const double cz = op.cz.at(i, j);
                // matrix holds -Lap~, so all stencil weights are negated
                add(row, i, j, 2.0 * cxx * rx + 2.0 * czz * rz);
                add(row, i + 1, j, -cxx * rx);
                add(row, i - 1, j, -cxx * rx);
                add(row, i, j + 1, -(czz * rz + cz * r1z));
                add(row, i, j - 1, -(czz * rz - cz * r1z));
                add(row, i + 1, j + 1, -cxz * rxz);
                add(row, i - 1, j - 1, -cxz * rxz);
                add(row, i + 1, j - 1, cxz * rxz);
                add(row, i - 1, j + 1, cxz * rxz);
            }
        }
        A.setFromTriplets(trip.begin(), trip.end());
    }

    Eigen::VectorXd solve_linear(const Eigen::VectorXd& b, double lin_tol) {
        if (!analyzed) {
            lu.analyzePattern(A);
            analyzed = true;
        }
        lu.factorize(A);
        if (lu.info() != Eigen::Success) {
            throw std::runtime_error("potential solve failed: singular factorization");
        }
        Eigen::VectorXd psi = lu.solve(b);
        const double bn = b.lpNorm<Eigen::Infinity>();
        const double rn = (A * psi - b).lpNorm<Eigen::Infinity>();
        const double scale = std::max(bn, 1.0);
        if (!(rn <= lin_tol * scale)) {
            std::ostringstream os;
            os << "potential solve failed: residual " << rn / scale << " > " << lin_tol;
            throw std::runtime_error(os.str());
        }
        return psi;
    }
};

PotentialSolver::PotentialSolver(GridPtr g) : impl_(std::make_unique<Impl>(std::move(g))) {}
PotentialSolver::~PotentialSolver() = default;
PotentialSolver::PotentialSolver(PotentialSolver&&) noexcept = default;
PotentialSolver& PotentialSolver::operator=(PotentialSolver&&) noexcept = default;

Field2D PotentialSolver::solve_dirichlet(const TransformedOperator& op,
                                         const Field2D& rhs, double lin_tol) {
    const auto& g = *impl_->grid;
    impl_->build_matrix(op);

    Eigen::VectorXd b(static_cast<Eigen::Index>(g.nx - 2) * (g.nz - 2));
    for (int i = 1; i < g.nx - 1; ++i) {
        for (int j = 1; j < g.nz - 1; ++j) b[impl_->index(i, j)] = rhs.at(i, j);
    }
    const Eigen::VectorXd sol = impl_->solve_linear(b, lin_tol);

    Field2D psi(impl_->grid);
    for (int i = 1; i < g.nx - 1; ++i) {
        for (int j = 1; j < g.nz - 1; ++j) psi.at(i, j) = sol[impl_->index(i, j)];
    }
    ensure_finite(psi.values, "psi");
    return psi;
}

PotentialField PotentialSolver::solve(const MembranePair& m, const Params& p) {
    gate_admissible(m, p);
    const auto op = detail::assemble_raw(m, p);

    PotentialField out;
    out.psi = solve_dirichlet(op, op.cz, p.lin_tol);
    out.phi_tilde = out.psi;
    const auto& g = *impl_->grid;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nz; ++j) out.phi_tilde.at(i, j) += g.zp[static_cast<size_t>(j)];
    }
    return out;
}

PotentialField solve_potential(const MembranePair& m, const Params& p) {
    PotentialSolver solver(m.grid());
    return solver.solve(m, p);
}

std::pair<GridFunction1D, GridFunction1D> boundary_traces(const PotentialField& phi) {
    const auto g = phi.phi_tilde.grid;
    const int nz = g->nz;
    const double h2 = 2.0 * g->hz;
    GridFunction1D trace1(g, 0.0, Role::forcing);
    GridFunction1D trace0(g, 0.0, Role::forcing);
    for (int i = 0; i < g->nx; ++i) {
        trace1[i] = (3.0 * phi.phi_tilde.at(i, nz - 1) - 4.0 * phi.phi_tilde.at(i, nz - 2) +
                     phi.phi_tilde.at(i, nz - 3)) / h2;
        trace0[i] = (-3.0 * phi.phi_tilde.at(i, 0) + 4.0 * phi.phi_tilde.at(i, 1) -
                     phi.phi_tilde.at(i, 2)) / h2;
    }
    ensure_finite(trace1.values, "trace1");
    ensure_finite(trace0.values, "trace0");
    return {trace1, trace0};
}

TraceForcing trace_forcing(const MembranePair& m, const Params& p,
                           const PotentialField& phi) {
    const auto g = m.grid();
    const auto [trace1, trace0] = boundary_traces(phi);
    const auto d = membrane_derivatives(m);
    const double e2 = p.eps * p.eps;

    TraceForcing out;
    out.g1 = GridFunction1D(g, 0.0, Role::forcing);
    out.g2 = GridFunction1D(g, 0.0, Role::forcing);
    for (int i = 0; i < g->nx; ++i) {
        const double gap2 = (m.u[i] - m.v[i]) * (m.u[i] - m.v[i]);
        const double ux = d.ux[static_cast<size_t>(i)];
        const double vx = d.vx[static_cast<size_t>(i)];
        out.g1[i] = (1.0 + e2 * ux * ux) / gap2 * trace1[i] * trace1[i];
        out.g2[i] = (1.0 + e2 * vx * vx) / gap2 * trace0[i] * trace0[i];
    }
    return out;
}

TraceForcing trace_forcing(const MembranePair& m, const Params& p) {
    return trace_forcing(m, p, solve_potential(m, p));
}

BarrierReport barrier_check(const MembranePair& m, const Params& p, int n_cap) {
    const auto phi = solve_potential(m, p);
    const auto& g = *m.grid();

    BarrierReport rep;
    rep.slack = 10.0 * std::max(g.hx, g.hz) * std::max(g.hx, g.hz);

    // smallest even exponent with v(x) <= -x^n at every node
    bool wall_clear = true;
    for (int i = 0; i < g.nx; ++i) {
        if (0 < i && i < g.nx - 1 && (m.v[i] >= 0.0 || -m.u[i] - 1.0 >= 0.0)) {
            wall_clear = false;
        }
    }
    int n_found = 0;
    for (int n = 2; n <= n_cap && n_found == 0; n += 2) {
        bool ok = true;
        for (int i = 0; i < g.nx && ok; ++i) {
            ok = m.v[i] <= -std::pow(g.x[static_cast<size_t>(i)], n);
        }
        if (ok) n_found = n;
    }
    rep.polynomial_applicable = wall_clear && n_found > 0;
    rep.n = n_found;

    double lower_lin = 1e300, upper_lin = 1e300, lower_poly = 1e300, upper_poly = 1e300;
    for (int i = 0; i < g.nx; ++i) {
        const double gap = m.u[i] - m.v[i];
        for (int j = 0; j < g.nz; ++j) {
            const double zp = g.zp[static_cast<size_t>(j)];
            const double z = zp * gap + m.v[i];  // physical height
            const double value = phi.phi_tilde.at(i, j);
            lower_lin = std::min(lower_lin, value - (z - m.v[i]));
            upper_lin = std::min(upper_lin, 1.0 + z - m.u[i] - value);
            if (rep.polynomial_applicable) {
                const double xn = std::pow(g.x[static_cast<size_t>(i)], n_found);
                lower_poly = std::min(lower_poly, value - (xn + z));
                upper_poly = std::min(upper_poly, 2.0 + z - xn - value);
            }
        }
    }
    rep.lower_linear = lower_lin;
    rep.upper_linear = upper_lin;
    rep.lower_poly = lower_poly;
    rep.upper_poly = upper_poly;
    return rep;
}

double gradient_energy(const PotentialField& phi, const MembranePair& m,
                       const Params& p) {
    const auto& g = *m.grid();
    const auto d = membrane_derivatives(m);
    const double e2 = p.eps * p.eps;
    const auto& f = phi.phi_tilde;

    auto dx = [&](int i, int j) {
        if (i == 0) return (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j)) / (2.0 * g.hx);
        if (i == g.nx - 1) {
            return (3.0 * f.at(i, j) - 4.0 * f.at(i - 1, j) + f.at(i - 2, j)) / (2.0 * g.hx);
        }
        return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.hx);
    };
    auto dz = [&](int i, int j) {
        if (j == 0) return (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * g.hz);
        if (j == g.nz - 1) {
            return (3.0 * f.at(i, j) - 4.0 * f.at(i, j - 1) + f.at(i, j - 2)) / (2.0 * g.hz);
        }
        return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.hz);
    };

    double total = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        const double gap = m.u[i] - m.v[i];
        const double dux = d.ux[static_cast<size_t>(i)] - d.vx[static_cast<size_t>(i)];
        const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
        for (int j = 0; j < g.nz; ++j) {
            const double zp = g.zp[static_cast<size_t>(j)];
            const double eta = zp * dux + d.vx[static_cast<size_t>(i)];
            const double fz = dz(i, j);
            // grad_eps phi in moving coordinates, expressed on the rectangle
            const double phys_x = dx(i, j) - fz * eta / gap;
            const double phys_z = fz / gap;
            const double wz = (j == 0 || j == g.nz - 1) ? 0.5 : 1.0;
            total += wx * wz * (e2 * phys_x * phys_x + phys_z * phys_z) * gap;
        }
    }
    return total * g.hx * g.hz;
}

}  // namespace memsim
