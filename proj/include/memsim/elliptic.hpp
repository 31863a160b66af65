// Transformed potential problem on the fixed rectangle: assemble the mapped
// Laplacian, solve -Lap~ psi = f with zero Dirichlet data, recover
// phi~ = psi + z', and extract the boundary trace forcing that drives the
// membranes.
#pragma once

#include <memory>

#include "memsim/grid.hpp"
#include "memsim/mapping.hpp"
#include "memsim/membrane.hpp"
#include "memsim/params.hpp"

namespace memsim {

// Nodewise coefficients of the transformed operator
//   Lap~ w = cxx w_xx + cxz w_xz + czz w_zz + cz w_z
// with cxx = eps^2 everywhere and czz >= 1/(max gap)^2 (uniform ellipticity).
struct TransformedOperator {
    GridPtr grid;
    double eps = 0.0;
    Field2D cxz;
    Field2D czz;
    Field2D cz;

    double cxx() const { return eps * eps; }
};

struct PotentialField {
    Field2D phi_tilde;  // equals z' on all four edges
    Field2D psi;        // phi_tilde - z'
};

struct TraceForcing {
    GridFunction1D g1;  // forcing on the upper membrane (z'=1 trace)
    GridFunction1D g2;  // forcing on the lower membrane (z'=0 trace)
};

// Margins of the potential against its barrier functions, in moving
// coordinates. Negative margin below -10 h^2 means a bound is violated.
struct BarrierReport {
    // z-v <= phi <= 1+z-u (stationary two-sided bound)
    double lower_linear = 0.0;
    double upper_linear = 0.0;
    // x^n + z <= phi <= 2+z-x^n, n the smallest even exponent with v <= -x^n
    bool polynomial_applicable = false;
    int n = 0;
    double lower_poly = 0.0;
    double upper_poly = 0.0;
    double slack = 0.0;  // 10*h^2
};

// Gate: requires membership in the closure of S_q(kappa); throws
// std::domain_error("state outside S_q(kappa) closure: ...") otherwise.
TransformedOperator assemble(const MembranePair& m, const Params& p);

// f_{u,v;eps} = Lap~ z'; same stencils and admissibility gate as assemble.
Field2D source_term(const MembranePair& m, const Params& p);

// Reusable sparse direct solver for one grid (the sparsity analysis is done
// once, refactorization per state). Safe to use from one thread at a time;
// independent instances may run concurrently.
class PotentialSolver {
public:
    explicit PotentialSolver(GridPtr g);
    ~PotentialSolver();
    PotentialSolver(PotentialSolver&&) noexcept;
    PotentialSolver& operator=(PotentialSolver&&) noexcept;

    PotentialField solve(const MembranePair& m, const Params& p);
    // Solves -Lap~ psi = rhs with psi = 0 on the boundary (manufactured
    // right-hand sides); returns psi.
    Field2D solve_dirichlet(const TransformedOperator& op, const Field2D& rhs,
                            double lin_tol);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

PotentialField solve_potential(const MembranePair& m, const Params& p);

// d phi~/dz' at z'=1 and z'=0 by 3-point one-sided differences.
std::pair<GridFunction1D, GridFunction1D> boundary_traces(const PotentialField& phi);

TraceForcing trace_forcing(const MembranePair& m, const Params& p);
TraceForcing trace_forcing(const MembranePair& m, const Params& p,
                           const PotentialField& phi);

BarrierReport barrier_check(const MembranePair& m, const Params& p, int n_cap = 64);

// Quadrature of |grad_eps phi|^2 over the moving domain, computed on the
// fixed rectangle with the Jacobian factor (u-v).
double gradient_energy(const PotentialField& phi, const MembranePair& m,
                       const Params& p);

namespace detail {
// Assembly without the admissibility gate (unit tests relax the boundary
// conditions); requires a strictly positive gap.
TransformedOperator assemble_raw(const MembranePair& m, const Params& p);
Field2D source_term_raw(const MembranePair& m, const Params& p);
}  // namespace detail

}  // namespace memsim
