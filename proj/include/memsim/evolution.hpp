// Time integration of the coupled quasilinear system: implicit frozen-
// coefficient curvature diffusion, explicit trace forcing, elliptic solve in
// the loop. Detects touchdown and norm blow-up and evaluates the analytic
// touchdown-time bound.
#pragma once

#include <optional>
#include <vector>

#include "memsim/elliptic.hpp"
#include "memsim/membrane.hpp"
#include "memsim/params.hpp"

namespace memsim {

enum class Termination { completed, touchdown, norm_blowup, solver_failure };

const char* to_string(Termination t);

struct DiagnosticsRow {
    double t = 0.0;
    double min_gap = 0.0;
    double gap_E = 0.0;    // E(t) = -1/2 integral of [u-(v+1)]
    double energy = 0.0;   // dimensionless total energy
    double norm_u = 0.0;
    double norm_v = 0.0;
    double g1_max = 0.0;
    double g2_max = 0.0;
};

struct Trajectory {
    std::vector<double> times;         // strictly increasing, starts at 0
    std::vector<MembranePair> states;  // one per recorded time
    std::vector<DiagnosticsRow> diagnostics;
    Termination termination = Termination::completed;
    double dt = 0.0;
    std::string failure_detail;  // set for solver_failure
};

struct TouchdownReport {
    bool bound_applicable = false;  // max{lambda,mu} > 4/eps and even data
    double analytic_bound = 0.0;    // meaningful only when applicable
    std::optional<double> observed_time;
    double min_gap_at_end = 0.0;
};

// A(w1)w2 = -w2_xx / (1 + w1_x^2)^{3/2} at interior nodes, zero Dirichlet rows.
GridFunction1D curvature_apply(const GridFunction1D& w1, const GridFunction1D& w2);

// One IMEX step of d/dt(u,v^) + diag(A(eps u),A(eps v^))(u,v^) = (-lambda g1, mu g2):
// curvature coefficients frozen at the current state, diffusion implicit
// (two tridiagonal solves), forcing explicit at the current state.
MembranePair step_imex(const MembranePair& state, const Params& p, double dt);
MembranePair step_imex(const MembranePair& state, const Params& p, double dt,
                       const TraceForcing& g);

// Integrates from `initial` until t_end, touchdown (min_gap < gap_tol) or
// norm blow-up (surrogate norm > norm_cap). Requires (u0,v0)(+-1) = (0,-1)
// and -1 <= v0 < u0 <= 0.
std::pair<Trajectory, TouchdownReport> evolve(const MembranePair& initial,
                                              const Params& p);

// E(t) = -1/2 integral_I [u - (v+1)] dx, in [0,1) for -1 <= v < u <= 0.
double gap_functional(const MembranePair& state);

// lambda eps^2 |grad_eps phi|^2 energy + elastic stretch terms (the second
// membrane weighted by lambda/mu).
double total_energy(const MembranePair& state, const PotentialField& phi,
                    const Params& p);

// ||u0-v0||_{L1} / (max{lambda,mu} - 4/eps) when max{lambda,mu} > 4/eps.
std::optional<double> touchdown_bound(const GridFunction1D& u0,
                                      const GridFunction1D& v0, const Params& p);

}  // namespace memsim
