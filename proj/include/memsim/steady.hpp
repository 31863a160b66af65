// Stationary states of the transformed system: threshold functions, Newton
// solver with finite-difference Jacobian, pull-in continuation and linear
// stability via the spectral abscissa of the discrete linearization.
#pragma once

#include <optional>
#include <vector>

#include "memsim/elliptic.hpp"
#include "memsim/evolution.hpp"
#include "memsim/membrane.hpp"
#include "memsim/params.hpp"

#include <Eigen/Dense>

namespace memsim {

// J(r) = integral_0^r ds/(1+s^2)^{5/2} = r(2r^2+3)/(3(r^2+1)^{3/2});
// strictly increasing, concave, sup over [0,inf) equal to 2/3.
double J(double r);

// xi0(eps) = min{2 J(eps)/eps, 2/(3 eps)}; no steady state exists above it.
double xi0(double eps);

struct SteadyState {
    MembranePair state;
    PotentialField phi;
    double residual_norm = 0.0;
    int newton_iters = 0;
    bool converged = false;
    std::string detail;  // set on failure
};

struct ContinuationStep {
    double lambda = 0.0;
    double residual = 0.0;
    double min_gap = 0.0;
    int newton_iters = 0;
};

struct ContinuationResult {
    std::vector<ContinuationStep> steps;  // successful solves only
    std::vector<SteadyState> states;
    std::optional<double> fold_estimate;  // largest lambda reached
};

struct StabilityReport {
    double spectral_abscissa = 0.0;
    std::optional<double> fitted_decay_rate;  // absent when the fit is skipped
    int matrix_dim = 0;
    int fit_samples = 0;
};

// Interior-node residuals of the stationary system:
//   r1 = u_xx - lambda (1+eps^2 u_x^2)^{5/2}/(u-v)^2 trace1^2
//   r2 = v_xx + mu     (1+eps^2 v_x^2)^{5/2}/(u-v)^2 trace0^2
// Boundary rows are zero.
std::pair<GridFunction1D, GridFunction1D> stationary_residual(
    const MembranePair& U, const Params& p, const PotentialField& phi);
std::pair<GridFunction1D, GridFunction1D> stationary_residual(
    const MembranePair& U, const Params& p);

// F(Lambda,U) = U + diag(lambda,-mu) A(0)^{-1} h_eps(U) in the offset
// convention (flat state <-> (0,0)); zeros of F are steady states.
MembranePair fixed_point_map(double lambda, double mu, const MembranePair& U,
                             const Params& p);

// Damped Newton on the stationary residual with a central finite-difference
// Jacobian (elliptic solve per column, columns run concurrently). Converges
// to residual <= 1e-10 or reports structured non-convergence.
SteadyState solve_steady(const Params& p, const MembranePair& init,
                         int max_iters = 50);

// Natural-parameter continuation over an increasing lambda grid at fixed
// mu/lambda ratio, warm-started from the flat state, with step halving
// toward the fold.
ContinuationResult pullin_sweep(const Params& p, const std::vector<double>& lambda_grid,
                                GridPtr g, double mu_ratio = 1.0);

// Dense finite-difference Jacobian of the evolution right-hand side
// Q(u,v^) = (-A(eps u)u - lambda g1, -A(eps v^)v^ + mu g2) at a steady state;
// 2(nx-2) x 2(nx-2), ordered u-interior then v^-interior.
Eigen::MatrixXd linearize(const SteadyState& S, const Params& p);

// Analytic Jacobian of the curvature part alone (for cross-validation of the
// finite differences).
Eigen::MatrixXd curvature_jacobian(const GridFunction1D& w, double eps);
// FD Jacobian of w -> -A(eps w)w alone, same ordering.
Eigen::MatrixXd curvature_jacobian_fd(const GridFunction1D& w, double eps);

double spectral_abscissa(const Eigen::MatrixXd& M);

// Evolves from S plus a perturbation and fits the exponential decay rate of
// the state distance over the tail; also reports the spectral abscissa.
StabilityReport stability_experiment(const SteadyState& S, const Params& p,
                                     const MembranePair& perturbed_init);

// Initial guesses used by the non-existence checks: flat plus mild parabolas.
std::vector<MembranePair> standard_init_family(GridPtr g);

}  // namespace memsim
