// Physical and numerical parameter block shared by all solvers.
#pragma once

#include <stdexcept>

namespace memsim {

struct Params {
    double eps = 0.1;      // aspect ratio, in (0,1]
    double lambda = 1.0;   // voltage parameter acting on the upper membrane, >= 0
    double mu = 1.0;       // voltage parameter acting on the lower membrane, >= 0
    double kappa = 0.01;   // admissibility margin, in (0,1/2)
    double q = 4.0;        // norm exponent, in [2,inf)

    // numeric controls
    double dt = 0.0;           // time step; 0 selects 0.25*hx^2/max(1,lambda,mu)
    double t_end = 1.0;        // integration horizon
    double gap_tol = 1e-3;     // touchdown threshold on min(u-v)
    double norm_cap = 1e3;     // blow-up threshold on the W^2_q surrogates
    double lin_tol = 1e-10;    // relative residual bound for linear solves
    int sample_every = 10;     // diagnostics cadence (steps)

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    double default_dt(double hx) const;
};

}  // namespace memsim
