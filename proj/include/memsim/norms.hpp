// Discrete L_q / W^2_q surrogate norms and difference stencils on the x grid.
#pragma once

#include <vector>

#include "memsim/grid.hpp"

namespace memsim {

// Central differences inside, 3-point one-sided (second order) at the ends.
std::vector<double> diff1(const std::vector<double>& f, double h);
// Standard second differences inside, one-sided copies of the 3-point second
// difference at the ends (first order there; only norms consume the ends).
std::vector<double> diff2(const std::vector<double>& f, double h);

double trapezoid(const std::vector<double>& f, double h);

// (sum_{k<=order} integral |f^(k)|^q)^(1/q) with trapezoid quadrature.
// order in {0,1,2}, q in [2,inf).
double discrete_norm(const GridFunction1D& f, int order, double q);

}  // namespace memsim
