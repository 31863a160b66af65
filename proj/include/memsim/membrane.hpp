// Membrane displacement pairs and membership in the admissible set S_q(kappa):
// gap above 2*kappa and W^2_q norm surrogates below 1/kappa.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "memsim/grid.hpp"
#include "memsim/params.hpp"

namespace memsim {

// Free-boundary state: u is the upper membrane (u(+-1)=0, u<=0), v the lower
// one (v(+-1)=-1, v>=-1). The boundary nodes are set exactly by the builders.
struct MembranePair {
    GridFunction1D u;
    GridFunction1D v;

    GridPtr grid() const { return u.grid; }
    double gap(int i) const { return u[i] - v[i]; }
    double min_gap() const;

    static MembranePair flat(GridPtr g);
    // u0 = -a(1-x^2), v0 = -1+a(1-x^2); requires 0 <= a < 1/2.
    static MembranePair parabolic(GridPtr g, double a);
    // Samples u_fn/v_fn at the nodes, then pins the boundary nodes exactly.
    static MembranePair from_functions(GridPtr g,
                                       const std::function<double(double)>& u_fn,
                                       const std::function<double(double)>& v_fn);
};

// Smooth random admissible state with closed-form derivatives:
//   u    = -a0 (1-x^2)(1 + a1 cos(pi x))
//   v+1  =  b0 (1-x^2)(1 + b1 cos(pi x))
// with a0,b0 in [0.02,0.12] and a1,b1 in [-0.4,0.4], drawn from `seed`.
struct SmoothState {
    double a0, a1, b0, b1;
    static SmoothState random(unsigned seed);
    MembranePair realize(GridPtr g) const;
    double u(double x) const;
    double ux(double x) const;
    double uxx(double x) const;
    double v(double x) const;
    double vx(double x) const;
    double vxx(double x) const;
};

struct AdmissibilityReport {
    double min_gap = 0.0;
    double norm_u = 0.0;   // W^2_q surrogate of u
    double norm_v = 0.0;   // W^2_q surrogate of v+1
    bool in_S = false;
    std::vector<std::string> violated;  // among: bc_u, bc_v, gap, norm_u, norm_v
};

// closure=false tests the open set S_q(kappa) (strict inequalities); closure=true
// tests its closure (non-strict). Boundary-condition violations are reported,
// never thrown.
AdmissibilityReport admissible_check(const MembranePair& m, const Params& p,
                                     bool closure = false);

double mirror_mismatch(const GridFunction1D& f);
double mirror_mismatch(const MembranePair& m);

}  // namespace memsim
