#include "memsim/membrane.hpp"

#include <cmath>
#include <random>

#include "memsim/norms.hpp"

namespace memsim {

double MembranePair::min_gap() const {
    double m = gap(0);
    for (int i = 1; i < u.size(); ++i) m = std::min(m, gap(i));
    return m;
}

MembranePair MembranePair::flat(GridPtr g) {
    MembranePair m;
    m.u = GridFunction1D(g, 0.0);
    m.v = GridFunction1D(std::move(g), -1.0);
    return m;
}

MembranePair MembranePair::parabolic(GridPtr g, double a) {
    if (!(a >= 0.0 && a < 0.5)) {
        throw std::invalid_argument("parabolic amplitude must satisfy 0 <= a < 1/2");
    }
    return from_functions(std::move(g),
                          [a](double x) { return -a * (1.0 - x * x); },
                          [a](double x) { return -1.0 + a * (1.0 - x * x); });
}

MembranePair MembranePair::from_functions(GridPtr g,
                                          const std::function<double(double)>& u_fn,
                                          const std::function<double(double)>& v_fn) {
    MembranePair m;
    m.u = GridFunction1D(g, 0.0);
    m.v = GridFunction1D(g, 0.0);
    for (int i = 0; i < g->nx; ++i) {
        m.u[i] = u_fn(g->x[static_cast<size_t>(i)]);
        m.v[i] = v_fn(g->x[static_cast<size_t>(i)]);
    }
    m.u[0] = m.u[g->nx - 1] = 0.0;
    m.v[0] = m.v[g->nx - 1] = -1.0;
    return m;
}

SmoothState SmoothState::random(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(0.02, 0.12);
    std::uniform_real_distribution<double> mod(-0.4, 0.4);
    SmoothState s;
    s.a0 = amp(rng);
    s.a1 = mod(rng);
    s.b0 = amp(rng);
    s.b1 = mod(rng);
    return s;
}

double SmoothState::u(double x) const {
    return -a0 * (1.0 - x * x) * (1.0 + a1 * std::cos(M_PI * x));
}
double SmoothState::ux(double x) const {
    return -a0 * (-2.0 * x * (1.0 + a1 * std::cos(M_PI * x)) -
                  (1.0 - x * x) * a1 * M_PI * std::sin(M_PI * x));
}
double SmoothState::uxx(double x) const {
    return -a0 * (-2.0 * (1.0 + a1 * std::cos(M_PI * x)) +
                  4.0 * x * a1 * M_PI * std::sin(M_PI * x) -
                  (1.0 - x * x) * a1 * M_PI * M_PI * std::cos(M_PI * x));
}
double SmoothState::v(double x) const {
    return -1.0 + b0 * (1.0 - x * x) * (1.0 + b1 * std::cos(M_PI * x));
}
double SmoothState::vx(double x) const {
    return b0 * (-2.0 * x * (1.0 + b1 * std::cos(M_PI * x)) -
                 (1.0 - x * x) * b1 * M_PI * std::sin(M_PI * x));
}
double SmoothState::vxx(double x) const {
    return b0 * (-2.0 * (1.0 + b1 * std::cos(M_PI * x)) +
                 4.0 * x * b1 * M_PI * std::sin(M_PI * x) -
                 (1.0 - x * x) * b1 * M_PI * M_PI * std::cos(M_PI * x));
}

MembranePair SmoothState::realize(GridPtr g) const {
    return MembranePair::from_functions(std::move(g),
                                        [this](double x) { return u(x); },
                                        [this](double x) { return v(x); });
}

AdmissibilityReport admissible_check(const MembranePair& m, const Params& p,
                                     bool closure) {
    p.validate();
    AdmissibilityReport r;
    const int n = m.u.size();

    r.min_gap = m.min_gap();
    r.norm_u = discrete_norm(m.u, 2, p.q);
    GridFunction1D vhat = m.v;
    for (auto& val : vhat.values) val += 1.0;
    r.norm_v = discrete_norm(vhat, 2, p.q);

    if (m.u[0] != 0.0 || m.u[n - 1] != 0.0) r.violated.push_back("bc_u");
    if (m.v[0] != -1.0 || m.v[n - 1] != -1.0) r.violated.push_back("bc_v");

    const double cap = 1.0 / p.kappa;
    const bool gap_ok = closure ? r.min_gap >= 2.0 * p.kappa : r.min_gap > 2.0 * p.kappa;
    const bool nu_ok = closure ? r.norm_u <= cap : r.norm_u < cap;
    const bool nv_ok = closure ? r.norm_v <= cap : r.norm_v < cap;
    if (!gap_ok) r.violated.push_back("gap");
    if (!nu_ok) r.violated.push_back("norm_u");
    if (!nv_ok) r.violated.push_back("norm_v");

    r.in_S = r.violated.empty();
    return r;
}

double mirror_mismatch(const GridFunction1D& f) {
    const int n = f.size();
    double m = 0.0;
    for (int i = 0; i < n / 2; ++i) m = std::max(m, std::abs(f[i] - f[n - 1 - i]));
    return m;
}

double mirror_mismatch(const MembranePair& m) {
    return std::max(mirror_mismatch(m.u), mirror_mismatch(m.v));
}

}  // namespace memsim
