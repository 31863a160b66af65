#include <doctest.h>

#include <cmath>

#include "memsim/evolution.hpp"
#include "memsim/membrane.hpp"
#include "memsim/norms.hpp"

using namespace memsim;

namespace {

GridFunction1D scaled(const GridFunction1D& f, double factor) {
    GridFunction1D out = f;
    for (auto& v : out.values) v *= factor;
    return out;
}

double richardson_gap(const MembranePair& state, const Params& p, double dt) {
    const auto one = step_imex(state, p, dt);
    const auto half = step_imex(step_imex(state, p, dt / 2.0), p, dt / 2.0);
    return std::max(max_abs_diff(one.u.values, half.u.values),
                    max_abs_diff(one.v.values, half.v.values));
}

}  // namespace

TEST_CASE("curvature operator: constant curvature and slope factor") {
    const auto g = make_grid(65, 9);
    GridFunction1D zero(g, 0.0);
    GridFunction1D parab(g);
    for (int i = 0; i < g->nx; ++i) {
        parab[i] = 1.0 - g->x[static_cast<size_t>(i)] * g->x[static_cast<size_t>(i)];
    }

    const auto a0 = curvature_apply(zero, parab);
    for (int i = 1; i < g->nx - 1; ++i) CHECK(a0[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a0[0] == 0.0);
    CHECK(a0[g->nx - 1] == 0.0);

    // constant slope s multiplies the flat-coefficient result by (1+s^2)^{-3/2}
    const double s = 0.7;
    GridFunction1D ramp(g);
    for (int i = 0; i < g->nx; ++i) ramp[i] = s * g->x[static_cast<size_t>(i)];
    const auto as = curvature_apply(ramp, parab);
    const double factor = std::pow(1.0 + s * s, -1.5);
    for (int i = 1; i < g->nx - 1; ++i) {
        CHECK(as[i] == doctest::Approx(2.0 * factor).epsilon(1e-12));
    }
}

TEST_CASE("curvature operator matches the symbolic value at x=0") {
    const auto g = make_grid(65, 9);
    const double eps = 0.5;
    GridFunction1D u(g);
    for (int i = 0; i < g->nx; ++i) {
        u[i] = -0.1 * (1.0 - g->x[static_cast<size_t>(i)] * g->x[static_cast<size_t>(i)]);
    }
    // A(eps u)u at x=0: u_xx = 0.2, u_x(0) = 0 -> -0.2
    const auto a = curvature_apply(scaled(u, eps), u);
    CHECK(a[g->center_index()] == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("one IMEX step from the flat state satisfies its defining equation") {
    const auto g = make_grid(33, 33);
    Params p;
    p.eps = 0.1;
    p.lambda = 1.0;
    p.mu = 1.0;
    const double dt = 1e-4;
    const auto flat = MembranePair::flat(g);
    const auto next = step_imex(flat, p, dt);

    // (I + dt A(0)) u1 = -dt*lambda*1 and (I + dt A(0)) vhat1 = +dt*mu*1
    const double h2 = g->hx * g->hx;
    for (int i = 1; i < g->nx - 1; ++i) {
        const double uxx = (next.u[i + 1] - 2.0 * next.u[i] + next.u[i - 1]) / h2;
        const double lhs_u = next.u[i] - dt * uxx;
        CHECK(lhs_u == doctest::Approx(-dt * p.lambda).epsilon(1e-8));

        const double vh = next.v[i] + 1.0;
        const double vhxx = (next.v[i + 1] - 2.0 * next.v[i] + next.v[i - 1]) / h2;
        const double lhs_v = vh - dt * vhxx;
        CHECK(lhs_v == doctest::Approx(dt * p.mu).epsilon(1e-8));
    }
}

TEST_CASE("zero forcing keeps the flat state fixed exactly") {
    const auto g = make_grid(33, 33);
    Params p;
    p.lambda = 0.0;
    p.mu = 0.0;
    const auto flat = MembranePair::flat(g);
    const auto next = step_imex(flat, p, 1e-3);
    for (int i = 0; i < g->nx; ++i) {
        CHECK(next.u[i] == 0.0);
        CHECK(next.v[i] == -1.0);
    }
}

TEST_CASE("one step at dt vs two at dt/2 differ at second order locally") {
    const auto g = make_grid(65, 33);
    Params p;
    p.eps = 0.3;
    p.kappa = 0.05;
    const auto state = SmoothState::random(17).realize(g);

    // the asymptotic O(dt^2) regime needs dt below the diffusion scale
    // hx^2/4, otherwise the stiffest modes still sit in the saturated part
    // of the implicit stability function
    const double d1 = richardson_gap(state, p, 5e-5);
    const double d2 = richardson_gap(state, p, 2.5e-5);
    const double d3 = richardson_gap(state, p, 1.25e-5);
    const double order1 = std::log2(d1 / d2);
    const double order2 = std::log2(d2 / d3);
    CHECK(order1 >= 1.8);
    CHECK(order2 >= 1.8);
}

TEST_CASE("small forcing: run completes with the gap bounded away from zero") {
    const auto g = make_grid(33, 33);
    Params p;
    p.eps = 0.1;
    p.lambda = 0.1;
    p.mu = 0.1;
    p.t_end = 0.05;
    const auto [traj, report] = evolve(MembranePair::flat(g), p);
    (void)report;
    CHECK(traj.termination == Termination::completed);
    CHECK(traj.states.back().min_gap() >= 0.5);

    // trajectory bookkeeping
    REQUIRE(!traj.times.empty());
    CHECK(traj.times.front() == 0.0);
    for (size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
    CHECK(max_abs_diff(traj.states.front().u.values, MembranePair::flat(g).u.values) == 0.0);
}

TEST_CASE("strong forcing: touchdown before the analytic bound") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.1;
    p.lambda = 100.0;
    p.mu = 100.0;
    p.dt = 1e-5;
    p.t_end = 1.0;
    const auto [traj, report] = evolve(MembranePair::flat(g), p);

    CHECK(traj.termination == Termination::touchdown);
    REQUIRE(report.bound_applicable);
    CHECK(report.analytic_bound == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    REQUIRE(report.observed_time.has_value());
    CHECK(*report.observed_time <= report.analytic_bound + traj.dt);
    CHECK(report.min_gap_at_end < p.gap_tol);

    // sign bounds and monotone gap functional along the touchdown run
    for (const auto& s : traj.states) {
        for (int i = 0; i < g->nx; ++i) {
            CHECK(s.u[i] <= 1e-8);
            CHECK(s.v[i] >= -1.0 - 1e-8);
        }
    }
    for (size_t k = 1; k < traj.diagnostics.size(); ++k) {
        CHECK(traj.diagnostics[k].gap_E >= traj.diagnostics[k - 1].gap_E - 1e-8);
    }
}

TEST_CASE("even initial data stays even") {
    const auto g = make_grid(33, 33);
    Params p;
    p.eps = 0.1;
    p.lambda = 1.0;
    p.mu = 1.0;
    p.t_end = 0.02;
    p.sample_every = 5;
    const auto [traj, report] = evolve(MembranePair::parabolic(g, 0.15), p);
    (void)report;
    CHECK(traj.termination == Termination::completed);
    for (const auto& s : traj.states) CHECK(mirror_mismatch(s) <= 1e-9);
}

TEST_CASE("gap functional: flat zero, constant offset value, range property") {
    const auto g = make_grid(65, 9);
    CHECK(gap_functional(MembranePair::flat(g)) == 0.0);

    // functional evaluation only; the state ignores boundary conditions
    MembranePair m;
    m.u = GridFunction1D(g, -0.25);
    m.v = GridFunction1D(g, -0.75);
    CHECK(gap_functional(m) == doctest::Approx(0.5).epsilon(1e-12));

    for (unsigned seed : {3u, 4u, 5u}) {
        const auto s = SmoothState::random(seed).realize(g);
        const double e = gap_functional(s);
        CHECK(e >= 0.0);
        CHECK(e < 1.0);
    }
}

TEST_CASE("total energy: flat closed form, lambda limit, mirror invariance") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.2;
    p.lambda = 1.7;
    p.mu = 0.9;
    p.kappa = 0.05;

    const auto flat = MembranePair::flat(g);
    const auto phi_flat = solve_potential(flat, p);
    CHECK(total_energy(flat, phi_flat, p) ==
          doctest::Approx(2.0 * p.lambda * p.eps * p.eps).epsilon(1e-10));

    // as lambda -> 0 only the first elastic term survives
    const auto state = SmoothState::random(8).realize(g);
    Params p0 = p;
    p0.lambda = 1e-12;
    const auto phi0 = solve_potential(state, p0);
    const auto ux = diff1(state.u.values, g->hx);
    std::vector<double> su(ux.size());
    for (size_t i = 0; i < ux.size(); ++i) {
        su[i] = std::sqrt(1.0 + p.eps * p.eps * ux[i] * ux[i]) - 1.0;
    }
    CHECK(total_energy(state, phi0, p0) ==
          doctest::Approx(trapezoid(su, g->hx)).epsilon(1e-6));

    // mirrored state carries the same energy
    const auto skew = MembranePair::from_functions(
        g,
        [](double x) { return -0.07 * (1.0 - x * x) * (1.0 + 0.4 * std::sin(M_PI * x)); },
        [](double x) { return -1.0 + 0.05 * (1.0 - x * x) * (1.0 - 0.2 * std::sin(M_PI * x)); });
    MembranePair twin = skew;
    for (int i = 0; i < g->nx; ++i) {
        twin.u[i] = skew.u[g->mirror(i)];
        twin.v[i] = skew.v[g->mirror(i)];
    }
    const double e1 = total_energy(skew, solve_potential(skew, p), p);
    const double e2 = total_energy(twin, solve_potential(twin, p), p);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-10));
}

TEST_CASE("touchdown bound closed forms") {
    const auto g = make_grid(65, 9);
    const auto flat = MembranePair::flat(g);

    Params p;
    p.eps = 0.1;
    p.lambda = 100.0;
    p.mu = 100.0;
    auto bound = touchdown_bound(flat.u, flat.v, p);
    REQUIRE(bound.has_value());
    CHECK(*bound == doctest::Approx(1.0 / 30.0).epsilon(1e-14));

    p.lambda = 10.0;
    p.mu = 10.0;
    CHECK_FALSE(touchdown_bound(flat.u, flat.v, p).has_value());

    p.eps = 0.5;
    p.lambda = 200.0;
    p.mu = 8.0;
    bound = touchdown_bound(flat.u, flat.v, p);
    REQUIRE(bound.has_value());
    CHECK(*bound == doctest::Approx(1.0 / 96.0).epsilon(1e-14));
}

TEST_CASE("evolve validates its initial data") {
    const auto g = make_grid(33, 33);
    Params p;
    auto bad = MembranePair::flat(g);
    bad.u[0] = 0.1;
    CHECK_THROWS_AS(evolve(bad, p), std::invalid_argument);

    auto crossed = MembranePair::flat(g);
    for (int i = 1; i < g->nx - 1; ++i) {
        crossed.u[i] = -0.6;
        crossed.v[i] = -0.4;  // v > u
    }
    CHECK_THROWS_AS(evolve(crossed, p), std::invalid_argument);
}
