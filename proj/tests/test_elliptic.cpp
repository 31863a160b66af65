#include <doctest.h>

#include <cmath>

#include "memsim/elliptic.hpp"
#include "memsim/mapping.hpp"
#include "memsim/membrane.hpp"

using namespace memsim;

namespace {

// Manufactured solution psi = sin(pi x) sin(pi z') with the operator
// coefficients taken from the closed-form membrane state.
struct Manufactured {
    SmoothState s;
    double eps;

    double psi(double x, double zp) const { return std::sin(M_PI * x) * std::sin(M_PI * zp); }

    double rhs(double x, double zp) const {
        const double e2 = eps * eps;
        const double gap = s.u(x) - s.v(x);
        const double dux = s.ux(x) - s.vx(x);
        const double duxx = s.uxx(x) - s.vxx(x);
        const double eta = zp * dux + s.vx(x);
        const double cxz = -2.0 * e2 * eta / gap;
        const double czz = (1.0 + e2 * eta * eta) / (gap * gap);
        const double cz = e2 * (2.0 * dux * eta / (gap * gap) -
                                (zp * duxx + s.vxx(x)) / gap);
        const double sx = std::sin(M_PI * x), cx = std::cos(M_PI * x);
        const double sz = std::sin(M_PI * zp), czp = std::cos(M_PI * zp);
        const double pi2 = M_PI * M_PI;
        const double psi_xx = -pi2 * sx * sz;
        const double psi_zz = -pi2 * sx * sz;
        const double psi_xz = pi2 * cx * czp;
        const double psi_z = M_PI * sx * czp;
        return -(e2 * psi_xx + cxz * psi_xz + czz * psi_zz + cz * psi_z);
    }

    // L2 error of the discrete solve on an n x n grid
    double solve_error(int n) const {
        const auto g = make_grid(n, n);
        const auto state = s.realize(g);
        Params p;
        p.eps = eps;
        p.kappa = 0.05;
        const auto op = assemble(state, p);
        Field2D f(g);
        for (int i = 0; i < g->nx; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                f.at(i, j) = rhs(g->x[static_cast<size_t>(i)], g->zp[static_cast<size_t>(j)]);
            }
        }
        PotentialSolver solver(g);
        const auto psi_h = solver.solve_dirichlet(op, f, p.lin_tol);
        double sq = 0.0;
        for (int i = 1; i < g->nx - 1; ++i) {
            for (int j = 1; j < g->nz - 1; ++j) {
                const double d = psi_h.at(i, j) -
                                 psi(g->x[static_cast<size_t>(i)], g->zp[static_cast<size_t>(j)]);
                sq += d * d;
            }
        }
        return std::sqrt(sq * g->hx * g->hz);
    }
};

MembranePair uniform_gap_state(GridPtr g, double d) {
    // x-independent state with relaxed boundary conditions (unit-test only)
    MembranePair m;
    m.u = GridFunction1D(g, 0.0);
    m.v = GridFunction1D(std::move(g), -d);
    return m;
}

MembranePair mirrored(const MembranePair& m) {
    MembranePair out = m;
    const int n = m.u.size();
    for (int i = 0; i < n; ++i) {
        out.u[i] = m.u[n - 1 - i];
        out.v[i] = m.v[n - 1 - i];
    }
    return out;
}

}  // namespace

TEST_CASE("flat state reduces the operator to eps^2 dxx + dzz") {
    const auto g = make_grid(33, 17);
    Params p;
    p.eps = 0.37;
    const auto op = assemble(MembranePair::flat(g), p);
    CHECK(op.cxx() == doctest::Approx(0.37 * 0.37).epsilon(1e-15));
    for (size_t k = 0; k < op.czz.values.size(); ++k) {
        CHECK(op.cxz.values[k] == 0.0);
        CHECK(op.cz.values[k] == 0.0);
        CHECK(op.czz.values[k] == 1.0);
    }
}

TEST_CASE("operator coefficients have the parity of the printed formula") {
    const auto g = make_grid(33, 17);
    const auto state = SmoothState::random(3).realize(g);
    Params p;
    p.eps = 0.4;
    p.kappa = 0.05;
    const auto op = assemble(state, p);
    for (int i = 0; i < g->nx; ++i) {
        const int im = g->mirror(i);
        for (int j = 0; j < g->nz; ++j) {
            CHECK(op.cxz.at(i, j) == doctest::Approx(-op.cxz.at(im, j)).epsilon(1e-12));
            CHECK(op.czz.at(i, j) == doctest::Approx(op.czz.at(im, j)).epsilon(1e-12));
            CHECK(op.cz.at(i, j) ==
                  doctest::Approx(op.cz.at(im, j)).epsilon(1e-11).scale(1.0));
        }
    }
}

TEST_CASE("z'-diffusion coefficient dominates the inverse squared gap") {
    const auto g = make_grid(33, 17);
    Params p;
    p.eps = 0.25;
    p.kappa = 0.05;
    for (unsigned seed : {1u, 5u, 9u}) {
        const auto state = SmoothState::random(seed).realize(g);
        const auto op = assemble(state, p);
        double max_gap = 0.0;
        for (int i = 0; i < g->nx; ++i) max_gap = std::max(max_gap, state.gap(i));
        const double bound = 1.0 / (max_gap * max_gap);
        for (double c : op.czz.values) CHECK(c >= bound - 1e-14);
    }
}

TEST_CASE("assemble rejects states outside the admissible closure") {
    const auto g = make_grid(33, 17);
    Params p;
    p.kappa = 0.3;
    // gap 0.2 at the center is below 2*kappa = 0.6
    CHECK_THROWS_WITH_AS(assemble(MembranePair::parabolic(g, 0.4), p),
                         doctest::Contains("state outside S_q(kappa) closure"),
                         std::domain_error);
}

TEST_CASE("source term: flat zero, exact eps^2 scaling, pinned node value") {
    const auto g = make_grid(33, 17);
    Params p;
    p.kappa = 0.05;

    SUBCASE("flat state gives f = 0") {
        const auto f = source_term(MembranePair::flat(g), p);
        for (double v : f.values) CHECK(v == 0.0);
    }

    SUBCASE("f scales exactly with eps^2") {
        const auto state = SmoothState::random(2).realize(g);
        Params p1 = p, p2 = p;
        p1.eps = 0.4;
        p2.eps = 0.2;
        const auto f1 = source_term(state, p1);
        const auto f2 = source_term(state, p2);
        CHECK(max_abs(f2.values) == doctest::Approx(max_abs(f1.values) / 4.0).epsilon(1e-12));
    }

    SUBCASE("u=-0.1(1-x^2), v=-1, eps=0.5 at (x,z')=(0,1)") {
        // f = -eps^2 u_xx/(u-v) = -0.25*0.2/0.9 = -1/18 (central differences
        // are exact on the parabola)
        Params ph = p;
        ph.eps = 0.5;
        const auto state = MembranePair::from_functions(
            g, [](double x) { return -0.1 * (1.0 - x * x); }, [](double) { return -1.0; });
        const auto f = source_term(state, ph);
        CHECK(f.at(g->center_index(), g->nz - 1) ==
              doctest::Approx(-1.0 / 18.0).epsilon(1e-12));
    }
}

TEST_CASE("flat potential is exactly z' and traces are one") {
    const auto g = make_grid(65, 65);
    Params p;
    const auto flat = MembranePair::flat(g);
    const auto phi = solve_potential(flat, p);
    double err = 0.0;
    for (int i = 0; i < g->nx; ++i) {
        for (int j = 0; j < g->nz; ++j) {
            err = std::max(err,
                           std::abs(phi.phi_tilde.at(i, j) - g->zp[static_cast<size_t>(j)]));
        }
    }
    CHECK(err <= 1e-10);

    const auto [t1, t0] = boundary_traces(phi);
    for (int i = 0; i < g->nx; ++i) {
        CHECK(t1[i] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(t0[i] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("even states give mirror-symmetric potentials") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.3;
    p.kappa = 0.05;
    for (unsigned seed : {21u, 22u}) {
        const auto state = SmoothState::random(seed).realize(g);
        const auto phi = solve_potential(state, p);
        double mismatch = 0.0;
        for (int i = 0; i < g->nx / 2; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                mismatch = std::max(mismatch, std::abs(phi.phi_tilde.at(i, j) -
                                                       phi.phi_tilde.at(g->mirror(i), j)));
            }
        }
        CAPTURE(seed);
        CHECK(mismatch <= 1e-9);
    }
}

TEST_CASE("manufactured solution converges at second order") {
    for (unsigned seed : {31u, 32u, 33u}) {
        Manufactured man{SmoothState::random(seed), 0.35};
        const double e33 = man.solve_error(33);
        const double e65 = man.solve_error(65);
        const double e129 = man.solve_error(129);
        const double order1 = std::log2(e33 / e65);
        const double order2 = std::log2(e65 / e129);
        CAPTURE(seed);
        CHECK(order1 >= 1.8);
        CHECK(order2 >= 1.8);
    }
}

TEST_CASE("manufactured traces converge at second order") {
    Manufactured man{SmoothState::random(41), 0.3};
    auto trace_error = [&](int n) {
        const auto g = make_grid(n, n);
        const auto state = man.s.realize(g);
        Params p;
        p.eps = man.eps;
        p.kappa = 0.05;
        const auto op = assemble(state, p);
        Field2D f(g);
        for (int i = 0; i < g->nx; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                f.at(i, j) = man.rhs(g->x[static_cast<size_t>(i)], g->zp[static_cast<size_t>(j)]);
            }
        }
        PotentialSolver solver(g);
        PotentialField phi;
        phi.psi = solver.solve_dirichlet(op, f, p.lin_tol);
        phi.phi_tilde = phi.psi;
        for (int i = 0; i < g->nx; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                phi.phi_tilde.at(i, j) += g->zp[static_cast<size_t>(j)];
            }
        }
        const auto [t1, t0] = boundary_traces(phi);
        double err = 0.0;
        for (int i = 0; i < g->nx; ++i) {
            const double x = g->x[static_cast<size_t>(i)];
            const double want1 = 1.0 - M_PI * std::sin(M_PI * x);  // d(psi+z')/dz' at z'=1
            const double want0 = 1.0 + M_PI * std::sin(M_PI * x);
            err = std::max(err, std::abs(t1[i] - want1));
            err = std::max(err, std::abs(t0[i] - want0));
        }
        return err;
    };
    const double e33 = trace_error(33);
    const double e65 = trace_error(65);
    const double e129 = trace_error(129);
    CHECK(std::log2(e33 / e65) >= 1.8);
    CHECK(std::log2(e65 / e129) >= 1.8);
}

TEST_CASE("lower trace stays positive on admissible states") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.2;
    p.kappa = 0.05;
    for (unsigned seed : {51u, 52u, 53u, 54u}) {
        const auto state = SmoothState::random(seed).realize(g);
        const auto [t1, t0] = boundary_traces(solve_potential(state, p));
        (void)t1;
        for (int i = 0; i < g->nx; ++i) CHECK(t0[i] > -1e-8);
    }
}

TEST_CASE("trace forcing: flat value, positivity, evenness") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.15;
    p.kappa = 0.05;

    SUBCASE("flat state gives (1,1)") {
        const auto forcing = trace_forcing(MembranePair::flat(g), p);
        for (int i = 0; i < g->nx; ++i) {
            CHECK(forcing.g1[i] == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(forcing.g2[i] == doctest::Approx(1.0).epsilon(1e-8));
        }
    }

    SUBCASE("components are nonnegative and even for even states") {
        const auto state = SmoothState::random(61).realize(g);
        const auto forcing = trace_forcing(state, p);
        for (int i = 0; i < g->nx; ++i) {
            CHECK(forcing.g1[i] >= 0.0);
            CHECK(forcing.g2[i] >= 0.0);
            CHECK(forcing.g1[i] == doctest::Approx(forcing.g1[g->mirror(i)]).epsilon(1e-9));
            CHECK(forcing.g2[i] == doctest::Approx(forcing.g2[g->mirror(i)]).epsilon(1e-9));
        }
    }
}

TEST_CASE("uniform gap: exact 1-D potential drives g = 1/d^2") {
    const auto g = make_grid(33, 33);
    Params p;
    p.eps = 0.4;
    for (double d : {1.0, 0.5, 0.25}) {
        const auto m = uniform_gap_state(g, d);
        const auto op = detail::assemble_raw(m, p);
        PotentialSolver solver(g);
        PotentialField phi;
        phi.psi = solver.solve_dirichlet(op, op.cz, p.lin_tol);
        phi.phi_tilde = phi.psi;
        for (int i = 0; i < g->nx; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                phi.phi_tilde.at(i, j) += g->zp[static_cast<size_t>(j)];
            }
        }
        const auto forcing = trace_forcing(m, p, phi);
        for (int i = 0; i < g->nx; ++i) {
            CHECK(forcing.g1[i] == doctest::Approx(1.0 / (d * d)).epsilon(1e-8));
            CHECK(forcing.g2[i] == doctest::Approx(1.0 / (d * d)).epsilon(1e-8));
        }

        // halving the gap doubles the field energy
        const double energy = gradient_energy(phi, m, p);
        CHECK(energy == doctest::Approx(2.0 / d).epsilon(1e-6));
    }
}

TEST_CASE("barrier margins: flat equality case and n=2 polynomial bounds") {
    const auto g = make_grid(65, 65);
    Params p;
    const auto rep = barrier_check(MembranePair::flat(g), p);
    CHECK(rep.lower_linear == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(rep.upper_linear == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    REQUIRE(rep.polynomial_applicable);
    CHECK(rep.n == 2);
    CHECK(rep.lower_poly == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(rep.upper_poly == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("barrier margins hold with O(h^2) slack on admissible even states") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.1;
    p.kappa = 0.05;
    for (unsigned seed : {71u, 72u, 73u}) {
        const auto state = SmoothState::random(seed).realize(g);
        const auto rep = barrier_check(state, p);
        CAPTURE(seed);
        REQUIRE(rep.polynomial_applicable);
        CHECK(rep.lower_linear >= -rep.slack);
        CHECK(rep.upper_linear >= -rep.slack);
        CHECK(rep.lower_poly >= -rep.slack);
        CHECK(rep.upper_poly >= -rep.slack);
    }
}

TEST_CASE("gradient energy: flat value and mirror invariance") {
    const auto g = make_grid(65, 65);
    Params p;
    p.eps = 0.2;
    p.kappa = 0.05;

    const auto flat = MembranePair::flat(g);
    CHECK(gradient_energy(solve_potential(flat, p), flat, p) ==
          doctest::Approx(2.0).epsilon(1e-6));

    // non-even state: energy must match its mirror image
    const auto skew = MembranePair::from_functions(
        g,
        [](double x) { return -0.08 * (1.0 - x * x) * (1.0 + 0.5 * std::sin(M_PI * x)); },
        [](double x) { return -1.0 + 0.06 * (1.0 - x * x) * (1.0 - 0.3 * std::sin(M_PI * x)); });
    const auto twin = mirrored(skew);
    const double e1 = gradient_energy(solve_potential(skew, p), skew, p);
    const double e2 = gradient_energy(solve_potential(twin, p), twin, p);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-10));
}
