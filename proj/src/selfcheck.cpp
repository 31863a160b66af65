#include "memsim/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "memsim/elliptic.hpp"
#include "memsim/evolution.hpp"
#include "memsim/io.hpp"
#include "memsim/mapping.hpp"
#include "memsim/membrane.hpp"
#include "memsim/narrow_gap.hpp"
#include "memsim/norms.hpp"
#include "memsim/steady.hpp"

namespace memsim {

namespace {

struct Check {
    std::string name;
    std::function<void()> body;  // throws with a message on failure
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

double round_trip_order(int nz_coarse) {
    // sup round-trip error of w(x,z)=sin(pi z) on nested z grids
    auto err = [](int nz) {
        const auto g = make_grid(17, nz);
        const auto state = SmoothState::random(7).realize(g);
        const auto w = MovingSamples::sample(
            state, [](double, double z) { return std::sin(M_PI * z); });
        const auto back = pull_back(push_forward(w, state), state);
        return sup_diff_on_mask(w, back);
    };
    const double e1 = err(nz_coarse);
    const double e2 = err(2 * nz_coarse - 1);
    return std::log2(e1 / e2);
}

}  // namespace

bool run_selfcheck(const std::filesystem::path& outdir, std::ostream& log) {
    std::vector<Check> checks;

    checks.push_back({"grid spacing and center node", [] {
        const auto g = make_grid(9, 9);
        expect(g->hx == 0.25 && g->hz == 0.125, "9x9 spacing");
        const auto f = make_grid(129, 65);
        expect(f->x[64] == 0.0, "x center must be exactly zero");
    }});

    checks.push_back({"flat potential equals z'", [] {
        const auto g = make_grid(65, 65);
        const auto flat = MembranePair::flat(g);
        Params p;
        const auto phi = solve_potential(flat, p);
        double err = 0.0;
        for (int i = 0; i < g->nx; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                err = std::max(err, std::abs(phi.phi_tilde.at(i, j) -
                                             g->zp[static_cast<size_t>(j)]));
            }
        }
        expect(err <= 1e-10, "max deviation " + format_double(err));
    }});

    checks.push_back({"flat trace forcing equals (1,1)", [] {
        const auto g = make_grid(65, 65);
        Params p;
        const auto forcing = trace_forcing(MembranePair::flat(g), p);
        for (int i = 0; i < g->nx; ++i) {
            expect(std::abs(forcing.g1[i] - 1.0) <= 1e-8 &&
                       std::abs(forcing.g2[i] - 1.0) <= 1e-8,
                   "trace forcing deviates at node " + std::to_string(i));
        }
    }});

    checks.push_back({"threshold function closed forms", [] {
        expect(J(0.0) == 0.0, "J(0)");
        expect(std::abs(J(1.0) - 5.0 / (6.0 * std::sqrt(2.0))) <= 1e-12, "J(1)");
        expect(std::abs(xi0(1.0) - 2.0 / 3.0) <= 1e-12, "xi0(1)");
        expect(std::abs(xi0(0.01) - 2.0) < 1e-3, "xi0(0.01) -> 2");
    }});

    checks.push_back({"J increasing and concave with sup below 2/3", [] {
        const int n = 10000;
        double prev = J(0.0), prev_inc = 1e300;
        for (int k = 1; k <= n; ++k) {
            const double r = 100.0 * k / n;
            const double val = J(r);
            expect(val > prev, "J not increasing at r=" + format_double(r));
            const double inc = val - prev;
            expect(inc <= prev_inc * (1.0 + 1e-12), "J not concave at r=" + format_double(r));
            expect(val < 2.0 / 3.0, "J reached 2/3");
            prev = val;
            prev_inc = inc;
        }
    }});

    checks.push_back({"constant-function norm identity", [] {
        const auto g = make_grid(65, 9);
        for (double q : {2.0, 4.0, 6.0}) {
            GridFunction1D f(g, -3.25);
            const double want = 3.25 * std::pow(2.0, 1.0 / q);
            expect(std::abs(discrete_norm(f, 0, q) - want) <= 1e-12,
                   "constant norm mismatch at q=" + format_double(q));
        }
    }});

    checks.push_back({"pull-back/push-forward round trip order", [] {
        const double order = round_trip_order(33);
        expect(order >= 1.8, "observed order " + format_double(order));
    }});

    checks.push_back({"elliptic mirror symmetry for even states", [] {
        const auto g = make_grid(65, 65);
        const auto state = MembranePair::parabolic(g, 0.2);
        Params p;
        p.eps = 0.3;
        const auto phi = solve_potential(state, p);
        double mismatch = 0.0;
        for (int i = 0; i < g->nx / 2; ++i) {
            for (int j = 0; j < g->nz; ++j) {
                mismatch = std::max(mismatch, std::abs(phi.phi_tilde.at(i, j) -
                                                       phi.phi_tilde.at(g->nx - 1 - i, j)));
            }
        }
        expect(mismatch <= 1e-9, "mirror mismatch " + format_double(mismatch));
    }});

    checks.push_back({"narrow-gap mirror identity", [] {
        const auto g = make_grid(65, 9);
        auto state = MembranePair::parabolic(g, 0.1);
        for (int step = 0; step < 200; ++step) {
            state = sar_step(state, 0.5, 0.5, 1e-4);
            for (int i = 0; i < g->nx; ++i) {
                expect(std::abs(state.u[i] + 1.0 + state.v[i]) <= 1e-10,
                       "mirror identity violated at step " + std::to_string(step));
            }
        }
    }});

    checks.push_back({"sign bounds and evenness along a short run", [] {
        const auto g = make_grid(65, 65);
        Params p;
        p.eps = 0.1;
        p.t_end = 0.02;
        const auto [traj, report] = evolve(MembranePair::parabolic(g, 0.15), p);
        (void)report;
        expect(traj.termination == Termination::completed, "run did not complete");
        for (const auto& s : traj.states) {
            for (int i = 0; i < g->nx; ++i) {
                expect(s.u[i] <= 1e-8, "u exceeded 0");
                expect(s.v[i] >= -1.0 - 1e-8, "v went below -1");
            }
            expect(mirror_mismatch(s) <= 1e-9, "evenness lost");
        }
    }});

    checks.push_back({"fixed point map vanishes at the flat state", [] {
        const auto g = make_grid(33, 33);
        Params p;
        const auto flat = MembranePair::flat(g);
        const auto F = fixed_point_map(0.0, 0.0, flat, p);
        expect(max_abs(F.u.values) <= 1e-12, "F_1 not zero");
        for (int i = 0; i < g->nx; ++i) expect(std::abs(F.v[i] + 1.0) <= 1e-12, "F_2 not zero");
    }});

    checks.push_back({"deterministic float formatting", [] {
        std::ostringstream a, b;
        for (int k = 0; k < 1000; ++k) {
            const double v = std::sin(static_cast<double>(k)) * std::pow(10.0, k % 40 - 20);
            a << format_double(v) << '\n';
            b << format_double(v) << '\n';
        }
        expect(a.str() == b.str(), "formatting not reproducible");
    }});

    std::filesystem::create_directories(outdir);
    std::ostringstream csv;
    csv << "invariant,status\n";
    bool all_ok = true;
    for (const auto& check : checks) {
        std::string detail;
        bool ok = true;
        try {
            check.body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        all_ok = all_ok && ok;
        log << (ok ? "[ ok ] " : "[FAIL] ") << check.name;
        if (!ok) log << " (" << detail << ")";
        log << '\n';
        csv << '"' << check.name << "\"," << (ok ? "pass" : "fail") << '\n';
    }
    write_text_file(outdir / "selfcheck.csv", csv.str());
    return all_ok;
}

}  // namespace memsim
