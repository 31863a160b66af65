#include "memsim/cli.hpp"

#include <cmath>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "memsim/config.hpp"
#include "memsim/elliptic.hpp"
#include "memsim/evolution.hpp"
#include "memsim/io.hpp"
#include "memsim/narrow_gap.hpp"
#include "memsim/selfcheck.hpp"
#include "memsim/steady.hpp"

namespace memsim::cli {

namespace {

using nlohmann::json;

// Optional string-valued flags are routed through apply_key so the CLI and
// the config file share one validation path.
struct CommonFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        for (const char* key :
             {"eps", "lambda", "mu", "kappa", "q", "nx", "nz", "dt", "t_end",
              "gap_tol", "init", "output_dir", "sample_every"}) {
            cmd->add_option_function<std::string>(
                std::string("--") + key,
                [this, key](const std::string& value) {
                    overrides.emplace_back(key, value);
                },
                std::string("overrides config key ") + key);
        }
    }

    SimConfig resolve() const {
        SimConfig cfg = config_path.empty() ? SimConfig{} : parse_config(config_path);
        for (const auto& [key, value] : overrides) apply_key(cfg, key, value);
        cfg.params.validate();
        return cfg;
    }
};

void write_json(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json touchdown_json(const TouchdownReport& report) {
    json j;
    j["bound_applicable"] = report.bound_applicable;
    if (report.analytic_bound > 0.0) {
        j["analytic_bound"] = report.analytic_bound;
    } else {
        j["analytic_bound"] = nullptr;
    }
    if (report.observed_time) {
        j["observed_time"] = *report.observed_time;
    } else {
        j["observed_time"] = nullptr;
    }
    j["min_gap_at_end"] = report.min_gap_at_end;
    return j;
}

void dump_phi_if_possible(const std::filesystem::path& dir, const MembranePair& state,
                          const Params& p) {
    if (!(state.min_gap() > 0.0)) {
        std::cerr << "phi dump skipped: gap collapsed\n";
        return;
    }
    Params pr = p;
    pr.kappa = std::min(0.499, 0.5 * p.gap_tol);
    try {
        const auto phi = solve_potential(state, pr);
        write_text_file(dir / "phi_final.csv", phi_csv(phi.phi_tilde));
    } catch (const std::exception& e) {
        std::cerr << "phi dump skipped: " << e.what() << "\n";
    }
}

int cmd_evolve(const SimConfig& cfg, bool dump_phi) {
    const auto g = make_grid(cfg.nx, cfg.nz);
    const auto initial = cfg.build_initial(g);
    const auto [traj, report] = evolve(initial, cfg.params);

    const std::filesystem::path dir(cfg.output_dir);
    write_trajectory_outputs(dir, traj);
    json j;
    j["termination"] = to_string(traj.termination);
    j["dt"] = traj.dt;
    j["t_final"] = traj.times.back();
    j["samples"] = traj.times.size();
    j["touchdown"] = touchdown_json(report);
    if (!traj.failure_detail.empty()) j["failure_detail"] = traj.failure_detail;
    write_json(dir / "report.json", j);
    if (dump_phi) dump_phi_if_possible(dir, traj.states.back(), cfg.params);

    return traj.termination == Termination::completed ? 0 : 1;
}

int cmd_sar(const SimConfig& cfg) {
    const auto g = make_grid(cfg.nx, cfg.nz);
    const auto initial = cfg.build_initial(g);
    const auto traj = sar_evolve(initial, cfg.params);

    const std::filesystem::path dir(cfg.output_dir);
    write_trajectory_outputs(dir, traj);
    json j;
    j["termination"] = to_string(traj.termination);
    j["dt"] = traj.dt;
    j["t_final"] = traj.times.back();
    j["samples"] = traj.times.size();
    write_json(dir / "report.json", j);
    return traj.termination == Termination::completed ? 0 : 1;
}

int cmd_sar_compare(const SimConfig& cfg, std::vector<double> eps_list) {
    if (eps_list.empty()) eps_list = {0.2, 0.1, 0.05, 0.025};
    SimConfig run = cfg;
    if (run.params.dt <= 0.0) {
        run.params.dt = run.params.default_dt(2.0 / (run.nx - 1));
    }
    const auto g = make_grid(run.nx, run.nz);
    const auto initial = run.build_initial(g);
    const auto table = compare_to_sar(eps_list, initial, run.params);

    const std::filesystem::path dir(run.output_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "convergence.csv", convergence_csv(table));
    json j;
    j["tau"] = table.tau;
    j["monotone_decreasing"] = true;
    for (size_t k = 1; k < table.rows.size(); ++k) {
        if (!(table.rows[k].d_state < table.rows[k - 1].d_state)) {
            j["monotone_decreasing"] = false;
        }
    }
    write_json(dir / "report.json", j);
    return 0;
}

int cmd_steady(const SimConfig& cfg, bool dump_phi) {
    const auto g = make_grid(cfg.nx, cfg.nz);
    const auto init = cfg.build_initial(g);
    const auto S = solve_steady(cfg.params, init);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    json j;
    j["converged"] = S.converged;
    j["residual_norm"] = S.residual_norm;
    j["newton_iters"] = S.newton_iters;
    if (!S.detail.empty()) j["detail"] = S.detail;
    if (S.converged) {
        j["min_gap"] = S.state.min_gap();
        j["mirror_mismatch"] = mirror_mismatch(S.state);
        write_text_file(dir / "steady.csv", state_csv(S.state));
        if (dump_phi) write_text_file(dir / "phi_final.csv", phi_csv(S.phi.phi_tilde));
    }
    write_json(dir / "report.json", j);
    return S.converged ? 0 : 1;
}

int cmd_sweep(const SimConfig& cfg, double lambda_max, int steps, double mu_ratio) {
    if (lambda_max <= 0.0) lambda_max = 1.05 * xi0(cfg.params.eps);
    std::vector<double> grid;
    for (int k = 1; k <= steps; ++k) grid.push_back(lambda_max * k / steps);

    const auto g = make_grid(cfg.nx, cfg.nz);
    const auto result = pullin_sweep(cfg.params, grid, g, mu_ratio);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "continuation.csv", continuation_csv(result));
    json j;
    j["xi0"] = xi0(cfg.params.eps);
    j["mu_ratio"] = mu_ratio;
    if (result.fold_estimate) {
        j["fold_estimate"] = *result.fold_estimate;
    } else {
        j["fold_estimate"] = nullptr;
    }
    write_json(dir / "report.json", j);
    return 0;
}

int cmd_stability(const SimConfig& cfg, double rho) {
    const auto g = make_grid(cfg.nx, cfg.nz);
    const auto init = cfg.build_initial(g);
    const auto S = solve_steady(cfg.params, init);
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    if (!S.converged) {
        json j;
        j["converged"] = false;
        j["detail"] = S.detail;
        write_json(dir / "stability.json", j);
        return 1;
    }

    MembranePair perturbed = S.state;
    for (int i = 0; i < g->nx; ++i) {
        const double bump = rho * (1.0 - g->x[static_cast<size_t>(i)] *
                                             g->x[static_cast<size_t>(i)]);
        perturbed.u[i] -= bump;
        perturbed.v[i] += bump;
    }
    const auto report = stability_experiment(S, cfg.params, perturbed);

    json j;
    j["converged"] = true;
    j["spectral_abscissa"] = report.spectral_abscissa;
    if (report.fitted_decay_rate) {
        j["fitted_decay_rate"] = *report.fitted_decay_rate;
    } else {
        j["fitted_decay_rate"] = nullptr;
    }
    j["matrix_dim"] = report.matrix_dim;
    j["fit_samples"] = report.fit_samples;
    j["perturbation_rho"] = rho;
    write_json(dir / "stability.json", j);
    return 0;
}

int cmd_bound_check(const SimConfig& cfg) {
    const auto g = make_grid(cfg.nx, cfg.nz);
    const auto initial = cfg.build_initial(g);
    const auto [traj, report] = evolve(initial, cfg.params);

    const std::filesystem::path dir(cfg.output_dir);
    write_trajectory_outputs(dir, traj);
    json j = touchdown_json(report);
    j["termination"] = to_string(traj.termination);
    j["dt"] = traj.dt;
    write_json(dir / "bound.json", j);

    const bool ok = report.bound_applicable &&
                    traj.termination == Termination::touchdown &&
                    report.observed_time &&
                    *report.observed_time <= report.analytic_bound + traj.dt;
    return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"two-membrane MEMS free-boundary simulator"};
    app.require_subcommand(1);

    CommonFlags evolve_flags, sar_flags, compare_flags, steady_flags, sweep_flags,
        stability_flags, bound_flags, selfcheck_flags;
    bool evolve_dump_phi = false, steady_dump_phi = false;
    std::vector<double> compare_eps;
    double sweep_lambda_max = 0.0, sweep_mu_ratio = 1.0, stability_rho = 1e-3;
    int sweep_steps = 40;

    auto* c_evolve = app.add_subcommand("evolve", "full-model run");
    evolve_flags.attach(c_evolve);
    c_evolve->add_flag("--dump-phi", evolve_dump_phi, "write phi_final.csv");

    auto* c_sar = app.add_subcommand("sar", "narrow-gap run");
    sar_flags.attach(c_sar);

    auto* c_compare = app.add_subcommand("sar-compare", "vanishing aspect ratio sweep");
    compare_flags.attach(c_compare);
    c_compare->add_option("--eps-list", compare_eps,
                          "eps values for the sweep (default 0.2 0.1 0.05 0.025)");

    auto* c_steady = app.add_subcommand("steady", "single steady-state solve");
    steady_flags.attach(c_steady);
    c_steady->add_flag("--dump-phi", steady_dump_phi, "write phi_final.csv");

    auto* c_sweep = app.add_subcommand("sweep", "pull-in continuation");
    sweep_flags.attach(c_sweep);
    c_sweep->add_option("--lambda-max", sweep_lambda_max,
                        "sweep upper end (default 1.05*xi0(eps))");
    c_sweep->add_option("--lambda-steps", sweep_steps, "coarse grid size")
        ->check(CLI::PositiveNumber);
    c_sweep->add_option("--mu-ratio", sweep_mu_ratio, "mu = ratio*lambda")
        ->check(CLI::PositiveNumber);

    auto* c_stability = app.add_subcommand("stability", "steady-state stability experiment");
    stability_flags.attach(c_stability);
    c_stability->add_option("--rho", stability_rho, "perturbation amplitude")
        ->check(CLI::PositiveNumber);

    auto* c_bound = app.add_subcommand("bound-check", "touchdown-time bound experiment");
    bound_flags.attach(c_bound);

    auto* c_selfcheck = app.add_subcommand("selfcheck", "run the invariant suite");
    selfcheck_flags.attach(c_selfcheck);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_evolve->parsed()) return cmd_evolve(evolve_flags.resolve(), evolve_dump_phi);
        if (c_sar->parsed()) return cmd_sar(sar_flags.resolve());
        if (c_compare->parsed()) return cmd_sar_compare(compare_flags.resolve(), compare_eps);
        if (c_steady->parsed()) return cmd_steady(steady_flags.resolve(), steady_dump_phi);
        if (c_sweep->parsed()) {
            return cmd_sweep(sweep_flags.resolve(), sweep_lambda_max, sweep_steps,
                             sweep_mu_ratio);
        }
        if (c_stability->parsed()) return cmd_stability(stability_flags.resolve(), stability_rho);
        if (c_bound->parsed()) return cmd_bound_check(bound_flags.resolve());
        if (c_selfcheck->parsed()) {
            const auto cfg = selfcheck_flags.resolve();
            return run_selfcheck(cfg.output_dir, std::cout) ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace memsim::cli
