#include "fracpinn/analysis.hpp"
#include "fracpinn/config.hpp"
#include "fracpinn/data.hpp"
#include "fracpinn/errors.hpp"
#include "fracpinn/solver.hpp"
#include "fracpinn/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fracpinn;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path);
    }
    out << text;
}

void write_sidecar(const RunConfig& cfg, const std::string& output_path, json extra = {}) {
    json meta = {{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}, {"output", fs::path(output_path).filename().string()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        meta[it.key()] = it.value();
    }
    write_text(output_path + ".meta.json", meta.dump(2) + "\n");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

json params_json(const EpidemicParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"sigma", p.sigma}, {"gamma", p.gamma_r},
            {"mu", p.mu}};
}

void write_training_log(const std::vector<HistoryRow>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path);
    }
    out << "iter,phase,total,data,phys,ic,cons,reg,alpha,beta,sigma,gamma,mu\n";
    char buf[512];
    for (const auto& row : history) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      row.iter, row.phase, row.bd.total, row.bd.data, row.bd.phys, row.bd.ic,
                      row.bd.cons, row.bd.reg, row.params.alpha, row.params.beta, row.params.sigma,
                      row.params.gamma_r, row.params.mu);
        out << buf;
    }
}

Trajectory network_trajectory(const Network& net, const GridSpec& grid) {
    Eigen::VectorXd t(grid.n_nodes);
    for (std::size_t j = 0; j < grid.n_nodes; ++j) {
        t(j) = static_cast<double>(j) / static_cast<double>(grid.n_nodes - 1);
    }
    const Eigen::MatrixXd Y = forward(net, t);
    Trajectory traj;
    traj.dt = grid.dt;
    traj.states.resize(grid.n_nodes);
    for (std::size_t j = 0; j < grid.n_nodes; ++j) {
        for (int c = 0; c < 5; ++c) {
            traj.states[j][c] = Y(static_cast<Eigen::Index>(j), c);
        }
    }
    return traj;
}

// Observations plus the initial state for training, either from an
// observation CSV or from a raw cumulative case-count CSV.
std::pair<ObservationSet, SimplexState> load_fit_inputs(const RunConfig& cfg,
                                                        const std::string& obs_path) {
    ObservationSet obs;
    SimplexState ic;
    if (cfg.data_format == "raw_cases") {
        const auto records = load_case_csv(obs_path);
        if (records.empty()) {
            throw ConfigError("fit: no case records in " + obs_path);
        }
        auto rec = reconstruct_observations(records, cfg.population, cfg.e0_multiplier);
        for (const auto& w : rec.warnings) {
            std::cerr << "warning: " << w << "\n";
        }
        obs = std::move(rec.obs);
        ic = rec.ic;
        align_to_grid(obs, cfg.grid);
    } else {
        obs = read_observations_csv(obs_path);
        if (obs.size() == 0) {
            throw ConfigError("fit: no observations in " + obs_path);
        }
        align_to_grid(obs, cfg.grid);
        if (obs.node_index.front() != 0) {
            throw ConfigError("fit: observations must include the initial time t = 0");
        }
        Vec5 row{};
        for (int c = 0; c < 5; ++c) {
            row[c] = obs.mask[c] ? obs.values(0, c) : 0.0;
        }
        bool all_observed = true;
        for (bool m : obs.mask) {
            all_observed = all_observed && m;
        }
        if (all_observed) {
            // clamp noise artifacts and renormalize onto the simplex
            double sum = 0.0;
            for (double& v : row) {
                v = std::max(v, 0.0);
                sum += v;
            }
            if (!(sum > 0.0)) {
                throw ConfigError("fit: degenerate initial observation row");
            }
            for (double& v : row) {
                v /= sum;
            }
        } else {
            row[1] = cfg.e0_multiplier * row[2];
            row[0] = 1.0 - row[1] - row[2] - row[3] - row[4];
        }
        ic = SimplexState::from_vec(row);
        ic.validate();
    }
    return {obs, ic};
}

struct FitOutputs {
    std::string prefix;
};

void emit_fit_outputs(const RunConfig& cfg, const FitResult& res, const std::string& prefix,
                      json extra) {
    const std::string ckpt = out_path(cfg, prefix + "checkpoint.ckpt");
    save_checkpoint(res.network, res.raw_hat, ckpt);

    const std::string log_path = out_path(cfg, prefix + "training_log.csv");
    write_training_log(res.history, log_path);
    write_sidecar(cfg, log_path);

    const std::string fitted_path = out_path(cfg, prefix + "fitted_trajectory.csv");
    write_trajectory_csv(network_trajectory(res.network, cfg.grid), fitted_path);
    write_sidecar(cfg, fitted_path);

    const char* reason = res.stop_reason == StopReason::converged
                             ? "converged"
                             : (res.stop_reason == StopReason::early_stop ? "early_stop"
                                                                          : "max_iters");
    const auto& bd = res.history.back().bd;
    json result = {
        {"params", params_json(res.params_hat)},
        {"stop_reason", reason},
        {"phase_boundaries", res.phase_boundaries},
        {"iterations", res.history.size()},
        {"terminal_loss",
         {{"total", bd.total}, {"data", bd.data}, {"phys", bd.phys}, {"ic", bd.ic},
          {"cons", bd.cons}, {"reg", bd.reg}}},
        {"checkpoint", fs::path(ckpt).filename().string()},
        {"line_search_warning", res.line_search_warning},
        {"config_hash", cfg.config_hash()},
        {"seed", cfg.seed},
    };
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        result[it.key()] = it.value();
    }
    write_text(out_path(cfg, prefix + "fit_result.json"), result.dump(2) + "\n");
}

int cmd_simulate(const RunConfig& cfg) {
    const std::size_t n_steps = cfg.grid.n_nodes - 1;
    const Trajectory traj =
        simulate(cfg.sim_ic, cfg.sim_params, cfg.grid.dt, n_steps, cfg.solver);
    const std::string path = out_path(cfg, "trajectory.csv");
    write_trajectory_csv(traj, path);
    write_sidecar(cfg, path,
                  {{"params", params_json(cfg.sim_params)},
                   {"grid", {{"dt", cfg.grid.dt}, {"T", cfg.grid.t_end()}}},
                   {"scheme", cfg.solver.scheme == Scheme::implicit ? "implicit" : "explicit"}});
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_generate(const RunConfig& cfg) {
    const std::size_t n_steps = cfg.grid.n_nodes - 1;
    const Trajectory traj =
        simulate(cfg.sim_ic, cfg.sim_params, cfg.grid.dt, n_steps, cfg.solver);
    const ObservationSet obs = make_synthetic(traj, cfg.every, cfg.noise);
    const std::string path = out_path(cfg, "observations.csv");
    write_observations_csv(obs, path);
    write_sidecar(cfg, path, {{"params", params_json(cfg.sim_params)}, {"every", cfg.every},
                              {"noise_sigma", cfg.noise.sigma_noise}});
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_fit(const RunConfig& cfg, const std::string& obs_path) {
    auto [obs, ic] = load_fit_inputs(cfg, obs_path);
    const FitResult res = fit(obs, ic, cfg.train);
    emit_fit_outputs(cfg, res, "", {});
    std::cout << "alpha = " << res.params_hat.alpha << ", beta = " << res.params_hat.beta
              << ", sigma = " << res.params_hat.sigma << ", gamma = " << res.params_hat.gamma_r
              << ", mu = " << res.params_hat.mu << "\n";
    return 0;
}

int cmd_profile(const RunConfig& cfg, const std::string& obs_path, int jobs) {
    auto [obs, ic] = load_fit_inputs(cfg, obs_path);
    const auto points = profile_alpha(obs, ic, cfg.train, cfg.alpha_grid, jobs);
    const std::string path = out_path(cfg, "profile.csv");
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path);
    }
    out << "alpha,loss,beta,sigma,gamma,mu\n";
    char buf[256];
    for (const auto& pt : points) {
        if (pt.failed) {
            std::cerr << "warning: profile point alpha = " << pt.alpha_fixed
                      << " failed: " << pt.error << "\n";
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", pt.alpha_fixed,
                      pt.terminal_loss, pt.refit_params.beta, pt.refit_params.sigma,
                      pt.refit_params.gamma_r, pt.refit_params.mu);
        out << buf;
    }
    out.close();
    write_sidecar(cfg, path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_bootstrap(const RunConfig& cfg, const std::string& obs_path, int jobs) {
    auto [obs, ic] = load_fit_inputs(cfg, obs_path);
    const BootstrapSummary summary =
        bootstrap(obs, ic, cfg.train, cfg.n_replicates, cfg.seed, jobs);
    json reps = json::array();
    for (const auto& p : summary.replicates) {
        reps.push_back(params_json(p));
    }
    const char* names[5] = {"beta", "sigma", "gamma", "mu", "alpha"};
    json ci;
    for (int p = 0; p < 5; ++p) {
        ci[names[p]] = {{"lower", summary.ci_lower[p]}, {"upper", summary.ci_upper[p]}};
    }
    json doc = {{"n_replicates", summary.n_replicates},
                {"n_failed", summary.n_failed},
                {"point", params_json(summary.point)},
                {"ci95", ci},
                {"replicates", reps},
                {"config_hash", cfg.config_hash()},
                {"seed", cfg.seed}};
    const std::string path = out_path(cfg, "bootstrap.json");
    write_text(path, doc.dump(2) + "\n");
    write_sidecar(cfg, path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_ablate(const RunConfig& cfg, const std::string& obs_path,
               const std::vector<std::string>& disable_names) {
    std::set<LossTerm> disable;
    std::string signature;
    for (const auto& name : disable_names) {
        if (name == "phys") {
            disable.insert(LossTerm::phys);
        } else if (name == "cons") {
            disable.insert(LossTerm::cons);
        } else if (name == "ic") {
            disable.insert(LossTerm::ic_term);
        } else if (name == "reg") {
            disable.insert(LossTerm::reg);
        } else {
            throw ConfigError("ablate: unknown loss term '" + name + "'");
        }
        signature += (signature.empty() ? "" : "+") + name;
    }
    auto [obs, ic] = load_fit_inputs(cfg, obs_path);
    const FitResult res = ablation(obs, ic, cfg.train, disable);
    emit_fit_outputs(cfg, res, "ablate_", {{"ablation", signature}});
    std::cout << "ablation [" << signature << "] alpha = " << res.params_hat.alpha << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional SEIRD PINN: simulation, synthetic data, parameter fitting"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string obs_path;
    std::vector<std::string> disable_names;
    int jobs = 1;

    auto add_common = [&](CLI::App* sub, bool needs_obs) {
        sub->add_option("config", config_path, "run configuration JSON")->required();
        sub->add_option("--set", overrides, "dotted-path override key=value")->take_all();
        if (needs_obs) {
            sub->add_option("--obs", obs_path, "observation or case-count CSV")->required();
        }
    };

    auto* sim = app.add_subcommand("simulate", "forward L1 simulation to CSV");
    add_common(sim, false);
    auto* gen = app.add_subcommand("generate", "simulate and emit noisy observations");
    add_common(gen, false);
    auto* fit_cmd = app.add_subcommand("fit", "train the PINN on observations");
    add_common(fit_cmd, true);
    auto* prof = app.add_subcommand("profile", "profile loss over a fixed-alpha grid");
    add_common(prof, true);
    prof->add_option("--jobs", jobs, "max concurrent fits");
    auto* boot = app.add_subcommand("bootstrap", "residual bootstrap confidence intervals");
    add_common(boot, true);
    boot->add_option("--jobs", jobs, "max concurrent fits");
    auto* abl = app.add_subcommand("ablate", "fit with selected loss terms disabled");
    add_common(abl, true);
    abl->add_option("--disable", disable_names, "loss terms to disable (phys,cons,ic,reg)")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(config_path, overrides);
        if (sim->parsed()) {
            return cmd_simulate(cfg);
        }
        if (gen->parsed()) {
            return cmd_generate(cfg);
        }
        if (fit_cmd->parsed()) {
            return cmd_fit(cfg, obs_path);
        }
        if (prof->parsed()) {
            return cmd_profile(cfg, obs_path, jobs);
        }
        if (boot->parsed()) {
            return cmd_bootstrap(cfg, obs_path, jobs);
        }
        if (abl->parsed()) {
            if (disable_names.empty()) {
                disable_names = cfg.ablate;
            }
            return cmd_ablate(cfg, obs_path, disable_names);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
