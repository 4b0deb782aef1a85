#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relaysim/config.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/experiments.hpp"
#include "relaysim/policy_io.hpp"
#include "relaysim/validate.hpp"

namespace {

using namespace relaysim;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string policy_path;
    int workers = -1;        // -1: take from config
    long long seed = -1;     // -1: take from config
};

ScenarioConfig load_config(const CommonOpts& opts) {
    ScenarioConfig cfg = load_scenario(opts.config_path);
    if (opts.workers >= 0) cfg.workers = opts.workers;
    if (opts.seed >= 0) cfg.params.seed = static_cast<std::uint64_t>(opts.seed);
    return cfg;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    os << text;
}

int cmd_solve(const CommonOpts& opts) {
    ScenarioConfig cfg = load_config(opts);
    const std::string out = opts.out_path.empty() ? cfg.policy_path : opts.out_path;
    const IndexDistribution law(cfg.params.q1, cfg.params.q2);
    const StageSchedule schedule(cfg.params.num_relays, cfg.params.tau);
    const ThresholdPolicy policy =
        solve_thresholds(schedule, law, GridSpec{cfg.grid_points, 0.999, 1 - 1e-6});
    save_policy_file(policy, out);

    const auto bound = stopping_time_bound(law);
    std::printf("solved policy: N = %d, tau = %g, q1 = %g, q2 = %g\n",
                cfg.params.num_relays, cfg.params.tau, cfg.params.q1, cfg.params.q2);
    std::printf("t* = %.6g, eps = %.3g, E[N_s] bound = %.6g\n", bound.t_star, bound.epsilon,
                bound.bound);
    std::printf("%4s  %-22s %-12s\n", "n", "t_n", "residual");
    for (std::size_t n = 0; n < policy.thresholds.size(); ++n) {
        std::printf("%4zu  %-22.17g %-12.3g\n", n + 1, policy.thresholds[n],
                    policy.solve_residuals[n]);
    }
    if (policy.thresholds.empty()) std::printf("  (N = 1: no thresholds)\n");
    std::printf("policy written to %s\n", out.c_str());
    return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& sweep,
            const std::string& strategies_arg) {
    ScenarioConfig cfg = load_config(opts);
    ExecutionPolicy exec{cfg.workers};

    std::vector<StrategySpec> override_specs;
    if (!strategies_arg.empty()) {
        std::string item;
        std::istringstream in(strategies_arg);
        while (std::getline(in, item, ',')) {
            if (!item.empty()) override_specs.push_back(StrategySpec::parse(item));
        }
        if (override_specs.empty()) throw ConfigError("--strategies parsed to nothing", 0);
    }

    if (sweep == "ber") {
        if (!cfg.ber && override_specs.empty()) {
            throw ConfigError("scenario has no [ber] block and no --strategies override", 0);
        }
        ScenarioConfig::BerBlock block =
            cfg.ber.value_or(ScenarioConfig::BerBlock{});
        if (!override_specs.empty()) block.strategies = override_specs;
        auto reports = run_ber_sweeps(cfg.params, block.strategies, exec);
        if (block.slope_window_db) {
            for (auto& r : reports) {
                r.slope_fit = estimate_diversity(r, block.slope_window_db->first,
                                                 block.slope_window_db->second);
            }
        }
        std::ostringstream csv;
        write_csv(csv, reports);
        const std::string out = opts.out_path.empty() ? block.out : opts.out_path;
        write_text_file(out, csv.str());
        for (const auto& r : reports) {
            const auto& top = r.per_gamma.back();
            std::printf("%-10s BER(%.4g dB) = %.6g +- %.2g, mean N_s = %.4g\n",
                        r.strategy_label.c_str(), top.gamma_db, top.ber_mean, top.ber_se,
                        top.mean_stop_time);
            if (r.slope_fit) {
                std::printf("%-10s diversity estimate %.4g +- %.2g over [%g, %g] dB\n",
                            r.strategy_label.c_str(), r.slope_fit->diversity,
                            r.slope_fit->stderr_value, r.slope_fit->window_lo_db,
                            r.slope_fit->window_hi_db);
            }
        }
        std::printf("wrote %s\n", out.c_str());
        return 0;
    }
    if (sweep == "efficiency") {
        if (!cfg.efficiency && override_specs.empty()) {
            throw ConfigError("scenario has no [efficiency] block and no --strategies override",
                              0);
        }
        ScenarioConfig::EfficiencyBlock block =
            cfg.efficiency.value_or(ScenarioConfig::EfficiencyBlock{});
        if (!override_specs.empty()) block.strategies = override_specs;
        if (block.n_list.empty()) block.n_list = {cfg.params.num_relays};
        const auto reports =
            run_efficiency_sweep(cfg.params, block.n_list, block.strategies, exec,
                                 block.gamma_db);
        std::ostringstream csv;
        write_csv(csv, reports);
        const std::string out = opts.out_path.empty() ? block.out : opts.out_path;
        write_text_file(out, csv.str());
        for (const auto& r : reports) {
            std::printf("%-10s N = %3d: mean efficiency = %.6g, mean N_s = %.4g\n",
                        r.strategy_label.c_str(), r.num_relays,
                        r.per_gamma.front().mean_efficiency,
                        r.per_gamma.front().mean_stop_time);
        }
        std::printf("wrote %s\n", out.c_str());
        return 0;
    }
    if (sweep == "objective") {
        if (!cfg.objective && override_specs.empty()) {
            throw ConfigError("scenario has no [objective] block and no --strategies override",
                              0);
        }
        ScenarioConfig::ObjectiveBlock block =
            cfg.objective.value_or(ScenarioConfig::ObjectiveBlock{});
        if (!override_specs.empty()) block.strategies = override_specs;
        const auto cmp = run_objective_comparison(cfg.params, block.strategies, exec);
        std::ostringstream csv;
        write_csv(csv, cmp.reports);
        const std::string out = opts.out_path.empty() ? block.out : opts.out_path;
        write_text_file(out, csv.str());
        for (std::size_t s = 0; s < cmp.reports.size(); ++s) {
            std::printf("%-10s E[c Omega] = %.6g +- %.2g", cmp.reports[s].strategy_label.c_str(),
                        cmp.reports[s].per_gamma.front().objective_mean,
                        cmp.reports[s].objective_se);
            if (s > 0) {
                std::printf("  (vs %s: diff %.6g +- %.2g paired)",
                            cmp.reports[0].strategy_label.c_str(), cmp.mean_diff_vs_first[s],
                            cmp.paired_se[s]);
            }
            std::printf("\n");
        }
        std::printf("wrote %s\n", out.c_str());
        return 0;
    }
    throw ConfigError("unknown sweep '" + sweep + "' (ber | efficiency | objective)", 0);
}

int cmd_validate(const CommonOpts& opts) {
    ScenarioConfig cfg = load_config(opts);
    std::optional<ThresholdPolicy> loaded;
    if (!opts.policy_path.empty()) loaded = load_policy_file(opts.policy_path);
    const auto results =
        run_validation(cfg, loaded ? &*loaded : nullptr, ExecutionPolicy{cfg.workers});
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %-18s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative relay probing: threshold policies, simulation, experiments"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string sweep;
    std::string strategies_arg;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "scenario file (TOML)")->required();
        cmd->add_option("--out", opts.out_path, "output path override");
        cmd->add_option("--workers", opts.workers, "worker threads (0 = all cores)");
        cmd->add_option("--seed", opts.seed, "seed override");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve thresholds, write the policy file");
    add_common(solve);

    CLI::App* run = app.add_subcommand("run", "run an experiment sweep, write CSV");
    add_common(run);
    run->add_option("--sweep", sweep, "ber | efficiency | objective")->required();
    run->add_option("--strategies,--strategy", strategies_arg,
                    "comma-separated strategy list override (e.g. rs_osr,rs_all,fixed:1)");

    CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
    add_common(validate);
    validate->add_option("--policy", opts.policy_path, "audit an existing policy file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (run->parsed()) return cmd_run(opts, sweep, strategies_arg);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const relaysim::ConfigError& e) {
        if (e.line > 0) {
            std::fprintf(stderr, "config error (line %d): %s\n", e.line, e.what());
        } else {
            std::fprintf(stderr, "config error: %s\n", e.what());
        }
        return 2;
    } catch (const relaysim::SolverError& e) {
        std::fprintf(stderr, "solver error (stage %d): %s\n", e.stage, e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
