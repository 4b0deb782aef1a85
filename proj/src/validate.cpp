#include "relaysim/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "relaysim/oracle.hpp"

namespace relaysim {

namespace {

bool wanted(const ScenarioConfig& config, const std::string& name) {
    const auto& sel = config.validate.checks;
    return sel.empty() || std::find(sel.begin(), sel.end(), name) != sel.end();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckResult check_fixed_point(const ThresholdPolicy& policy, const IndexLaw& law) {
    CheckResult r{"fixed_point", true, ""};
    double worst = 0.0;
    for (int n = 1; n < policy.schedule.num_relays; ++n) {
        worst = std::max(worst, fixed_point_residual(policy, law, n));
    }
    r.pass = worst <= 1e-3;
    r.detail = "max relative residual " + fmt(worst) + " (tol 1e-3)";
    return r;
}

CheckResult check_grid_shape(const ThresholdPolicy& policy) {
    CheckResult r{"grid_shape", true, ""};
    for (const auto& g : policy.value_grids) {
        const double tol = 1e-6 * *std::max_element(g.vs.begin(), g.vs.end());
        const double c_n = policy.schedule.c(g.stage);
        for (std::size_t j = 0; j < g.xs.size(); ++j) {
            if (j > 0 && g.vs[j] < g.vs[j - 1]) {
                r.pass = false;
                r.detail = "stage " + std::to_string(g.stage) + ": V not monotone at knot " +
                           std::to_string(j);
                return r;
            }
            if (g.vs[j] + tol < c_n * g.xs[j]) {
                r.pass = false;
                r.detail = "stage " + std::to_string(g.stage) + ": V below stop reward";
                return r;
            }
        }
        // Convexity via chord slopes (knots are not equally spaced).
        double prev_slope = -1e300;
        for (std::size_t j = 0; j + 1 < g.xs.size(); ++j) {
            const double dx = g.xs[j + 1] - g.xs[j];
            const double slope = (g.vs[j + 1] - g.vs[j]) / dx;
            if (slope + tol / std::max(dx, 1e-12) < prev_slope) {
                r.pass = false;
                r.detail = "stage " + std::to_string(g.stage) + ": V not convex at knot " +
                           std::to_string(j);
                return r;
            }
            prev_slope = slope;
        }
    }
    r.detail = "monotone, convex, V >= c_n x on all stages";
    return r;
}

CheckResult check_threshold_order(const ThresholdPolicy& policy, const IndexLaw& law) {
    CheckResult r{"threshold_order", true, ""};
    if (policy.thresholds.empty()) {
        r.detail = "no thresholds (N = 1)";
        return r;
    }
    const double t_last = policy.thresholds.back();
    const double t_star = stopping_time_bound(law).t_star;
    for (double t : policy.thresholds) {
        if (t > t_last * (1.0 + 1e-9) + 1e-12) {
            r.pass = false;
            r.detail = "t_n exceeds t_{N-1}";
            return r;
        }
    }
    if (!(t_last < t_star)) {
        r.pass = false;
        r.detail = "t_{N-1} = " + fmt(t_last) + " not below t* = " + fmt(t_star);
        return r;
    }
    r.detail = "t_n <= t_{N-1} = " + fmt(t_last) + " < t* = " + fmt(t_star);
    return r;
}

CheckResult check_value_upper_bound(const ThresholdPolicy& policy, const IndexLaw& law,
                                    long replicates) {
    CheckResult r{"value_upper_bound", true, ""};
    Rng rng = Rng::substream(0xB0117ull, 0, 0);
    const double t_star = stopping_time_bound(law).t_star;
    const int n_relays = policy.schedule.num_relays;
    for (int probe = 0; probe < 20; ++probe) {
        const int n = 1 + static_cast<int>(rng.next_u64() % static_cast<unsigned>(n_relays));
        const double x = 2.0 * t_star * rng.uniform01();
        if (!value_upper_bound_check(policy, law, n, x, rng,
                                     static_cast<int>(replicates))) {
            r.pass = false;
            r.detail = "V_n(x) above c_n E[Omega_N | Omega_n = x] + 3 SE at n = " +
                       std::to_string(n) + ", x = " + fmt(x);
            return r;
        }
    }
    r.detail = "20 random (n, x) probes within the conditional-mean bound";
    return r;
}

CheckResult check_oracle(const ScenarioConfig& config) {
    CheckResult r{"oracle", true, ""};
    Rng rng = Rng::substream(config.params.seed, 0, 0x0AC1Eull);
    double worst_pair = 0.0, worst_solver = 0.0;
    {
        // Canonical instance: five stages over a four-point law.
        const oracle::DiscreteIndexDist dist({0.5, 1.0, 2.0, 4.0}, {0.4, 0.3, 0.2, 0.1});
        const StageSchedule schedule(5, 0.1);
        const auto dp = oracle::exact_dp_value(schedule, dist);
        const auto search = oracle::exhaustive_policy_search(schedule, dist);
        worst_pair = std::abs(dp.optimal_value - search.best_value);
        const auto policy = solve_thresholds(schedule, dist, GridSpec{256, 0.999, 1 - 1e-6});
        worst_solver = std::abs(policy_value(policy, dist) - dp.optimal_value);
        if (!search.threshold_rule_attains_best) {
            r.pass = false;
            r.detail = "no threshold-structured optimum on the canonical instance";
            return r;
        }
    }
    for (int inst = 0; inst < 4; ++inst) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);         // 2..5
        const std::size_t s = 2 + rng.next_u64() % 4;                   // 2..5
        std::vector<double> support, probs;
        double total = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            support.push_back(0.2 + 5.0 * rng.uniform01());
            probs.push_back(0.1 + rng.uniform01());
            total += probs.back();
        }
        std::sort(support.begin(), support.end());
        for (auto& p : probs) p /= total;
        probs.back() = 1.0 - std::accumulate(probs.begin(), probs.end() - 1, 0.0);
        const oracle::DiscreteIndexDist dist(support, probs);
        const StageSchedule schedule(n, 0.05 + 0.1 * rng.uniform01());

        const auto dp = oracle::exact_dp_value(schedule, dist);
        const auto search = oracle::exhaustive_policy_search(schedule, dist);
        worst_pair = std::max(worst_pair, std::abs(dp.optimal_value - search.best_value));
        if (!search.threshold_rule_attains_best) {
            r.pass = false;
            r.detail = "no optimal rule with threshold structure on instance " +
                       std::to_string(inst);
            return r;
        }
        const auto policy = solve_thresholds(schedule, dist, GridSpec{256, 0.999, 1 - 1e-6});
        worst_solver = std::max(worst_solver,
                                std::abs(policy_value(policy, dist) - dp.optimal_value));
    }
    r.pass = worst_pair <= 1e-12 && worst_solver <= 1e-9;
    r.detail = "dp vs search " + fmt(worst_pair) + " (tol 1e-12), grid solver " +
               fmt(worst_solver) + " (tol 1e-9)";
    return r;
}

CheckResult check_dominance(const ScenarioConfig& config, const ThresholdPolicy& policy,
                            ExecutionPolicy exec) {
    CheckResult r{"dominance", true, ""};
    SystemParams params = config.params;
    params.trials = config.validate.trials;
    const int n_rel = params.num_relays;
    std::vector<StrategySpec> specs;
    specs.push_back(StrategySpec::parse("rs_osr"));
    specs.push_back(StrategySpec::parse("rs_all"));
    specs.push_back(StrategySpec::parse("fixed:1"));
    if (n_rel > 2) specs.push_back(StrategySpec::parse("fixed:" + std::to_string((n_rel + 1) / 2)));
    if (n_rel > 1) specs.push_back(StrategySpec::parse("fixed:" + std::to_string(n_rel)));

    const auto cmp = run_objective_comparison(params, specs, exec, &policy);
    double worst_margin = 1e300;
    std::string worst_label;
    for (std::size_t s = 1; s < specs.size(); ++s) {
        const double margin = cmp.mean_diff_vs_first[s] + 3.0 * cmp.paired_se[s];
        if (margin < worst_margin) {
            worst_margin = margin;
            worst_label = cmp.reports[s].strategy_label;
        }
    }
    r.pass = worst_margin >= 0.0;
    r.detail = "min over baselines of E[obj_osr - obj] + 3 SE = " + fmt(worst_margin) +
               " (worst: " + worst_label + ")";
    return r;
}

CheckResult check_stopping_bound(const ScenarioConfig& config, const ThresholdPolicy& policy,
                                 const IndexLaw& law, ExecutionPolicy exec) {
    CheckResult r{"stopping_bound", true, ""};
    const auto bound = stopping_time_bound(law);
    SystemParams params = config.params;
    params.trials = config.validate.trials;
    params.gamma_db_list = {20.0};
    const auto report = run_ber_sweep(params, StrategySpec::parse("rs_osr"), exec, &policy);
    const double mean_stop = report.per_gamma.front().mean_stop_time;
    r.pass = mean_stop <= bound.bound;
    r.detail = "mean N_s = " + fmt(mean_stop) + " <= (1-eps)/eps = " + fmt(bound.bound) +
               " (eps = " + fmt(bound.epsilon) + ")";
    return r;
}

CheckResult check_closed_form(const ThresholdPolicy& policy, const IndexLaw& law) {
    CheckResult r{"closed_form", true, ""};
    // g(c_n/c_{n+1}) is exact at n = N-1 and in general a lower bound on the
    // solved t_n: V_{n+1} >= c_{n+1} x pointwise pushes the fixed point up.
    const int n_relays = policy.schedule.num_relays;
    if (n_relays < 2) {
        r.detail = "no thresholds (N = 1)";
        return r;
    }
    const double x_scale = policy.value_grids.front().xs.back();
    const double tol = 1e-6 * std::max(1.0, x_scale);
    for (int n = 1; n < n_relays; ++n) {
        const double candidate =
            g_func(law, policy.schedule.c(n) / policy.schedule.c(n + 1));
        const double t_n = policy.thresholds[static_cast<std::size_t>(n - 1)];
        if (t_n < candidate - tol) {
            r.pass = false;
            r.detail = "t_" + std::to_string(n) + " = " + fmt(t_n) +
                       " below its closed-form lower bound " + fmt(candidate);
            return r;
        }
        if (n == n_relays - 1 && std::abs(t_n - candidate) > tol) {
            r.pass = false;
            r.detail = "t_{N-1} = " + fmt(t_n) + " != g(c_{N-1}/c_N) = " + fmt(candidate);
            return r;
        }
    }
    r.detail = "g(c_n/c_{n+1}) <= t_n for all n, equality at N-1";
    return r;
}

}  // namespace

std::vector<CheckResult> run_validation(const ScenarioConfig& config,
                                        const ThresholdPolicy* policy, ExecutionPolicy exec) {
    std::vector<CheckResult> results;
    const IndexDistribution law(config.params.q1, config.params.q2);

    ThresholdPolicy solved;
    if (policy == nullptr) {
        solved = solve_thresholds(StageSchedule(config.params.num_relays, config.params.tau),
                                  law, GridSpec{config.grid_points, 0.999, 1 - 1e-6});
        policy = &solved;
    }

    if (wanted(config, "fixed_point")) results.push_back(check_fixed_point(*policy, law));
    if (wanted(config, "grid_shape")) results.push_back(check_grid_shape(*policy));
    if (wanted(config, "threshold_order")) {
        results.push_back(check_threshold_order(*policy, law));
    }
    if (wanted(config, "value_upper_bound")) {
        results.push_back(check_value_upper_bound(*policy, law, config.validate.trials));
    }
    if (wanted(config, "oracle")) results.push_back(check_oracle(config));
    if (wanted(config, "dominance")) results.push_back(check_dominance(config, *policy, exec));
    if (wanted(config, "stopping_bound")) {
        results.push_back(check_stopping_bound(config, *policy, law, exec));
    }
    if (wanted(config, "closed_form")) results.push_back(check_closed_form(*policy, law));
    return results;
}

}  // namespace relaysim
