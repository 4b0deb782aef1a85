#include "relaysim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relaysim {

namespace {

struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

struct MeanVar {
    Kahan sum, sumsq;
    long n = 0;
    void add(double x) {
        sum.add(x);
        sumsq.add(x * x);
        ++n;
    }
    double mean() const { return n > 0 ? sum.sum / static_cast<double>(n) : 0.0; }
    double se() const {
        if (n < 2) return 0.0;
        const double nn = static_cast<double>(n);
        const double m = mean();
        const double var = std::max(0.0, (sumsq.sum - nn * m * m) / (nn - 1.0));
        return std::sqrt(var / nn);
    }
};

int resolve_workers(ExecutionPolicy exec) {
    if (exec.workers > 0) return exec.workers;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

constexpr long kChunk = 4096;

struct SweepAccums {
    std::vector<MeanVar> eff, stop, obj;   // per strategy
    std::vector<MeanVar> err;              // strategy * n_gamma + g
    std::vector<MeanVar> diff_vs_first;    // per strategy (paired objective)
};

// The trial fan-out shared by every sweep. One channel draw per trial is
// probed under all strategies (common random numbers); per-trial results
// land in chunk buffers by trial index and are reduced serially in trial
// order, so the outcome is bit-identical for any worker count.
void run_trials(const SystemParams& params, const std::vector<Strategy>& strategies,
                const std::vector<double>& gammas_lin, ExecutionPolicy exec,
                SweepAccums& acc) {
    const long trials = params.trials;
    const int n_strat = static_cast<int>(strategies.size());
    const int n_gamma = static_cast<int>(gammas_lin.size());
    const int workers = resolve_workers(exec);

    acc.eff.assign(static_cast<std::size_t>(n_strat), {});
    acc.stop.assign(static_cast<std::size_t>(n_strat), {});
    acc.obj.assign(static_cast<std::size_t>(n_strat), {});
    acc.err.assign(static_cast<std::size_t>(n_strat * n_gamma), {});
    acc.diff_vs_first.assign(static_cast<std::size_t>(n_strat), {});

    std::vector<double> eff_buf(static_cast<std::size_t>(n_strat) * kChunk);
    std::vector<double> stop_buf(eff_buf.size());
    std::vector<double> obj_buf(eff_buf.size());
    std::vector<double> err_buf(static_cast<std::size_t>(n_strat) * n_gamma * kChunk);

    for (long base = 0; base < trials; base += kChunk) {
        const long count = std::min(kChunk, trials - base);

        auto body = [&](long i, ChannelDraw& draw) {
            const std::uint64_t trial = static_cast<std::uint64_t>(base + i);
            Rng channel_rng = Rng::substream(params.seed, trial, kChannelSalt);
            sample_channel_draw(params.num_relays, channel_rng, draw);
            for (int s = 0; s < n_strat; ++s) {
                Rng decision_rng = Rng::substream(params.seed, trial,
                                                  kDecisionSaltBase +
                                                      static_cast<std::uint64_t>(s));
                const ProbeResult pr =
                    run_probing(strategies[static_cast<std::size_t>(s)], params.num_relays,
                                params.q1, params.q2, draw, decision_rng);
                const double c = bandwidth_efficiency(pr.stop_stage, params.tau);
                const std::size_t at = static_cast<std::size_t>(s) * kChunk +
                                       static_cast<std::size_t>(i);
                eff_buf[at] = c;
                stop_buf[at] = static_cast<double>(pr.stop_stage);
                obj_buf[at] = c * pr.omega_at_stop;
                for (int g = 0; g < n_gamma; ++g) {
                    err_buf[(static_cast<std::size_t>(s) * n_gamma +
                             static_cast<std::size_t>(g)) *
                                kChunk +
                            static_cast<std::size_t>(i)] =
                        probe_error_probability(pr, draw,
                                                gammas_lin[static_cast<std::size_t>(g)],
                                                params.tau, params.power_ratio,
                                                params.modulation);
                }
            }
        };

        if (workers <= 1) {
            ChannelDraw draw;
            for (long i = 0; i < count; ++i) body(i, draw);
        } else {
#ifdef _OPENMP
#pragma omp parallel num_threads(workers)
            {
                ChannelDraw draw;
#pragma omp for schedule(static)
                for (long i = 0; i < count; ++i) body(i, draw);
            }
#else
            ChannelDraw draw;
            for (long i = 0; i < count; ++i) body(i, draw);
#endif
        }

        for (long i = 0; i < count; ++i) {
            for (int s = 0; s < n_strat; ++s) {
                const std::size_t at = static_cast<std::size_t>(s) * kChunk +
                                       static_cast<std::size_t>(i);
                acc.eff[static_cast<std::size_t>(s)].add(eff_buf[at]);
                acc.stop[static_cast<std::size_t>(s)].add(stop_buf[at]);
                acc.obj[static_cast<std::size_t>(s)].add(obj_buf[at]);
                acc.diff_vs_first[static_cast<std::size_t>(s)].add(
                    obj_buf[static_cast<std::size_t>(i)] - obj_buf[at]);
                for (int g = 0; g < n_gamma; ++g) {
                    acc.err[static_cast<std::size_t>(s * n_gamma + g)].add(
                        err_buf[(static_cast<std::size_t>(s) * n_gamma +
                                 static_cast<std::size_t>(g)) *
                                    kChunk +
                                static_cast<std::size_t>(i)]);
                }
            }
        }
    }
}

std::vector<Strategy> bind_all(const std::vector<StrategySpec>& specs,
                               const ThresholdPolicy* policy) {
    std::vector<Strategy> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) out.push_back(Strategy::bind(spec, policy));
    return out;
}

bool needs_policy(const std::vector<StrategySpec>& specs) {
    return std::any_of(specs.begin(), specs.end(), [](const StrategySpec& s) {
        return s.type == StrategyType::RsOsr;
    });
}

std::vector<ExperimentReport> build_reports(const SystemParams& params,
                                            const std::vector<StrategySpec>& specs,
                                            const SweepAccums& acc) {
    const int n_gamma = static_cast<int>(params.gamma_db_list.size());
    std::vector<ExperimentReport> reports;
    reports.reserve(specs.size());
    for (int s = 0; s < static_cast<int>(specs.size()); ++s) {
        ExperimentReport r;
        r.strategy_label = specs[static_cast<std::size_t>(s)].label();
        r.num_relays = params.num_relays;
        r.tau = params.tau;
        r.power_ratio = params.power_ratio;
        r.trials = params.trials;
        r.seed = params.seed;
        r.objective_se = acc.obj[static_cast<std::size_t>(s)].se();
        r.stop_se = acc.stop[static_cast<std::size_t>(s)].se();
        r.per_gamma.resize(static_cast<std::size_t>(n_gamma));
        for (int g = 0; g < n_gamma; ++g) {
            auto& pg = r.per_gamma[static_cast<std::size_t>(g)];
            pg.gamma_db = params.gamma_db_list[static_cast<std::size_t>(g)];
            const auto& e = acc.err[static_cast<std::size_t>(s * n_gamma + g)];
            pg.ber_mean = e.mean();
            pg.ber_se = e.se();
            pg.mean_efficiency = acc.eff[static_cast<std::size_t>(s)].mean();
            pg.mean_stop_time = acc.stop[static_cast<std::size_t>(s)].mean();
            pg.objective_mean = acc.obj[static_cast<std::size_t>(s)].mean();
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

std::vector<double> to_linear(const std::vector<double>& gamma_db) {
    std::vector<double> out(gamma_db.size());
    for (std::size_t i = 0; i < gamma_db.size(); ++i) {
        out[i] = std::pow(10.0, gamma_db[i] / 10.0);
    }
    return out;
}

}  // namespace

std::vector<ExperimentReport> run_ber_sweeps(const SystemParams& params,
                                             const std::vector<StrategySpec>& strategies,
                                             ExecutionPolicy exec,
                                             const ThresholdPolicy* policy) {
    params.validate();
    std::optional<ThresholdPolicy> owned;
    if (policy == nullptr && needs_policy(strategies)) {
        owned = solve_thresholds(StageSchedule(params.num_relays, params.tau),
                                 IndexDistribution(params.q1, params.q2));
        policy = &*owned;
    }
    const auto bound = bind_all(strategies, policy);
    SweepAccums acc;
    run_trials(params, bound, to_linear(params.gamma_db_list), exec, acc);
    return build_reports(params, strategies, acc);
}

ExperimentReport run_ber_sweep(const SystemParams& params, const StrategySpec& strategy,
                               ExecutionPolicy exec, const ThresholdPolicy* policy) {
    return run_ber_sweeps(params, {strategy}, exec, policy).front();
}

SlopeFit estimate_diversity(const ExperimentReport& report, double lo_db, double hi_db) {
    std::vector<double> xs, ys;
    for (const auto& pg : report.per_gamma) {
        if (pg.gamma_db < lo_db - 1e-9 || pg.gamma_db > hi_db + 1e-9) continue;
        if (!(pg.ber_mean > 0.0)) {
            throw std::domain_error(
                "estimate_diversity: BER underflowed to zero inside the window; "
                "use a lower SNR window");
        }
        xs.push_back(pg.gamma_db / 10.0);  // log10 of the linear SNR
        ys.push_back(std::log10(pg.ber_mean));
    }
    if (xs.size() < 3) {
        throw std::domain_error("estimate_diversity: need at least 3 SNR points in the window");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - my - slope * (xs[i] - mx);
        ss_res += r * r;
    }
    SlopeFit fit;
    fit.window_lo_db = lo_db;
    fit.window_hi_db = hi_db;
    fit.points = static_cast<int>(xs.size());
    fit.diversity = -slope;
    fit.stderr_value = xs.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return fit;
}

std::vector<ExperimentReport> run_efficiency_sweep(const SystemParams& params_template,
                                                   const std::vector<int>& n_list,
                                                   const std::vector<StrategySpec>& strategies,
                                                   ExecutionPolicy exec,
                                                   double representative_gamma_db) {
    std::vector<ExperimentReport> out;
    for (int n : n_list) {
        SystemParams params = params_template;
        params.num_relays = n;
        params.gamma_db_list = {representative_gamma_db};
        auto reports = run_ber_sweeps(params, strategies, exec, nullptr);
        for (auto& r : reports) out.push_back(std::move(r));
    }
    return out;
}

ObjectiveComparison run_objective_comparison(const SystemParams& params,
                                             const std::vector<StrategySpec>& strategies,
                                             ExecutionPolicy exec,
                                             const ThresholdPolicy* policy) {
    params.validate();
    std::optional<ThresholdPolicy> owned;
    if (policy == nullptr && needs_policy(strategies)) {
        owned = solve_thresholds(StageSchedule(params.num_relays, params.tau),
                                 IndexDistribution(params.q1, params.q2));
        policy = &*owned;
    }
    const auto bound = bind_all(strategies, policy);
    SweepAccums acc;
    SystemParams single = params;
    if (single.gamma_db_list.size() > 1) {
        single.gamma_db_list = {params.gamma_db_list.back()};
    }
    run_trials(single, bound, to_linear(single.gamma_db_list), exec, acc);

    ObjectiveComparison cmp;
    cmp.reports = build_reports(single, strategies, acc);
    cmp.mean_diff_vs_first.resize(strategies.size());
    cmp.paired_se.resize(strategies.size());
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        cmp.mean_diff_vs_first[s] = acc.diff_vs_first[s].mean();
        cmp.paired_se[s] = acc.diff_vs_first[s].se();
    }
    return cmp;
}

namespace {

void append_g17(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
    os << "strategy,N,tau,r,gamma_db,trials,seed,ber_mean,ber_se,eff_mean,stop_mean,"
          "objective_mean,objective_se\n";
    for (const auto& r : reports) {
        for (const auto& pg : r.per_gamma) {
            std::string line = r.strategy_label;
            line += ',';
            line += std::to_string(r.num_relays);
            line += ',';
            append_g17(line, r.tau);
            line += ',';
            append_g17(line, r.power_ratio);
            line += ',';
            append_g17(line, pg.gamma_db);
            line += ',';
            line += std::to_string(r.trials);
            line += ',';
            line += std::to_string(r.seed);
            line += ',';
            append_g17(line, pg.ber_mean);
            line += ',';
            append_g17(line, pg.ber_se);
            line += ',';
            append_g17(line, pg.mean_efficiency);
            line += ',';
            append_g17(line, pg.mean_stop_time);
            line += ',';
            append_g17(line, pg.objective_mean);
            line += ',';
            append_g17(line, r.objective_se);
            line += '\n';
            os << line;
        }
    }
}

}  // namespace relaysim
