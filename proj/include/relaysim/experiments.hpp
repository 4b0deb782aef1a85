#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relaysim/params.hpp"
#include "relaysim/simcore.hpp"

namespace relaysim {

struct PerGammaStats {
    double gamma_db = 0.0;
    double ber_mean = 0.0;
    double ber_se = 0.0;
    double mean_efficiency = 0.0;
    double mean_stop_time = 0.0;
    double objective_mean = 0.0;
};

struct SlopeFit {
    double window_lo_db = 0.0;
    double window_hi_db = 0.0;
    double diversity = 0.0;      // minus the log10(BER) vs log10(SNR) slope
    double stderr_value = 0.0;
    int points = 0;
};

struct ExperimentReport {
    std::string strategy_label;
    int num_relays = 0;
    double tau = 0.0;
    double power_ratio = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
    std::vector<PerGammaStats> per_gamma;
    std::optional<SlopeFit> slope_fit;
    double objective_se = 0.0;  // gamma-independent, kept alongside per_gamma
    double stop_se = 0.0;
};

/// Trial fan-out control. workers == 1 is the serial reference loop;
/// workers == 0 uses every hardware thread. Per-trial substreams plus
/// in-order compensated summation make the output identical for any setting.
struct ExecutionPolicy {
    int workers = 0;
};

/// BER / efficiency / stopping-time sweep over params.gamma_db_list for each
/// strategy, with common random numbers across strategies (one channel draw
/// per trial, shared). BER is the variance-reduced estimator: the mean of
/// exact conditional error probabilities over channel draws.
std::vector<ExperimentReport> run_ber_sweeps(const SystemParams& params,
                                             const std::vector<StrategySpec>& strategies,
                                             ExecutionPolicy exec = {},
                                             const ThresholdPolicy* policy = nullptr);

ExperimentReport run_ber_sweep(const SystemParams& params, const StrategySpec& strategy,
                               ExecutionPolicy exec = {},
                               const ThresholdPolicy* policy = nullptr);

/// Least-squares diversity-order estimate from log10(BER) against
/// log10(SNR) over [lo_db, hi_db]. Needs >= 3 points with BER > 0 inside the
/// window; throws std::domain_error otherwise (lower the window on BER
/// underflow).
SlopeFit estimate_diversity(const ExperimentReport& report, double lo_db, double hi_db);

/// Mean bandwidth efficiency and probe count per (N, strategy) at one
/// representative SNR; the policy is re-solved per horizon as needed.
std::vector<ExperimentReport> run_efficiency_sweep(const SystemParams& params_template,
                                                   const std::vector<int>& n_list,
                                                   const std::vector<StrategySpec>& strategies,
                                                   ExecutionPolicy exec = {},
                                                   double representative_gamma_db = 20.0);

struct ObjectiveComparison {
    std::vector<ExperimentReport> reports;  // one gamma point each
    // Paired against strategies[0] on common random numbers:
    std::vector<double> mean_diff_vs_first;  // E[obj_0 - obj_s]
    std::vector<double> paired_se;
};

/// Monte Carlo objective E[c_{N_s} Omega_{N_s}] per strategy with paired
/// standard errors against the first strategy.
ObjectiveComparison run_objective_comparison(const SystemParams& params,
                                             const std::vector<StrategySpec>& strategies,
                                             ExecutionPolicy exec = {},
                                             const ThresholdPolicy* policy = nullptr);

/// CSV with one row per (strategy, N, gamma):
/// strategy,N,tau,r,gamma_db,trials,seed,ber_mean,ber_se,eff_mean,stop_mean,
/// objective_mean,objective_se — doubles at 17 significant digits, so equal
/// reports render to identical bytes.
void write_csv(std::ostream& os, const std::vector<ExperimentReport>& reports);

}  // namespace relaysim
