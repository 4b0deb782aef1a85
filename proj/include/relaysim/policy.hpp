#pragma once

#include <vector>

#include "relaysim/dist.hpp"
#include "relaysim/rng.hpp"

namespace relaysim {

/// Airtime fraction left for payload after n probe cycles of relative
/// duration tau: c_n = 1 / (1 + n*tau).
double bandwidth_efficiency(int n, double tau);

/// Probing horizon: relay count N plus the per-stage efficiencies c_1..c_N.
struct StageSchedule {
    int num_relays = 1;
    double tau = 0.1;
    std::vector<double> efficiencies;  // c_1..c_N

    StageSchedule() = default;
    StageSchedule(int num_relays, double tau);

    /// c_n, 1-based stage index.
    double c(int n) const { return efficiencies.at(static_cast<std::size_t>(n) - 1); }
};

/// Piecewise-linear value function V_n sampled on sorted abscissae, with
/// linear extrapolation of slope c_n beyond the last knot (exact there: the
/// grid extends past the stop threshold, where V_n(x) = c_n x).
struct ValueGrid {
    int stage = 0;
    std::vector<double> xs;
    std::vector<double> vs;
    double extrapolation_slope = 0.0;

    double operator()(double x) const;
};

struct GridSpec {
    int points = 2048;
    double knee_quantile = 0.999;     // uniform knots up to this quantile of Omega_N
    double max_quantile = 1.0 - 1e-6; // geometric knots out to this quantile
};

/// Solved stopping policy: stop at stage n < N iff c_n * Omega_n >= t_n;
/// at stage N pick the best probed relay iff Omega_N >= omega_sd.
struct ThresholdPolicy {
    StageSchedule schedule;
    double q1 = 1.0, q2 = 1.0;            // index-law parameters (export provenance)
    std::vector<double> thresholds;       // t_1..t_{N-1}
    std::vector<ValueGrid> value_grids;   // stages 1..N
    std::vector<double> solve_residuals;  // relative fixed-point residual per threshold
};

/// E[V_next(max(x, w))] where V_next is the piecewise-linear interpolant of
/// `next`. Uses the identity E[V(max(x,w))] = V(x) + integral_x^inf V' * ccdf,
/// so only CCDF integrals of the law are needed; past the last knot V_next is
/// the linear extrapolation.
double continuation_value(const ValueGrid& next, double x, const IndexLaw& law);

/// Backward induction over V_n(x) = max(c_n x, E[V_{n+1}(max(x, w))]) with
/// V_N(x) = c_N x. Thresholds are the unique roots of
/// psi_n(t) = c_n t - E[V_{n+1}(max(t, w))] (psi is strictly increasing),
/// located by bisection to 1e-8 * x_max; each solved t_n is inserted as a
/// grid knot so later stages see the kink exactly. N = 1 yields no
/// thresholds (only the final-stage rule applies).
ThresholdPolicy solve_thresholds(const StageSchedule& schedule, const IndexLaw& law,
                                 const GridSpec& spec = {});

/// E[V_1(w)], the solved value of the stopping problem.
double policy_value(const ThresholdPolicy& policy, const IndexLaw& law);

/// Relative residual |c_n t_n - E[V_{n+1}(max(t_n, w))]| / (c_n t_n),
/// recomputed from the stored grids (solver health / tamper check).
double fixed_point_residual(const ThresholdPolicy& policy, const IndexLaw& law, int n);

enum class Action { Continue, StopWithRelay, StopNoRelay };

struct Decision {
    Action action = Action::Continue;
    int relay_stage = 0;  // set iff action == StopWithRelay

    bool stops() const { return action != Action::Continue; }
};

/// The stage-n decision rule. omega_max is the running max index Omega_n,
/// argmax_stage the earliest stage attaining it. Ties stop (>= throughout).
Decision decide(const ThresholdPolicy& policy, int stage, double omega_max,
                int argmax_stage, double omega_sd);

struct StoppingTimeBound {
    double t_star;   // g(1): point where h(x)/x reaches 1 at evaluation resolution
    double epsilon;  // P(w > t_star)
    double bound;    // (1 - epsilon) / epsilon >= E[N_s] for every horizon N
};

/// Horizon-free bound on the expected number of probes under the solved
/// policy; every threshold satisfies t_n < t_star.
StoppingTimeBound stopping_time_bound(const IndexLaw& law);

/// Monte Carlo check of V_n(x) <= c_n * E[max(x, w_{n+1..N})] (+3 SE).
bool value_upper_bound_check(const ThresholdPolicy& policy, const IndexLaw& law, int n,
                             double x, Rng& rng, int replicates = 100000);

}  // namespace relaysim
