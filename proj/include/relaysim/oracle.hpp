#pragma once

#include <vector>

#include "relaysim/dist.hpp"
#include "relaysim/policy.hpp"

namespace relaysim {
namespace oracle {

/// Index law with finite support; the state space of the stopping problem
/// becomes finite, so the dynamic program can be evaluated exactly. Also
/// plugs into the grid solver as a step-function CCDF for cross-checks.
class DiscreteIndexDist final : public IndexLaw {
public:
    DiscreteIndexDist(std::vector<double> support, std::vector<double> probs);

    double ccdf(double z) const override;
    double tail_integral(double a, double b) const override;
    double mean() const override;
    double sample(Rng& rng) const override;
    std::vector<double> knot_hints() const override { return support_; }

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> support_;  // strictly increasing
    std::vector<double> probs_;
    std::vector<double> cum_;  // cum_[j] = P(w <= support_[j])
};

struct ExactDpResult {
    // values[n-1][j] = V_n(support[j]) for stages 1..N.
    std::vector<std::vector<double>> values;
    double optimal_value = 0.0;  // E[V_1(w_1)]
};

/// Exact backward induction over the finite state space (long-double
/// accumulation). Guarded to N <= 8 and support size <= 8.
ExactDpResult exact_dp_value(const StageSchedule& schedule, const DiscreteIndexDist& dist);

struct PolicySearchResult {
    double best_value = 0.0;
    // stop_sets[n-1][j]: stop at stage n in state support[j] (stages 1..N-1;
    // stage N always stops).
    std::vector<std::vector<char>> best_rule;
    // True when some optimal rule is an up-set per stage, i.e. has threshold
    // structure; best_rule is that rule in that case.
    bool threshold_rule_attains_best = false;
};

/// Enumerates every stopping rule measurable in (stage, Omega_n) and
/// evaluates each exactly. Guarded to N <= 5 and support size <= 5.
PolicySearchResult exhaustive_policy_search(const StageSchedule& schedule,
                                            const DiscreteIndexDist& dist);

}  // namespace oracle
}  // namespace relaysim
