#pragma once

#include <string>
#include <vector>

#include "relaysim/config.hpp"
#include "relaysim/experiments.hpp"
#include "relaysim/policy.hpp"

namespace relaysim {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Runs the solver/model invariant suite for a scenario: fixed-point
/// residuals, value-grid shape, threshold ordering, the Monte Carlo value
/// upper bound, discrete-oracle equivalence, strategy dominance under common
/// random numbers, the stopping-time bound and the closed-form threshold
/// consistency check. `policy` may point at an externally loaded policy
/// (e.g. a file under audit); nullptr solves one from the scenario.
/// config.validate.checks, when nonempty, selects a subset by name.
std::vector<CheckResult> run_validation(const ScenarioConfig& config,
                                        const ThresholdPolicy* policy,
                                        ExecutionPolicy exec = {});

}  // namespace relaysim
