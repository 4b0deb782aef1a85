#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relaysim/params.hpp"
#include "relaysim/strategies.hpp"

namespace relaysim {

/// Scenario file contents. The file uses TOML syntax (the documented subset:
/// one-level [sections], key = value with strings, numbers, booleans and flat
/// arrays). Unknown sections or keys are rejected with a line diagnostic.
struct ScenarioConfig {
    SystemParams params;
    int workers = 0;
    int grid_points = 2048;
    std::string policy_path = "policy.json";

    struct BerBlock {
        std::vector<StrategySpec> strategies;
        std::string out = "ber.csv";
        std::optional<std::pair<double, double>> slope_window_db;
    };
    struct EfficiencyBlock {
        std::vector<int> n_list;
        std::vector<StrategySpec> strategies;
        double gamma_db = 20.0;
        std::string out = "efficiency.csv";
    };
    struct ObjectiveBlock {
        std::vector<StrategySpec> strategies;
        std::string out = "objective.csv";
    };
    struct ValidateBlock {
        long trials = 20000;
        std::vector<std::string> checks;  // empty = run everything
    };

    std::optional<BerBlock> ber;
    std::optional<EfficiencyBlock> efficiency;
    std::optional<ObjectiveBlock> objective;
    ValidateBlock validate;
};

/// Parses and validates a scenario file; throws ConfigError with the
/// offending line/field.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text);

}  // namespace relaysim
