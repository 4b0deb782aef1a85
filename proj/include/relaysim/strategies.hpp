#pragma once

#include <string>

#include "relaysim/policy.hpp"
#include "relaysim/rng.hpp"

namespace relaysim {

enum class StrategyType { RsOsr, RsAll, FixedStop, RandomStop };

/// Config-level strategy descriptor; no horizon-specific state, so one spec
/// can be instantiated across several N (RS_OSR binds to a solved policy).
/// Text forms: "rs_osr", "rs_all", "fixed:<k>", "random:<p>".
struct StrategySpec {
    StrategyType type = StrategyType::RsAll;
    int fixed_stage = 1;    // FixedStop
    double stop_prob = 0.5; // RandomStop

    std::string label() const;
    static StrategySpec parse(const std::string& text);
};

/// A probing strategy bound to a horizon (and, for RS_OSR, to a policy).
struct Strategy {
    StrategyType type = StrategyType::RsAll;
    const ThresholdPolicy* policy = nullptr;
    int fixed_stage = 1;
    double stop_prob = 0.5;

    static Strategy rs_osr(const ThresholdPolicy& policy);
    static Strategy rs_all();
    static Strategy fixed_stop(int k);
    static Strategy random_stop(double p);
    static Strategy bind(const StrategySpec& spec, const ThresholdPolicy* policy);

    std::string label() const;
};

/// Stage decision under any strategy. All strategies share the final-stage
/// rule: pick the best probed relay iff Omega_N >= omega_sd, else no relay.
/// Only RandomStop consumes randomness.
Decision next_action(const Strategy& strategy, int stage, int num_stages, double omega_max,
                     int argmax_stage, double omega_sd, Rng& rng);

}  // namespace relaysim
