#include "relaysim/strategies.hpp"

#include <cstdio>
#include <stdexcept>

namespace relaysim {

std::string StrategySpec::label() const {
    switch (type) {
        case StrategyType::RsOsr: return "rs_osr";
        case StrategyType::RsAll: return "rs_all";
        case StrategyType::FixedStop: return "fixed:" + std::to_string(fixed_stage);
        case StrategyType::RandomStop: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "random:%g", stop_prob);
            return buf;
        }
    }
    return "?";
}

StrategySpec StrategySpec::parse(const std::string& text) {
    StrategySpec spec;
    if (text == "rs_osr") {
        spec.type = StrategyType::RsOsr;
        return spec;
    }
    if (text == "rs_all") {
        spec.type = StrategyType::RsAll;
        return spec;
    }
    if (text.rfind("fixed:", 0) == 0) {
        spec.type = StrategyType::FixedStop;
        try {
            spec.fixed_stage = std::stoi(text.substr(6));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad strategy '" + text + "' (want fixed:<stage>)");
        }
        if (spec.fixed_stage < 1) throw std::invalid_argument("fixed stop stage must be >= 1");
        return spec;
    }
    if (text.rfind("random:", 0) == 0) {
        spec.type = StrategyType::RandomStop;
        try {
            spec.stop_prob = std::stod(text.substr(7));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad strategy '" + text + "' (want random:<p>)");
        }
        if (!(spec.stop_prob > 0.0) || spec.stop_prob > 1.0) {
            throw std::invalid_argument("random stop probability must be in (0, 1]");
        }
        return spec;
    }
    throw std::invalid_argument("unknown strategy '" + text +
                                "' (rs_osr | rs_all | fixed:<k> | random:<p>)");
}

Strategy Strategy::rs_osr(const ThresholdPolicy& policy) {
    Strategy s;
    s.type = StrategyType::RsOsr;
    s.policy = &policy;
    return s;
}

Strategy Strategy::rs_all() {
    Strategy s;
    s.type = StrategyType::RsAll;
    return s;
}

Strategy Strategy::fixed_stop(int k) {
    if (k < 1) throw std::invalid_argument("fixed_stop: stage must be >= 1");
    Strategy s;
    s.type = StrategyType::FixedStop;
    s.fixed_stage = k;
    return s;
}

Strategy Strategy::random_stop(double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("random_stop: p must be in (0, 1]");
    Strategy s;
    s.type = StrategyType::RandomStop;
    s.stop_prob = p;
    return s;
}

Strategy Strategy::bind(const StrategySpec& spec, const ThresholdPolicy* policy) {
    switch (spec.type) {
        case StrategyType::RsOsr:
            if (policy == nullptr) {
                throw std::invalid_argument("rs_osr strategy needs a solved policy");
            }
            return rs_osr(*policy);
        case StrategyType::RsAll: return rs_all();
        case StrategyType::FixedStop: return fixed_stop(spec.fixed_stage);
        case StrategyType::RandomStop: return random_stop(spec.stop_prob);
    }
    throw std::logic_error("unreachable strategy type");
}

std::string Strategy::label() const {
    StrategySpec spec;
    spec.type = type;
    spec.fixed_stage = fixed_stage;
    spec.stop_prob = stop_prob;
    return spec.label();
}

namespace {

Decision final_stage_rule(double omega_max, int argmax_stage, double omega_sd) {
    if (omega_max >= omega_sd) return {Action::StopWithRelay, argmax_stage};
    return {Action::StopNoRelay, 0};
}

}  // namespace

Decision next_action(const Strategy& strategy, int stage, int num_stages, double omega_max,
                     int argmax_stage, double omega_sd, Rng& rng) {
    if (stage < 1 || stage > num_stages) {
        throw std::invalid_argument("next_action: stage out of range");
    }
    switch (strategy.type) {
        case StrategyType::RsOsr:
            return decide(*strategy.policy, stage, omega_max, argmax_stage, omega_sd);
        case StrategyType::RsAll:
            if (stage < num_stages) return {Action::Continue, 0};
            return final_stage_rule(omega_max, argmax_stage, omega_sd);
        case StrategyType::FixedStop:
            if (stage >= num_stages) return final_stage_rule(omega_max, argmax_stage, omega_sd);
            if (stage >= strategy.fixed_stage) return {Action::StopWithRelay, argmax_stage};
            return {Action::Continue, 0};
        case StrategyType::RandomStop:
            if (stage >= num_stages) return final_stage_rule(omega_max, argmax_stage, omega_sd);
            if (rng.uniform01() <= strategy.stop_prob) {
                return {Action::StopWithRelay, argmax_stage};
            }
            return {Action::Continue, 0};
    }
    throw std::logic_error("unreachable strategy type");
}

}  // namespace relaysim
