#include "relaysim/policy_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace relaysim {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "relaysim-policy-v1";

}  // namespace

void save_policy(const ThresholdPolicy& policy, std::ostream& os) {
    json doc;
    doc["format"] = kFormatTag;
    doc["n_relays"] = policy.schedule.num_relays;
    doc["tau"] = policy.schedule.tau;
    doc["q1"] = policy.q1;
    doc["q2"] = policy.q2;
    doc["thresholds"] = policy.thresholds;
    doc["residuals"] = policy.solve_residuals;
    json grids = json::array();
    for (const auto& g : policy.value_grids) {
        json jg;
        jg["stage"] = g.stage;
        jg["extrapolation_slope"] = g.extrapolation_slope;
        jg["xs"] = g.xs;
        jg["vs"] = g.vs;
        grids.push_back(std::move(jg));
    }
    doc["grids"] = std::move(grids);
    os << doc.dump(1, '\t') << '\n';
}

void save_policy_file(const ThresholdPolicy& policy, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write policy file '" + path + "'");
    save_policy(policy, os);
}

ThresholdPolicy load_policy(std::istream& is) {
    json doc = json::parse(is);
    if (doc.value("format", "") != kFormatTag) {
        throw std::runtime_error("policy file: unrecognized format tag");
    }
    const int n = doc.at("n_relays").get<int>();
    const double tau = doc.at("tau").get<double>();
    ThresholdPolicy policy;
    policy.schedule = StageSchedule(n, tau);
    policy.q1 = doc.at("q1").get<double>();
    policy.q2 = doc.at("q2").get<double>();
    policy.thresholds = doc.at("thresholds").get<std::vector<double>>();
    policy.solve_residuals = doc.at("residuals").get<std::vector<double>>();
    if (policy.thresholds.size() != static_cast<std::size_t>(n - 1)) {
        throw std::runtime_error("policy file: threshold count does not match n_relays");
    }
    for (const auto& jg : doc.at("grids")) {
        ValueGrid g;
        g.stage = jg.at("stage").get<int>();
        g.extrapolation_slope = jg.at("extrapolation_slope").get<double>();
        g.xs = jg.at("xs").get<std::vector<double>>();
        g.vs = jg.at("vs").get<std::vector<double>>();
        if (g.xs.size() != g.vs.size() || g.xs.size() < 2) {
            throw std::runtime_error("policy file: malformed value grid");
        }
        if (!std::is_sorted(g.xs.begin(), g.xs.end())) {
            throw std::runtime_error("policy file: grid abscissae not sorted");
        }
        policy.value_grids.push_back(std::move(g));
    }
    if (policy.value_grids.size() != static_cast<std::size_t>(n)) {
        throw std::runtime_error("policy file: grid count does not match n_relays");
    }
    return policy;
}

ThresholdPolicy load_policy_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read policy file '" + path + "'");
    return load_policy(is);
}

}  // namespace relaysim
