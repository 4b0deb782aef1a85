#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relaysim {

enum class Modulation { Bpsk };

std::string modulation_name(Modulation m);
Modulation modulation_from_name(const std::string& name);

/// All scenario constants for one experiment run.
struct SystemParams {
    int num_relays = 10;
    double tau = 0.1;
    double power_ratio = 0.5;  // r: source share of the payload power budget
    double q1 = 1.0;
    double q2 = 1.0;
    std::vector<double> gamma_db_list = {10, 15, 20, 25, 30};
    Modulation modulation = Modulation::Bpsk;
    long trials = 100000;
    std::uint64_t seed = 1;
    bool symbol_level = false;  // also sample one Bernoulli symbol error per trial

    void validate() const;  // throws std::invalid_argument on bad fields
};

}  // namespace relaysim
