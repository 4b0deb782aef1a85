// Times the trial fan-out serially and with OpenMP on one workload and
// checks the two paths agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "relaysim/experiments.hpp"

using namespace relaysim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    long trials = 200000;
    if (argc > 1) trials = std::atol(argv[1]);

    SystemParams params;
    params.num_relays = 10;
    params.tau = 0.1;
    params.trials = trials;
    params.seed = 20250810;
    params.gamma_db_list = {10, 20, 30};

    const std::vector<StrategySpec> strategies = {StrategySpec::parse("rs_osr"),
                                                  StrategySpec::parse("rs_all")};
    const ThresholdPolicy policy = solve_thresholds(
        StageSchedule(params.num_relays, params.tau), IndexDistribution(params.q1, params.q2));

    std::printf("workload: %ld trials, N = %d, %zu strategies, %zu SNR points\n", trials,
                params.num_relays, strategies.size(), params.gamma_db_list.size());

    auto t0 = std::chrono::steady_clock::now();
    const auto serial = run_ber_sweeps(params, strategies, ExecutionPolicy{1}, &policy);
    const double t_serial = seconds_since(t0);
    std::printf("serial:   %.3f s (%.2f Mtrials/s)\n", t_serial,
                trials / t_serial / 1e6);

    t0 = std::chrono::steady_clock::now();
    const auto parallel = run_ber_sweeps(params, strategies, ExecutionPolicy{0}, &policy);
    const double t_parallel = seconds_since(t0);
    std::printf("openmp:   %.3f s (%.2f Mtrials/s), speedup %.2fx\n", t_parallel,
                trials / t_parallel / 1e6, t_serial / t_parallel);

    bool identical = serial.size() == parallel.size();
    for (std::size_t s = 0; identical && s < serial.size(); ++s) {
        identical = std::memcmp(serial[s].per_gamma.data(), parallel[s].per_gamma.data(),
                                serial[s].per_gamma.size() * sizeof(PerGammaStats)) == 0 &&
                    serial[s].objective_se == parallel[s].objective_se;
    }
    std::printf("serial vs openmp results: %s\n", identical ? "identical" : "MISMATCH");
    return identical ? 0 : 1;
}
