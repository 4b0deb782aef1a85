#pragma once

#include <optional>
#include <vector>

#include "relaysim/params.hpp"
#include "relaysim/rng.hpp"
#include "relaysim/strategies.hpp"

namespace relaysim {

/// Symbol error rate on an AWGN link at effective SNR gamma_eff.
/// BPSK: Phi(g) = Q(sqrt(2 g)).
double ser_awgn(double gamma_eff, Modulation modulation);

struct PowerAllocation {
    double total;       // P
    double ratio;       // r
    double efficiency;  // c_n
    double source;      // P_s = r P c_n
    double relay;       // P_r = (1 - r) P c_n
};

/// Payload power split: P_s + P_r = P * c. Requires r in (0, 1), c in (0, 1].
PowerAllocation power_split(double total_power, double efficiency, double ratio);

/// Decode-and-forward error probability conditional on the three link gains:
///   (1 - Phi(r w_sk c g)) * Phi((r w_sd + (1-r) w_kd) c g)
///   + Phi(r w_sk c g) * Phi(r w_sd c g).
/// First case: relay decoded, destination maximal-ratio-combines both copies;
/// second: relay silent, destination decodes the source copy alone.
double conditional_error(double gamma, double efficiency, double ratio, double w_sk,
                         double w_sd, double w_kd, Modulation modulation);

/// No-relay branch: the whole payload budget P*c goes to the source.
double direct_error(double gamma, double efficiency, double w_sd, Modulation modulation);

/// Exponential upper bound on the conditional error in terms of the relay
/// index x alone:
///   A exp(-B (1-r)/(2 q1) x c g) + A exp(-B r/(2 q2) x c g).
double error_upper_bound(double gamma, double efficiency, double ratio, double q1, double q2,
                         double x, double a_m = 0.5, double b_m = 1.0);

/// All link gains of one transmission. Drawn up front (every stage, whether
/// probed or not) so strategies sharing a trial see identical channels.
struct ChannelDraw {
    double omega_sd = 0.0;
    std::vector<double> omega_s;  // source -> relay n
    std::vector<double> omega_d;  // relay n -> destination
};

/// Draw order: omega_sd, then (omega_s[n], omega_d[n]) per stage.
void sample_channel_draw(int num_relays, Rng& rng, ChannelDraw& out);

/// Where the probing stopped and what was selected. chosen_relay is 0 when
/// the direct path was used (final-stage rule with Omega_N < omega_sd).
struct ProbeResult {
    int stop_stage = 0;
    int chosen_relay = 0;
    double omega_at_stop = 0.0;  // Omega_{N_s}
};

/// Run the sequential probing process over a realized draw. Decisions at
/// stage n read only omega_sd and stages 1..n of the draw.
ProbeResult run_probing(const Strategy& strategy, int num_relays, double q1, double q2,
                        const ChannelDraw& draw, Rng& decision_rng);

/// Error probability of the transmission that `probe` selected, at SNR gamma.
double probe_error_probability(const ProbeResult& probe, const ChannelDraw& draw, double gamma,
                               double tau, double ratio, Modulation modulation);

struct TransmissionOutcome {
    int stop_stage = 0;
    std::optional<int> chosen_relay;
    double efficiency = 0.0;
    double objective_term = 0.0;  // c_{N_s} * Omega_{N_s}
    double cond_error_prob = 0.0;
    std::optional<bool> error;  // symbol-level mode only
};

/// One cooperative transmission end to end: sample channels, probe under the
/// strategy, split power, evaluate the decode-and-forward error model.
TransmissionOutcome simulate_transmission(const SystemParams& params, const Strategy& strategy,
                                          TrialStreams& streams, double gamma_db);

/// One BPSK symbol through the physical chain (relay decodes, forwards only
/// on success, destination MRC-combines; relay silence is signaled).
bool symbol_transmission(double gamma, double efficiency, double ratio, double w_sk,
                         double w_sd, double w_kd, Rng& rng);

/// Monte Carlo symbol error rate over `symbols` repetitions; the independent
/// oracle for conditional_error.
double symbol_error_rate_mc(double gamma, double efficiency, double ratio, double w_sk,
                            double w_sd, double w_kd, long symbols, Rng& rng);

}  // namespace relaysim
