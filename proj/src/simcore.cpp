#include "relaysim/simcore.hpp"

#include <cmath>
#include <stdexcept>

namespace relaysim {

std::string modulation_name(Modulation m) {
    switch (m) {
        case Modulation::Bpsk: return "bpsk";
    }
    return "?";
}

Modulation modulation_from_name(const std::string& name) {
    if (name == "bpsk") return Modulation::Bpsk;
    throw std::invalid_argument("unknown modulation '" + name + "'");
}

void SystemParams::validate() const {
    if (num_relays < 1) throw std::invalid_argument("num_relays must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(power_ratio > 0.0) || !(power_ratio < 1.0)) {
        throw std::invalid_argument("power_ratio must be in (0, 1)");
    }
    if (!(q1 > 0.0) || !(q2 > 0.0)) throw std::invalid_argument("q1, q2 must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (gamma_db_list.empty()) throw std::invalid_argument("gamma_db list must not be empty");
    for (std::size_t i = 1; i < gamma_db_list.size(); ++i) {
        if (!(gamma_db_list[i] > gamma_db_list[i - 1])) {
            throw std::invalid_argument("gamma_db list must be strictly ascending");
        }
    }
}

double ser_awgn(double gamma_eff, Modulation modulation) {
    switch (modulation) {
        case Modulation::Bpsk:
            // Q(sqrt(2 g)) = erfc(sqrt(g)) / 2
            return 0.5 * std::erfc(std::sqrt(std::max(gamma_eff, 0.0)));
    }
    return 0.0;
}

PowerAllocation power_split(double total_power, double efficiency, double ratio) {
    if (!(total_power > 0.0)) throw std::invalid_argument("power_split: P must be positive");
    if (!(efficiency > 0.0) || efficiency > 1.0) {
        throw std::invalid_argument("power_split: efficiency must be in (0, 1]");
    }
    if (!(ratio > 0.0) || !(ratio < 1.0)) {
        throw std::invalid_argument("power_split: ratio must be in the open interval (0, 1)");
    }
    PowerAllocation a{};
    a.total = total_power;
    a.ratio = ratio;
    a.efficiency = efficiency;
    a.source = ratio * total_power * efficiency;
    a.relay = (1.0 - ratio) * total_power * efficiency;
    return a;
}

double conditional_error(double gamma, double efficiency, double ratio, double w_sk,
                         double w_sd, double w_kd, Modulation modulation) {
    const double cg = efficiency * gamma;
    const double phi_relay = ser_awgn(ratio * w_sk * cg, modulation);
    const double phi_mrc = ser_awgn((ratio * w_sd + (1.0 - ratio) * w_kd) * cg, modulation);
    const double phi_direct = ser_awgn(ratio * w_sd * cg, modulation);
    return (1.0 - phi_relay) * phi_mrc + phi_relay * phi_direct;
}

double direct_error(double gamma, double efficiency, double w_sd, Modulation modulation) {
    return ser_awgn(w_sd * efficiency * gamma, modulation);
}

double error_upper_bound(double gamma, double efficiency, double ratio, double q1, double q2,
                         double x, double a_m, double b_m) {
    const double xcg = x * efficiency * gamma;
    return a_m * std::exp(-b_m * (1.0 - ratio) / (2.0 * q1) * xcg) +
           a_m * std::exp(-b_m * ratio / (2.0 * q2) * xcg);
}

void sample_channel_draw(int num_relays, Rng& rng, ChannelDraw& out) {
    out.omega_s.resize(static_cast<std::size_t>(num_relays));
    out.omega_d.resize(static_cast<std::size_t>(num_relays));
    out.omega_sd = sample_link_gain(rng);
    for (int n = 0; n < num_relays; ++n) {
        out.omega_s[static_cast<std::size_t>(n)] = sample_link_gain(rng);
        out.omega_d[static_cast<std::size_t>(n)] = sample_link_gain(rng);
    }
}

ProbeResult run_probing(const Strategy& strategy, int num_relays, double q1, double q2,
                        const ChannelDraw& draw, Rng& decision_rng) {
    double omega_max = -1.0;
    int argmax_stage = 0;
    for (int n = 1; n <= num_relays; ++n) {
        const double w = relay_index(draw.omega_s[static_cast<std::size_t>(n - 1)],
                                     draw.omega_d[static_cast<std::size_t>(n - 1)], q1, q2);
        if (w > omega_max) {
            omega_max = w;
            argmax_stage = n;  // ties keep the earliest stage
        }
        const Decision d = next_action(strategy, n, num_relays, omega_max, argmax_stage,
                                       draw.omega_sd, decision_rng);
        if (d.stops()) {
            ProbeResult pr;
            pr.stop_stage = n;
            pr.chosen_relay = (d.action == Action::StopWithRelay) ? d.relay_stage : 0;
            pr.omega_at_stop = omega_max;
            return pr;
        }
    }
    throw std::logic_error("run_probing: strategy failed to stop by stage N");
}

double probe_error_probability(const ProbeResult& probe, const ChannelDraw& draw, double gamma,
                               double tau, double ratio, Modulation modulation) {
    const double c = bandwidth_efficiency(probe.stop_stage, tau);
    if (probe.chosen_relay == 0) {
        return direct_error(gamma, c, draw.omega_sd, modulation);
    }
    const std::size_t k = static_cast<std::size_t>(probe.chosen_relay - 1);
    return conditional_error(gamma, c, ratio, draw.omega_s[k], draw.omega_sd, draw.omega_d[k],
                             modulation);
}

TransmissionOutcome simulate_transmission(const SystemParams& params, const Strategy& strategy,
                                          TrialStreams& streams, double gamma_db) {
    ChannelDraw draw;
    sample_channel_draw(params.num_relays, streams.channels, draw);
    const ProbeResult pr = run_probing(strategy, params.num_relays, params.q1, params.q2, draw,
                                       streams.decisions);
    const double gamma = std::pow(10.0, gamma_db / 10.0);
    TransmissionOutcome out;
    out.stop_stage = pr.stop_stage;
    if (pr.chosen_relay > 0) out.chosen_relay = pr.chosen_relay;
    out.efficiency = bandwidth_efficiency(pr.stop_stage, params.tau);
    out.objective_term = out.efficiency * pr.omega_at_stop;
    out.cond_error_prob =
        probe_error_probability(pr, draw, gamma, params.tau, params.power_ratio,
                                params.modulation);
    if (params.symbol_level) {
        if (pr.chosen_relay > 0) {
            const std::size_t k = static_cast<std::size_t>(pr.chosen_relay - 1);
            out.error = symbol_transmission(gamma, out.efficiency, params.power_ratio,
                                            draw.omega_s[k], draw.omega_sd, draw.omega_d[k],
                                            streams.symbols);
        } else {
            // Direct transmission: the source symbol alone, full payload power.
            const double amp = std::sqrt(out.efficiency * gamma * draw.omega_sd);
            out.error = amp + std::sqrt(0.5) * streams.symbols.normal() < 0.0;
        }
    }
    return out;
}

bool symbol_transmission(double gamma, double efficiency, double ratio, double w_sk,
                         double w_sd, double w_kd, Rng& rng) {
    // Unit-energy BPSK, noise N(0, eta0/2) per branch with eta0 = 1, so a
    // link with power p and gain w sees error rate Q(sqrt(2 p w)) = Phi(p w).
    const double p_source = ratio * efficiency * gamma;
    const double p_relay = (1.0 - ratio) * efficiency * gamma;
    const double sigma = std::sqrt(0.5);

    // Transmit +1 throughout; BPSK is symmetric.
    const double a_rel = std::sqrt(p_source * w_sk);
    const bool relay_decoded = a_rel + sigma * rng.normal() >= 0.0;

    const double a_sd = std::sqrt(p_source * w_sd);
    const double y_sd = a_sd + sigma * rng.normal();
    if (relay_decoded) {
        const double a_rd = std::sqrt(p_relay * w_kd);
        const double y_rd = a_rd + sigma * rng.normal();
        return a_sd * y_sd + a_rd * y_rd < 0.0;
    }
    return y_sd < 0.0;
}

double symbol_error_rate_mc(double gamma, double efficiency, double ratio, double w_sk,
                            double w_sd, double w_kd, long symbols, Rng& rng) {
    long errors = 0;
    for (long s = 0; s < symbols; ++s) {
        errors += symbol_transmission(gamma, efficiency, ratio, w_sk, w_sd, w_kd, rng) ? 1 : 0;
    }
    return static_cast<double>(errors) / static_cast<double>(symbols);
}

}  // namespace relaysim
