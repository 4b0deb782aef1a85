#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relaysim/simcore.hpp"

using namespace relaysim;

namespace {

// Gaussian tail by composite Simpson on the density; independent of erfc.
double q_function(double x) {
    const double hi = x + 40.0;
    const int cells = 200000;
    const double h = (hi - x) / cells;
    double acc = 0.0;
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    for (int j = 0; j < cells; ++j) {
        const double a = x + j * h;
        acc += (phi(a) + 4.0 * phi(a + 0.5 * h) + phi(a + h)) * h / 6.0;
    }
    return acc;
}

}  // namespace

TEST_SUITE_BEGIN("simcore");

TEST_CASE("BPSK symbol error rate against the Gaussian tail") {
    CHECK(ser_awgn(0.0, Modulation::Bpsk) == doctest::Approx(0.5));
    CHECK(ser_awgn(1.0, Modulation::Bpsk) ==
          doctest::Approx(q_function(std::sqrt(2.0))).epsilon(1e-9));
    for (double g : {0.1, 1.0, 10.0}) {
        CHECK(ser_awgn(g, Modulation::Bpsk) <= 0.5 * std::exp(-g));  // Chernoff
    }
}

TEST_CASE("power split honors the payload budget") {
    const auto a = power_split(1.0, 1.0, 0.5);
    CHECK(a.source == doctest::Approx(0.5));
    CHECK(a.relay == doctest::Approx(0.5));
    const auto b = power_split(1.0, 0.5, 0.5);
    CHECK(b.source == doctest::Approx(0.25));
    CHECK(b.relay == doctest::Approx(0.25));
    CHECK(b.source + b.relay == doctest::Approx(b.total * b.efficiency));
    CHECK_THROWS_AS(power_split(1.0, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(power_split(1.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("conditional error limits") {
    CHECK(conditional_error(0.0, 0.8, 0.5, 1.0, 1.0, 1.0, Modulation::Bpsk) ==
          doctest::Approx(0.5));
    CHECK(conditional_error(1e12, 0.8, 0.5, 1.0, 1.0, 1.0, Modulation::Bpsk) == 0.0);
    // A relay that always decodes reduces the model to the MRC branch exactly.
    const double gamma = 3.7, c = 0.8, r = 0.4, w_sd = 0.9, w_kd = 1.7;
    CHECK(conditional_error(gamma, c, r, 1e300, w_sd, w_kd, Modulation::Bpsk) ==
          ser_awgn((r * w_sd + (1 - r) * w_kd) * c * gamma, Modulation::Bpsk));
}

TEST_CASE("conditional error is nonincreasing in SNR") {
    Rng rng = Rng::substream(5001, 0, 0);
    for (int fixture = 0; fixture < 1000; ++fixture) {
        const double w_sk = sample_link_gain(rng);
        const double w_sd = sample_link_gain(rng);
        const double w_kd = sample_link_gain(rng);
        double prev = 1.0;
        for (int j = 0; j < 10; ++j) {
            const double gamma = std::pow(10.0, (3.0 * j) / 10.0);
            const double p =
                conditional_error(gamma, 0.7, 0.5, w_sk, w_sd, w_kd, Modulation::Bpsk);
            REQUIRE(p <= prev + 1e-15);
            REQUIRE(p >= 0.0);
            REQUIRE(p <= 0.5 + 1e-15);
            prev = p;
        }
    }
}

TEST_CASE("direct transmission error") {
    CHECK(direct_error(0.0, 0.8, 1.0, Modulation::Bpsk) == doctest::Approx(0.5));
    CHECK(direct_error(10.0, 0.8, 0.0, Modulation::Bpsk) == doctest::Approx(0.5));
    double prev = 1.0;
    for (int j = 0; j < 10; ++j) {
        const double p = direct_error(std::pow(10.0, j / 5.0), 0.8, 1.3, Modulation::Bpsk);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("exponential bound dominates the conditional error") {
    CHECK(error_upper_bound(3.0, 0.8, 0.5, 1.0, 1.0, 0.0) == doctest::Approx(1.0));  // 2 A_M
    CHECK(error_upper_bound(1e9, 0.8, 0.5, 1.0, 1.0, 2.0) < 1e-12);
    Rng rng = Rng::substream(5002, 0, 0);
    const double q1 = 1.0, q2 = 1.0;
    for (int fixture = 0; fixture < 1000; ++fixture) {
        const double w_sk = sample_link_gain(rng);
        const double w_sd = sample_link_gain(rng);
        const double w_kd = sample_link_gain(rng);
        const double x = relay_index(w_sk, w_kd, q1, q2);
        const double gamma = std::pow(10.0, 30.0 * rng.uniform01() / 10.0);
        const double p = conditional_error(gamma, 0.7, 0.5, w_sk, w_sd, w_kd,
                                           Modulation::Bpsk);
        REQUIRE(p <= error_upper_bound(gamma, 0.7, 0.5, q1, q2, x) + 1e-15);
    }
}

TEST_CASE("symbol-level Monte Carlo reproduces the error model") {
    Rng fixture_rng = Rng::substream(5003, 0, 0);
    for (int fixture = 0; fixture < 3; ++fixture) {
        const double w_sk = sample_link_gain(fixture_rng);
        const double w_sd = sample_link_gain(fixture_rng);
        const double w_kd = sample_link_gain(fixture_rng);
        for (double gamma_db : {0.0, 10.0}) {
            const double gamma = std::pow(10.0, gamma_db / 10.0);
            const double p =
                conditional_error(gamma, 0.8, 0.5, w_sk, w_sd, w_kd, Modulation::Bpsk);
            const long symbols = 200000;
            Rng rng = Rng::substream(5004, static_cast<std::uint64_t>(fixture), 0);
            const double rate =
                symbol_error_rate_mc(gamma, 0.8, 0.5, w_sk, w_sd, w_kd, symbols, rng);
            const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / symbols);
            CHECK(std::abs(rate - p) <= 3.5 * se);
        }
    }
}

TEST_CASE("channel draws are deterministic per stream") {
    Rng a = Rng::substream(5005, 7, kChannelSalt);
    Rng b = Rng::substream(5005, 7, kChannelSalt);
    ChannelDraw da, db;
    sample_channel_draw(8, a, da);
    sample_channel_draw(8, b, db);
    CHECK(da.omega_sd == db.omega_sd);
    CHECK(da.omega_s == db.omega_s);
    CHECK(da.omega_d == db.omega_d);
}

TEST_CASE("decisions depend only on the probed prefix") {
    const ThresholdPolicy policy = solve_thresholds(StageSchedule(6, 0.1), IndexDistribution());
    const Strategy strategy = Strategy::rs_osr(policy);
    Rng channel_rng = Rng::substream(5006, 0, 0);
    for (int trial = 0; trial < 100; ++trial) {
        ChannelDraw draw;
        sample_channel_draw(6, channel_rng, draw);
        Rng d1 = Rng::substream(5006, static_cast<std::uint64_t>(trial), 1);
        const auto pr = run_probing(strategy, 6, 1.0, 1.0, draw, d1);
        if (pr.stop_stage >= 6) continue;
        ChannelDraw permuted = draw;
        std::reverse(permuted.omega_s.begin() + pr.stop_stage, permuted.omega_s.end());
        std::reverse(permuted.omega_d.begin() + pr.stop_stage, permuted.omega_d.end());
        Rng d2 = Rng::substream(5006, static_cast<std::uint64_t>(trial), 1);
        const auto pr2 = run_probing(strategy, 6, 1.0, 1.0, permuted, d2);
        REQUIRE(pr2.stop_stage == pr.stop_stage);
        REQUIRE(pr2.chosen_relay == pr.chosen_relay);
        REQUIRE(pr2.omega_at_stop == pr.omega_at_stop);
    }
}

TEST_CASE("simulate_transmission outcome accounting") {
    SystemParams params;
    params.num_relays = 5;
    params.tau = 0.1;
    params.seed = 5007;

    SUBCASE("identical streams give identical outcomes") {
        for (int trial = 0; trial < 10; ++trial) {
            TrialStreams s1(params.seed, static_cast<std::uint64_t>(trial));
            TrialStreams s2(params.seed, static_cast<std::uint64_t>(trial));
            const auto a = simulate_transmission(params, Strategy::rs_all(), s1, 15.0);
            const auto b = simulate_transmission(params, Strategy::rs_all(), s2, 15.0);
            REQUIRE(a.stop_stage == b.stop_stage);
            REQUIRE(a.chosen_relay == b.chosen_relay);
            REQUIRE(a.efficiency == b.efficiency);
            REQUIRE(a.objective_term == b.objective_term);
            REQUIRE(a.cond_error_prob == b.cond_error_prob);
        }
    }
    SUBCASE("first-stage stop fixes the efficiency") {
        TrialStreams streams(params.seed, 0);
        const auto out = simulate_transmission(params, Strategy::fixed_stop(1), streams, 15.0);
        CHECK(out.stop_stage == 1);
        CHECK(out.efficiency == doctest::Approx(1.0 / 1.1));
        CHECK(out.chosen_relay.value() == 1);
    }
    SUBCASE("rs_all always probes every relay") {
        for (int trial = 0; trial < 20; ++trial) {
            TrialStreams streams(params.seed, static_cast<std::uint64_t>(trial));
            const auto out = simulate_transmission(params, Strategy::rs_all(), streams, 15.0);
            REQUIRE(out.stop_stage == 5);
            REQUIRE(out.cond_error_prob >= 0.0);
            REQUIRE(out.cond_error_prob <= 0.5);
            REQUIRE(!out.error.has_value());
        }
    }
    SUBCASE("symbol-level mode samples a concrete error flag") {
        params.symbol_level = true;
        int errors = 0;
        for (int trial = 0; trial < 50; ++trial) {
            TrialStreams streams(params.seed, static_cast<std::uint64_t>(trial));
            const auto out = simulate_transmission(params, Strategy::rs_all(), streams, -5.0);
            REQUIRE(out.error.has_value());
            errors += *out.error ? 1 : 0;
        }
        CHECK(errors > 0);  // at -5 dB errors are frequent
    }
}

TEST_SUITE_END();
