#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "relaysim/errors.hpp"
#include "relaysim/policy.hpp"
#include "relaysim/policy_io.hpp"

using namespace relaysim;

namespace {

const IndexDistribution& unit_law() {
    static const IndexDistribution law;
    return law;
}

// Policies are reused across cases; solving is the expensive part.
const ThresholdPolicy& solved(int n, double tau) {
    static std::map<std::pair<int, int>, ThresholdPolicy> cache;
    const auto key = std::make_pair(n, static_cast<int>(std::lround(tau * 1000)));
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, solve_thresholds(StageSchedule(n, tau), unit_law())).first;
    }
    return it->second;
}

// Exact objective value of an arbitrary nondecreasing threshold rule,
// derived from survival products and censored means of the index law. Fully
// independent of the grid solver; used to certify its output.
double eval_threshold_policy(const std::vector<double>& t, const StageSchedule& sched,
                             const IndexLaw& law) {
    const int n_relays = sched.num_relays;
    double value = 0.0, surv = 1.0;
    for (int n = 1; n < n_relays; ++n) {
        const double tn = t[static_cast<std::size_t>(n - 1)];
        const double mean_above = tn * law.ccdf(tn) + law.tail_integral(tn, IndexLaw::kInf);
        value += sched.c(n) * surv * mean_above;
        surv *= law.cdf(tn);
    }
    // Stage N: E[max(Omega_{N-1}, w_N) | survived], with the survivors'
    // running max distributed as prod_i F(min(x, t_i)) / F(t_i).
    const double hi = 50.0;
    const int cells = 20000;
    std::vector<double> f_at_t(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) f_at_t[i] = law.cdf(t[i]);
    double tail_mean = 0.0;
    for (int j = 0; j < cells; ++j) {
        const double x = (j + 0.5) * hi / cells;
        double prod = law.cdf(x);
        for (std::size_t i = 0; i < t.size(); ++i) {
            prod *= std::min(law.cdf(std::min(x, t[i])), f_at_t[i]) / f_at_t[i];
        }
        tail_mean += (1.0 - prod) * hi / cells;
    }
    return value + sched.c(n_relays) * surv * tail_mean;
}

}  // namespace

TEST_SUITE_BEGIN("policy");

TEST_CASE("bandwidth efficiency closed form") {
    CHECK(bandwidth_efficiency(0, 0.05) == 1.0);
    CHECK(bandwidth_efficiency(10, 0.05) == doctest::Approx(1.0 / 1.5));
    CHECK(bandwidth_efficiency(1, 0.1) == doctest::Approx(1.0 / 1.1));
    CHECK_THROWS_AS(bandwidth_efficiency(-1, 0.1), std::invalid_argument);
}

TEST_CASE("stage schedule efficiency ratios decrease toward 1") {
    const StageSchedule sched(10, 0.07);
    double prev_ratio = 1e300;
    for (int n = 1; n < 10; ++n) {
        CHECK(sched.c(n) > sched.c(n + 1));
        CHECK(sched.c(n) > 0.0);
        CHECK(sched.c(n) < 1.0);
        const double ratio = sched.c(n) / sched.c(n + 1);
        CHECK(ratio > 1.0);
        CHECK(ratio < prev_ratio);
        prev_ratio = ratio;
    }
}

TEST_CASE("value grid interpolation and extrapolation") {
    ValueGrid g;
    g.stage = 1;
    g.xs = {0.0, 1.0, 2.0};
    g.vs = {0.5, 1.0, 3.0};
    g.extrapolation_slope = 2.5;
    CHECK(g(0.0) == 0.5);
    CHECK(g(0.5) == doctest::Approx(0.75));
    CHECK(g(1.5) == doctest::Approx(2.0));
    CHECK(g(3.0) == doctest::Approx(3.0 + 2.5));
}

TEST_CASE("continuation against a linear final stage equals c_N h(x)") {
    const auto& law = unit_law();
    const double c2 = bandwidth_efficiency(2, 0.1);
    ValueGrid final_stage;
    final_stage.stage = 2;
    final_stage.extrapolation_slope = c2;
    for (double x = 0.0; x <= 12.0 + 1e-9; x += 0.05) {
        final_stage.xs.push_back(x);
        final_stage.vs.push_back(c2 * x);
    }
    for (double x : {0.0, 0.37, 1.7, 5.0}) {
        CHECK(continuation_value(final_stage, x, law) ==
              doctest::Approx(c2 * h_func(law, x)).epsilon(1e-7));
    }
    // Far beyond the grid the state dominates: C(x) ~ c_{n+1} x.
    const double far = 30.0;
    CHECK(continuation_value(final_stage, far, law) / (c2 * far) ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("continuation at zero equals E[V(w)] (Monte Carlo)") {
    const auto& law = unit_law();
    const auto& policy = solved(3, 0.1);
    const ValueGrid& v2 = policy.value_grids[1];
    Rng rng = Rng::substream(2001, 0, 0);
    const long n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
        const double v = v2(law.sample(rng));
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(continuation_value(v2, 0.0, law) - mean) <= 3.0 * se);
}

TEST_CASE("two-stage threshold equals g(c1/c2)") {
    const auto& law = unit_law();
    const auto& policy = solved(2, 0.1);
    REQUIRE(policy.thresholds.size() == 1);
    const double expected = g_func(law, (1.0 / 1.1) / (1.0 / 1.2));  // c1/c2 = 12/11
    CHECK(policy.thresholds[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(policy.solve_residuals[0] <= 1e-3);
}

TEST_CASE("single-relay horizon has no thresholds") {
    const auto& policy = solved(1, 0.1);
    CHECK(policy.thresholds.empty());
    CHECK(policy.solve_residuals.empty());
    REQUIRE(policy.value_grids.size() == 1);
    const auto& g = policy.value_grids[0];
    for (std::size_t j = 0; j < g.xs.size(); ++j) {
        CHECK(g.vs[j] == doctest::Approx(bandwidth_efficiency(1, 0.1) * g.xs[j]));
    }
}

TEST_CASE("fixed points, ordering and t* across horizons") {
    const auto& law = unit_law();
    const double t_star = stopping_time_bound(law).t_star;
    for (double tau : {0.05, 0.1}) {
        for (int n : {2, 5, 10, 50}) {
            const auto& policy = solved(n, tau);
            CAPTURE(n);
            CAPTURE(tau);
            const double t_last = policy.thresholds.back();
            for (int k = 1; k < n; ++k) {
                REQUIRE(fixed_point_residual(policy, law, k) <= 1e-3);
                REQUIRE(policy.thresholds[static_cast<std::size_t>(k - 1)] <=
                        t_last * (1.0 + 1e-9));
            }
            REQUIRE(t_last < t_star);
        }
    }
}

TEST_CASE("value grids are monotone, convex and dominate the stop reward") {
    for (double tau : {0.05, 0.1}) {
        const auto& policy = solved(10, tau);
        for (const auto& g : policy.value_grids) {
            const double tol = 1e-6 * g.vs.back();
            const double c_n = policy.schedule.c(g.stage);
            double prev_slope = -1e300;
            for (std::size_t j = 0; j < g.xs.size(); ++j) {
                if (j > 0) {
                    REQUIRE(g.vs[j] >= g.vs[j - 1]);
                    const double dx = g.xs[j] - g.xs[j - 1];
                    const double slope = (g.vs[j] - g.vs[j - 1]) / dx;
                    REQUIRE(slope >= prev_slope - tol / dx);
                    prev_slope = slope;
                }
                REQUIRE(g.vs[j] >= c_n * g.xs[j] - tol);
            }
        }
        // Midpoint convexity on the uniform sub-grid.
        const auto& g1 = policy.value_grids.front();
        const double tol = 1e-6 * g1.vs.back();
        for (std::size_t j = 1; j + 1 < g1.xs.size(); ++j) {
            const double dl = g1.xs[j] - g1.xs[j - 1];
            const double dr = g1.xs[j + 1] - g1.xs[j];
            if (std::abs(dl - dr) > 1e-9 * dl) continue;
            REQUIRE(g1.vs[j] <= 0.5 * (g1.vs[j - 1] + g1.vs[j + 1]) + tol);
        }
    }
}

TEST_CASE("stop branch and continue branch match the stored values") {
    const auto& law = unit_law();
    const auto& policy = solved(5, 0.1);
    for (int n = 1; n < 5; ++n) {
        const auto& g = policy.value_grids[static_cast<std::size_t>(n - 1)];
        const double t_n = policy.thresholds[static_cast<std::size_t>(n - 1)];
        const double c_n = policy.schedule.c(n);
        const auto& next = policy.value_grids[static_cast<std::size_t>(n)];
        const double tol = 1e-7 * g.vs.back();
        for (std::size_t j = 0; j < g.xs.size(); j += 97) {
            const double x = g.xs[j];
            if (x >= t_n) {
                REQUIRE(std::abs(g.vs[j] - c_n * x) <= tol);
            } else {
                REQUIRE(std::abs(g.vs[j] - continuation_value(next, x, law)) <= tol);
            }
        }
    }
}

TEST_CASE("solved thresholds maximize the exact policy objective") {
    const auto& law = unit_law();
    const StageSchedule sched(10, 0.1);
    const auto& policy = solved(10, 0.1);
    const double best = eval_threshold_policy(policy.thresholds, sched, law);
    CHECK(best == doctest::Approx(policy_value(policy, law)).epsilon(1e-5));

    auto lower_first = policy.thresholds;
    lower_first[0] *= 0.9;
    CHECK(eval_threshold_policy(lower_first, sched, law) <= best + 1e-7);

    auto raise_last = policy.thresholds;
    raise_last.back() *= 1.1;
    CHECK(eval_threshold_policy(raise_last, sched, law) <= best + 1e-7);
}

TEST_CASE("closed-form candidates lower-bound the solved thresholds") {
    // g(c_n/c_{n+1}) is the fixed point of the one-step-lookahead rule; the
    // true continuation dominates the one-step value, so solved t_n >= it,
    // with equality at the last stage where lookahead is exact.
    const auto& law = unit_law();
    const auto& policy = solved(10, 0.1);
    const double tol = 1e-6 * policy.value_grids.front().xs.back();
    for (int n = 1; n < 10; ++n) {
        const double candidate = g_func(law, policy.schedule.c(n) / policy.schedule.c(n + 1));
        const double t_n = policy.thresholds[static_cast<std::size_t>(n - 1)];
        CHECK(t_n >= candidate - tol);
        if (n == 9) CHECK(t_n == doctest::Approx(candidate).epsilon(1e-5));
    }
}

TEST_CASE("decision rule boundaries") {
    const auto& policy = solved(5, 0.1);
    const double t1 = policy.thresholds[0];

    SUBCASE("tie at the threshold stops") {
        const auto d = decide(policy, 1, t1, 1, 0.3);
        CHECK(d.action == Action::StopWithRelay);
        CHECK(d.relay_stage == 1);
    }
    SUBCASE("the scaled-threshold state from the stopping-rule notation stops too") {
        const auto d = decide(policy, 1, t1 / policy.schedule.c(1), 1, 0.3);
        CHECK(d.action == Action::StopWithRelay);
    }
    SUBCASE("zero state continues before the final stage") {
        CHECK(decide(policy, 1, 0.0, 1, 0.3).action == Action::Continue);
        CHECK(decide(policy, 4, 0.0, 2, 0.3).action == Action::Continue);
    }
    SUBCASE("final stage compares against the direct link, ties pick the relay") {
        CHECK(decide(policy, 5, 0.0, 1, 0.0).action == Action::StopWithRelay);
        CHECK(decide(policy, 5, 0.5, 3, 0.4).action == Action::StopWithRelay);
        CHECK(decide(policy, 5, 0.5, 3, 0.6).action == Action::StopNoRelay);
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(decide(policy, 0, 1.0, 1, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(decide(policy, 6, 1.0, 1, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(decide(policy, 2, 1.0, 3, 0.0), std::invalid_argument);
    }
}

TEST_CASE("stopping-time bound is horizon-free with epsilon in (0,1)") {
    const auto& law = unit_law();
    const auto bound = stopping_time_bound(law);
    CHECK(bound.epsilon > 0.0);
    CHECK(bound.epsilon < 1.0);
    CHECK(bound.bound > 0.0);
    const auto again = stopping_time_bound(law);
    CHECK(bound.t_star == again.t_star);
    CHECK(bound.bound == again.bound);
}

TEST_CASE("conditional-mean upper bound on the value function") {
    const auto& law = unit_law();
    const auto& policy = solved(5, 0.1);
    Rng rng = Rng::substream(2002, 0, 0);
    const double t_star = stopping_time_bound(law).t_star;
    CHECK(value_upper_bound_check(policy, law, 5, 1.7, rng));  // equality at stage N
    CHECK(value_upper_bound_check(policy, law, 1, 0.0, rng));
    CHECK(value_upper_bound_check(policy, law, 4, 2.0 * t_star, rng));
}

TEST_CASE("policy JSON round-trips thresholds bit-exactly") {
    const auto& policy = solved(5, 0.1);
    std::stringstream buf;
    save_policy(policy, buf);
    const ThresholdPolicy loaded = load_policy(buf);
    CHECK(loaded.schedule.num_relays == 5);
    CHECK(loaded.schedule.tau == policy.schedule.tau);
    CHECK(loaded.q1 == policy.q1);
    REQUIRE(loaded.thresholds.size() == policy.thresholds.size());
    for (std::size_t i = 0; i < policy.thresholds.size(); ++i) {
        CHECK(loaded.thresholds[i] == policy.thresholds[i]);  // bitwise
    }
    REQUIRE(loaded.value_grids.size() == policy.value_grids.size());
    for (std::size_t g = 0; g < policy.value_grids.size(); ++g) {
        CHECK(loaded.value_grids[g].xs == policy.value_grids[g].xs);
        CHECK(loaded.value_grids[g].vs == policy.value_grids[g].vs);
    }
}

TEST_CASE("tampered thresholds fail the recomputed fixed point") {
    const auto& law = unit_law();
    ThresholdPolicy tampered = solved(5, 0.1);
    tampered.thresholds[0] *= 2.0;
    CHECK(fixed_point_residual(tampered, law, 1) > 1e-3);
}

TEST_CASE("malformed policy documents are rejected") {
    std::stringstream buf("{\"format\":\"relaysim-policy-v1\",\"n_relays\":3,\"tau\":0.1,"
                          "\"q1\":1,\"q2\":1,\"thresholds\":[0.5],\"residuals\":[],"
                          "\"grids\":[]}");
    CHECK_THROWS(load_policy(buf));
}

TEST_CASE("zero probing cost has no fixed point") {
    CHECK_THROWS_AS(solve_thresholds(StageSchedule(3, 0.0), unit_law()), SolverError);
}

TEST_SUITE_END();
