#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "relaysim/dist.hpp"
#include "relaysim/errors.hpp"

using namespace relaysim;

TEST_SUITE_BEGIN("dist");

TEST_CASE("link gain inverse-CDF boundary values") {
    CHECK(link_gain_from_uniform(1.0) == 0.0);
    CHECK(link_gain_from_uniform(std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("link gain sample mean matches Exponential(1)") {
    Rng rng = Rng::substream(1001, 0, 0);
    const long n = 1000000;
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += sample_link_gain(rng);
    CHECK(std::abs(sum / n - 1.0) < 0.005);
}

TEST_CASE("relay index closed-form points") {
    CHECK(relay_index(1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(relay_index(0.0, 5.0, 1.0, 1.0) == 0.0);
    CHECK(relay_index(1.0, 1.0, 1.0, 2.0) == doctest::Approx(4.0 / 3.0));
    CHECK(relay_index(0.0, 0.0, 1.0, 1.0) == 0.0);  // 0/0 corner
    CHECK_THROWS_AS(relay_index(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("relay index bounded by twice either scaled hop gain") {
    Rng rng = Rng::substream(1002, 0, 0);
    const double q1 = 0.7, q2 = 1.9;
    for (int i = 0; i < 100000; ++i) {
        const double w_s = sample_link_gain(rng);
        const double w_d = sample_link_gain(rng);
        const double w = relay_index(w_s, w_d, q1, q2);
        REQUIRE(w >= 0.0);
        REQUIRE(w <= 2.0 * q2 * w_s + 1e-12);
        REQUIRE(w <= 2.0 * q1 * w_d + 1e-12);
    }
}

TEST_CASE("index ccdf boundary, tail and monotonicity") {
    IndexDistribution law;
    CHECK(law.ccdf(0.0) == 1.0);
    CHECK(law.ccdf(1e6) < 1e-6);
    double prev = 1.0;
    for (double z = 0.05; z < 20.0; z += 0.05) {
        const double c = law.ccdf(z);
        CHECK(c <= prev + 1e-12);
        prev = c;
    }
}

TEST_CASE("index ccdf matches Monte Carlo at z = 1") {
    IndexDistribution law;
    Rng rng = Rng::substream(1003, 0, 0);
    const long n = 10000000;
    long hits = 0;
    for (long i = 0; i < n; ++i) {
        if (law.sample(rng) > 1.0) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(n);
    const double p = law.ccdf(1.0);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(p_hat - p) <= 3.0 * se);
}

TEST_CASE("empirical CDF matches 1 - ccdf on a grid (Kolmogorov-Smirnov 99%)") {
    IndexDistribution law(1.3, 0.8);
    Rng rng = Rng::substream(1004, 0, 0);
    const std::size_t n = 1000000;
    const auto samples = sample_index_sorted(law, n, rng);
    const double ks_bound = 1.628 / std::sqrt(static_cast<double>(n));
    for (int k = 1; k <= 50; ++k) {
        const double z = samples[n * static_cast<std::size_t>(k) / 51];
        const auto it = std::upper_bound(samples.begin(), samples.end(), z);
        const double f_emp =
            static_cast<double>(it - samples.begin()) / static_cast<double>(n);
        REQUIRE(std::abs(f_emp - law.cdf(z)) <= ks_bound + 1e-9);
    }
}

TEST_CASE("h at zero is the index mean (Monte Carlo cross-check)") {
    IndexDistribution law;
    CHECK(h_func(law, 0.0) == doctest::Approx(law.mean()).epsilon(1e-9));
    Rng rng = Rng::substream(1005, 0, 0);
    const long n = 10000000;
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
        const double w = law.sample(rng);
        sum += w;
        sumsq += w * w;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(h_func(law, 0.0) - mean) <= 3.0 * se);
}

TEST_CASE("h is convex nondecreasing with slope equal to the CDF") {
    IndexDistribution law;
    const double h0 = h_func(law, 0.0);
    double prev_slope = -1.0;
    for (double x = 0.0; x < 6.0; x += 0.25) {
        const double hx = h_func(law, x);
        CHECK(hx >= x);
        CHECK(hx >= h0 - 1e-9);
        const double slope = (h_func(law, x + 0.25) - hx) / 0.25;
        CHECK(slope >= law.cdf(x) - 1e-6);
        CHECK(slope <= law.cdf(x + 0.25) + 1e-6);
        CHECK(slope >= prev_slope - 1e-9);
        prev_slope = slope;
    }
}

TEST_CASE("h(x)/x is strictly decreasing and tends to 1") {
    IndexDistribution law;
    double prev = 1e300;
    for (double x : {0.1, 0.3, 0.8, 1.5, 3.0, 6.0, 12.0}) {
        const double ratio = h_func(law, x) / x;
        CHECK(ratio < prev);
        CHECK(ratio > 1.0);
        prev = ratio;
    }
    CHECK(h_func(law, 40.0) / 40.0 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("g inverts h(x)/x") {
    IndexDistribution law;
    for (double y : {1.01, 1.1, 1.5}) {
        const double x = g_func(law, y);
        CHECK(h_func(law, x) / x == doctest::Approx(y).epsilon(1e-6));
    }
    CHECK(g_func(law, 1.5) < g_func(law, 1.1));
    CHECK(g_func(law, 1.1) < g_func(law, 1.01));
    CHECK_THROWS_AS(g_func(law, 0.9), std::domain_error);

    // g(1) is the resolution-limited point where the excess tail mass falls
    // below the law's tolerance; it must be finite, positive and above g(y)
    // for every y > 1.
    const double t_star = g_func(law, 1.0);
    CHECK(t_star > g_func(law, 1.01));
    CHECK(std::isfinite(t_star));
    CHECK(law.ccdf(t_star) > 0.0);
}

TEST_CASE("quadrature failure reports the achieved residual") {
    IndexDistribution law(1.0, 1.0, 1e-30);  // unattainable tolerance
    try {
        (void)law.ccdf(1.0);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(e.residual > 0.0);
    }
}

TEST_SUITE_END();
