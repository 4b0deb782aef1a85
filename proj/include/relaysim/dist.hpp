#pragma once

#include <limits>
#include <vector>

#include "relaysim/rng.hpp"

namespace relaysim {

/// Inverse-CDF transform for a unit-mean exponential link gain |h|^2.
inline double link_gain_from_uniform(double u) { return -std::log(u); }

/// One Rayleigh-fading link gain: Exponential(1) (squared magnitude of a
/// unit-variance complex Gaussian coefficient).
inline double sample_link_gain(Rng& rng) { return link_gain_from_uniform(rng.uniform01()); }

/// Relay quality index combining the two hop gains,
///   w = 2*q1*q2*w_s*w_d / (q1*w_d + q2*w_s),
/// with the 0/0 corner resolved to 0 (the limit along either axis).
/// Always satisfies w <= 2*q2*w_s and w <= 2*q1*w_d.
double relay_index(double w_s, double w_d, double q1, double q2);

/// Distribution of the relay index, seen through its CCDF and integrals of
/// the CCDF. Everything the threshold solver needs is expressible this way:
///   E[max(x, w)] = x + integral_x^inf ccdf(t) dt.
class IndexLaw {
public:
    virtual ~IndexLaw() = default;

    /// P(w > z) for z >= 0.
    virtual double ccdf(double z) const = 0;

    /// integral_a^b ccdf(t) dt; b may be +infinity.
    virtual double tail_integral(double a, double b) const = 0;

    /// E[w] = integral_0^inf ccdf.
    virtual double mean() const { return tail_integral(0.0, kInf); }

    virtual double sample(Rng& rng) const = 0;

    /// Abscissae the solver grid should include exactly (e.g. atoms of a
    /// discrete law). Empty for smooth laws.
    virtual std::vector<double> knot_hints() const { return {}; }

    double cdf(double z) const { return 1.0 - ccdf(z); }

    static constexpr double kInf = std::numeric_limits<double>::infinity();
};

/// The index law induced by two independent Exponential(1) hop gains.
///
/// Conditioning on the source-relay gain X = x, the index exceeds z iff the
/// relay-destination gain exceeds q2*x*z / (q1*(2*q2*x - z)), which is
/// possible only for x > z/(2*q2). Hence
///   ccdf(z) = integral_{z/(2 q2)}^inf exp(-q2 x z / (q1 (2 q2 x - z))) e^-x dx,
/// evaluated by adaptive quadrature; the grid/threshold machinery consumes
/// this rather than Monte Carlo so the solved expectations are smooth.
class IndexDistribution final : public IndexLaw {
public:
    explicit IndexDistribution(double q1 = 1.0, double q2 = 1.0, double ccdf_tol = 1e-9);

    double ccdf(double z) const override;
    double tail_integral(double a, double b) const override;
    double sample(Rng& rng) const override;

    double q1() const { return q1_; }
    double q2() const { return q2_; }
    double ccdf_tol() const { return tol_; }

private:
    double q1_;
    double q2_;
    double tol_;
};

/// h(x) = E[max(x, w)] = x + integral_x^inf ccdf.
double h_func(const IndexLaw& law, double x);

/// Inverse of the strictly decreasing map x -> h(x)/x, by bisection to
/// relative tolerance 1e-8. Requires y >= 1.
///
/// For y = 1 the exact equation h(x)/x = 1 has no finite root when the index
/// has unbounded support (h(x) > x always); the returned point is where the
/// excess tail mass drops below the law's evaluation tolerance, i.e. where
/// h(x)/x is indistinguishable from 1 at that resolution. Downstream this
/// keeps the stopping-time bound finite and still valid as an upper bound.
double g_func(const IndexLaw& law, double y, double resolution_tol = 1e-9);

/// n index samples, sorted ascending (empirical-CDF cross checks).
std::vector<double> sample_index_sorted(const IndexLaw& law, std::size_t n, Rng& rng);

}  // namespace relaysim
