#include "relaysim/dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relaysim/quadrature.hpp"

namespace relaysim {

double relay_index(double w_s, double w_d, double q1, double q2) {
    if (!(q1 > 0.0) || !(q2 > 0.0)) {
        throw std::invalid_argument("relay_index: q1 and q2 must be positive");
    }
    const double denom = q1 * w_d + q2 * w_s;
    if (denom == 0.0) return 0.0;
    return 2.0 * q1 * q2 * w_s * w_d / denom;
}

IndexDistribution::IndexDistribution(double q1, double q2, double ccdf_tol)
    : q1_(q1), q2_(q2), tol_(ccdf_tol) {
    if (!(q1 > 0.0) || !(q2 > 0.0)) {
        throw std::invalid_argument("IndexDistribution: q1 and q2 must be positive");
    }
    if (!(ccdf_tol > 0.0)) {
        throw std::invalid_argument("IndexDistribution: ccdf_tol must be positive");
    }
}

double IndexDistribution::ccdf(double z) const {
    if (z <= 0.0) return 1.0;
    // Shifting the integration variable to u = x - z/(2 q2) separates the
    // exponent:  ccdf(z) = e^{-z/(2q1) - z/(2q2)} * I(a),  a = z^2/(4 q1 q2),
    //            I(a) = integral_0^inf exp(-a/u - u) du.
    // I(a) is evaluated in the log domain (u = e^s) so the small-u boundary
    // layer at small z has O(1) width on the integration axis.
    const double a = z * z / (4.0 * q1_ * q2_);
    const double prefactor = std::exp(-z / (2.0 * q1_) - z / (2.0 * q2_));
    if (prefactor == 0.0) return 0.0;
    // exp(-a/u - u) is within e^-45 of its peak only for u in [a/u_hi, u_hi].
    const double u_hi = 2.0 * std::sqrt(a) + 45.0;
    const double s_lo = std::log(a / u_hi) - 1.0;
    const double s_hi = std::log(u_hi) + 1.0;
    auto f = [a](double s) {
        const double u = std::exp(s);
        return std::exp(-a / u - u + s);
    };
    const double v = prefactor * integrate(f, s_lo, s_hi, tol_, "index ccdf");
    return std::clamp(v, 0.0, 1.0);
}

double IndexDistribution::tail_integral(double a, double b) const {
    a = std::max(a, 0.0);
    if (!(b > a)) return 0.0;
    // ccdf(z) <= exp(-r z) with r = 1/(2 q1) + 1/(2 q2); cut off where the
    // remaining mass drops below ~1e-13.
    const double rate = 0.5 / q1_ + 0.5 / q2_;
    const double cutoff = a + (31.0 + std::log1p(1.0 / rate)) / rate;
    const double hi = std::min(b, cutoff);
    if (!(hi > a)) return 0.0;
    auto f = [this](double z) { return ccdf(z); };
    return integrate(f, a, hi, tol_, "index ccdf tail integral");
}

double IndexDistribution::sample(Rng& rng) const {
    const double w_s = sample_link_gain(rng);
    const double w_d = sample_link_gain(rng);
    return relay_index(w_s, w_d, q1_, q2_);
}

double h_func(const IndexLaw& law, double x) {
    if (x < 0.0) throw std::domain_error("h_func: x must be nonnegative");
    return x + law.tail_integral(x, IndexLaw::kInf);
}

double g_func(const IndexLaw& law, double y, double resolution_tol) {
    if (!(y >= 1.0)) throw std::domain_error("g_func: y must be >= 1");
    // h(x)/x = y  <=>  tail(x) = (y - 1) x. At and near y = 1 the right side
    // is replaced by the evaluation resolution (see header).
    const double excess = std::max(y - 1.0, resolution_tol);
    auto f = [&](double x) { return law.tail_integral(x, IndexLaw::kInf) - excess * x; };

    double lo = 0.0;  // f(0) = E[w] > 0 for any nondegenerate law
    if (!(f(lo) > 0.0)) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 80) throw std::domain_error("g_func: no finite root found");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-8 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> sample_index_sorted(const IndexLaw& law, std::size_t n, Rng& rng) {
    std::vector<double> out(n);
    for (auto& v : out) v = law.sample(rng);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace relaysim
