#include "relaysim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relaysim/errors.hpp"

namespace relaysim {

double bandwidth_efficiency(int n, double tau) {
    if (n < 0) throw std::invalid_argument("bandwidth_efficiency: n must be >= 0");
    if (!(tau >= 0.0)) throw std::invalid_argument("bandwidth_efficiency: tau must be >= 0");
    return 1.0 / (1.0 + static_cast<double>(n) * tau);
}

StageSchedule::StageSchedule(int num_relays, double tau) : num_relays(num_relays), tau(tau) {
    if (num_relays < 1) throw std::invalid_argument("StageSchedule: need at least one relay");
    if (!(tau >= 0.0)) throw std::invalid_argument("StageSchedule: tau must be >= 0");
    efficiencies.reserve(static_cast<std::size_t>(num_relays));
    for (int n = 1; n <= num_relays; ++n) efficiencies.push_back(bandwidth_efficiency(n, tau));
}

double ValueGrid::operator()(double x) const {
    if (xs.empty()) return 0.0;
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back() + extrapolation_slope * (x - xs.back());
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return vs[j] + w * (vs[j + 1] - vs[j]);
}

double continuation_value(const ValueGrid& next, double x, const IndexLaw& law) {
    if (x < 0.0) throw std::domain_error("continuation_value: x must be nonnegative");
    const auto& xs = next.xs;
    const auto& vs = next.vs;
    if (xs.size() < 2) throw std::invalid_argument("continuation_value: grid not populated");
    const std::size_t last = xs.size() - 1;
    double c = next(x);
    if (x >= xs[last]) {
        return c + next.extrapolation_slope * law.tail_integral(x, IndexLaw::kInf);
    }
    std::size_t j = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) -
                                             xs.begin());
    if (j > 0) --j;
    // Partial segment holding x, then whole segments, then the linear tail.
    for (std::size_t k = j; k + 1 <= last; ++k) {
        const double slope = (vs[k + 1] - vs[k]) / (xs[k + 1] - xs[k]);
        c += slope * law.tail_integral(std::max(x, xs[k]), xs[k + 1]);
    }
    c += next.extrapolation_slope * law.tail_integral(xs[last], IndexLaw::kInf);
    return c;
}

namespace {

// Quantile of Omega_N = max of N index draws: P(Omega_N <= z) = (1 - ccdf(z))^N.
double omega_n_quantile(const IndexLaw& law, int n, double p) {
    const double target = 1.0 - std::pow(p, 1.0 / static_cast<double>(n));
    double hi = 1.0;
    int guard = 0;
    while (law.ccdf(hi) > target) {
        hi *= 2.0;
        if (++guard > 60) break;
    }
    double lo = 0.0;
    for (int it = 0; it < 100 && (hi - lo) > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (law.ccdf(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

std::vector<double> build_base_knots(const IndexLaw& law, const StageSchedule& schedule,
                                     const GridSpec& spec) {
    const int points = std::max(spec.points, 16);
    double x_knee = omega_n_quantile(law, schedule.num_relays, spec.knee_quantile);
    double x_max = omega_n_quantile(law, schedule.num_relays, spec.max_quantile);
    const auto hints = law.knot_hints();
    for (double hv : hints) x_max = std::max(x_max, hv);
    x_knee = std::min(x_knee, x_max);
    if (!(x_max > 0.0)) throw SolverError("solve_thresholds: degenerate index law", 0);
    if (!(x_knee > 0.0)) x_knee = x_max;

    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(points) + hints.size() + 8);
    const int n_uniform = points * 3 / 4;
    for (int i = 0; i < n_uniform; ++i) {
        knots.push_back(x_knee * static_cast<double>(i) / static_cast<double>(n_uniform - 1));
    }
    const int n_geo = points - n_uniform;
    if (x_max > x_knee * (1.0 + 1e-9)) {
        const double ratio = std::pow(x_max / x_knee, 1.0 / static_cast<double>(n_geo));
        double x = x_knee;
        for (int i = 1; i < n_geo; ++i) {
            x *= ratio;
            knots.push_back(x);
        }
        knots.push_back(x_max);
    }
    knots.insert(knots.end(), hints.begin(), hints.end());
    std::sort(knots.begin(), knots.end());
    const double tol = 1e-12 * std::max(1.0, x_max);
    std::vector<double> dedup;
    dedup.reserve(knots.size());
    for (double k : knots) {
        if (dedup.empty() || k - dedup.back() > tol) dedup.push_back(k);
    }
    if (dedup.front() != 0.0) dedup.insert(dedup.begin(), 0.0);
    return dedup;
}

// Grid of one stage plus the CCDF tail integrals at its knots.
struct StageData {
    std::vector<double> xs;
    std::vector<double> vs;
    std::vector<double> ti;  // ti[i] = integral_{xs[i]}^inf ccdf
    double slope_end = 0.0;  // c_n
};

// Evaluates C(x) = E[V_next(max(x, w))] against a StageData without fresh
// quadrature at knot positions: C(xs[i]) = vs[i] + suffix[i].
class ContinuationEval {
public:
    ContinuationEval(const StageData& g, const IndexLaw& law) : g_(g), law_(law) {
        const std::size_t n = g.xs.size();
        suffix_.assign(n, 0.0);
        double acc = g.slope_end * g.ti[n - 1];
        suffix_[n - 1] = acc;
        for (std::size_t i = n - 1; i-- > 0;) {
            const double slope = (g.vs[i + 1] - g.vs[i]) / (g.xs[i + 1] - g.xs[i]);
            acc += slope * (g.ti[i] - g.ti[i + 1]);
            suffix_[i] = acc;
        }
    }

    double at_knot(std::size_t i) const { return g_.vs[i] + suffix_[i]; }

    double at(double x) const {
        const auto& xs = g_.xs;
        const std::size_t last = xs.size() - 1;
        if (x >= xs[last]) {
            const double v = g_.vs[last] + g_.slope_end * (x - xs[last]);
            return v + g_.slope_end * law_.tail_integral(x, IndexLaw::kInf);
        }
        std::size_t j = static_cast<std::size_t>(
            std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        if (j > 0) --j;
        if (x == xs[j]) return at_knot(j);
        const double slope = (g_.vs[j + 1] - g_.vs[j]) / (xs[j + 1] - xs[j]);
        const double v = g_.vs[j] + slope * (x - xs[j]);
        return v + slope * law_.tail_integral(x, xs[j + 1]) + suffix_[j + 1];
    }

private:
    const StageData& g_;
    const IndexLaw& law_;
    std::vector<double> suffix_;
};

}  // namespace

ThresholdPolicy solve_thresholds(const StageSchedule& schedule, const IndexLaw& law,
                                 const GridSpec& spec) {
    const int n_relays = schedule.num_relays;
    if (n_relays < 1) throw std::invalid_argument("solve_thresholds: N must be >= 1");

    ThresholdPolicy policy;
    policy.schedule = schedule;
    if (const auto* smooth = dynamic_cast<const IndexDistribution*>(&law)) {
        policy.q1 = smooth->q1();
        policy.q2 = smooth->q2();
    }

    std::vector<double> knots = build_base_knots(law, schedule, spec);
    std::vector<double> ti(knots.size());
    const std::size_t g0 = knots.size();
    ti[g0 - 1] = law.tail_integral(knots[g0 - 1], IndexLaw::kInf);
    for (std::size_t i = g0 - 1; i-- > 0;) {
        ti[i] = ti[i + 1] + law.tail_integral(knots[i], knots[i + 1]);
    }

    const double x_top = knots.back();
    const double knot_tol = 1e-12 * std::max(1.0, x_top);

    auto make_stage = [](std::vector<double> xs, std::vector<double> vs,
                         std::vector<double> tis, double slope) {
        StageData sd;
        sd.xs = std::move(xs);
        sd.vs = std::move(vs);
        sd.ti = std::move(tis);
        sd.slope_end = slope;
        return sd;
    };

    // Stage N: V_N(x) = c_N x.
    std::vector<StageData> stages;  // stages[k] holds stage (N - k)
    stages.reserve(static_cast<std::size_t>(n_relays));  // ContinuationEval keeps a reference
    {
        const double c_last = schedule.c(n_relays);
        std::vector<double> vs(knots.size());
        for (std::size_t i = 0; i < knots.size(); ++i) vs[i] = c_last * knots[i];
        stages.push_back(make_stage(knots, std::move(vs), ti, c_last));
    }

    policy.thresholds.assign(static_cast<std::size_t>(std::max(0, n_relays - 1)), 0.0);
    policy.solve_residuals.assign(policy.thresholds.size(), 0.0);

    if (n_relays > 1 && !(schedule.tau > 0.0)) {
        throw SolverError("solve_thresholds: tau must be positive for N > 1 "
                          "(with tau == 0 stopping early is never strictly optimal and the "
                          "fixed point has no root)",
                          n_relays - 1);
    }

    for (int n = n_relays - 1; n >= 1; --n) {
        const StageData& next = stages.back();
        const ContinuationEval cont(next, law);
        const double c_n = schedule.c(n);

        // psi(x) = c_n x - C(x) is strictly increasing (C' = V' F <= c_{n+1} < c_n);
        // scan knots for the sign change, then bisect inside the segment.
        const std::size_t g = knots.size();
        std::size_t pos = g;
        for (std::size_t i = 0; i < g; ++i) {
            if (c_n * knots[i] - cont.at_knot(i) > 0.0) {
                pos = i;
                break;
            }
        }
        if (pos == g) {
            throw SolverError("solve_thresholds: psi does not change sign on the grid at stage " +
                                  std::to_string(n) + " (grid too short?)",
                              n);
        }

        double t_n = 0.0;
        if (pos > 0) {
            double lo = knots[pos - 1], hi = knots[pos];
            const double tol_x = 1e-8 * x_top;
            for (int it = 0; it < 200 && (hi - lo) > tol_x; ++it) {
                const double mid = 0.5 * (lo + hi);
                (c_n * mid - cont.at(mid) > 0.0 ? hi : lo) = mid;
            }
            t_n = 0.5 * (lo + hi);
        }
        const double cont_at_t = cont.at(t_n);
        const double stop_at_t = c_n * t_n;
        policy.thresholds[static_cast<std::size_t>(n - 1)] = t_n;
        policy.solve_residuals[static_cast<std::size_t>(n - 1)] =
            std::abs(stop_at_t - cont_at_t) / std::max(std::abs(stop_at_t), 1e-300);

        // Values of V_n at the current knots (computed against the next
        // stage before the threshold knot is spliced in).
        std::vector<double> vs(g);
        for (std::size_t i = 0; i < g; ++i) {
            vs[i] = std::max(c_n * knots[i], cont.at_knot(i));
        }

        // Insert t_n as a knot so stage n-1 integrates across the kink exactly.
        const auto it = std::lower_bound(knots.begin(), knots.end(), t_n);
        const std::size_t ins = static_cast<std::size_t>(it - knots.begin());
        const bool duplicate = (ins < g && knots[ins] - t_n <= knot_tol) ||
                               (ins > 0 && t_n - knots[ins - 1] <= knot_tol);
        if (!duplicate) {
            const double ti_t = ti[ins] + law.tail_integral(t_n, knots[ins]);
            knots.insert(knots.begin() + static_cast<std::ptrdiff_t>(ins), t_n);
            ti.insert(ti.begin() + static_cast<std::ptrdiff_t>(ins), ti_t);
            vs.insert(vs.begin() + static_cast<std::ptrdiff_t>(ins),
                      std::max(stop_at_t, cont_at_t));
        }
        stages.push_back(make_stage(knots, std::move(vs), ti, c_n));
    }

    // stages currently runs N, N-1, ..., 1; export as stages 1..N.
    policy.value_grids.resize(static_cast<std::size_t>(n_relays));
    for (int n = 1; n <= n_relays; ++n) {
        StageData& sd = stages[static_cast<std::size_t>(n_relays - n)];
        ValueGrid& vg = policy.value_grids[static_cast<std::size_t>(n - 1)];
        vg.stage = n;
        vg.xs = std::move(sd.xs);
        vg.vs = std::move(sd.vs);
        vg.extrapolation_slope = sd.slope_end;
    }
    return policy;
}

double policy_value(const ThresholdPolicy& policy, const IndexLaw& law) {
    return continuation_value(policy.value_grids.front(), 0.0, law);
}

double fixed_point_residual(const ThresholdPolicy& policy, const IndexLaw& law, int n) {
    const int n_relays = policy.schedule.num_relays;
    if (n < 1 || n >= n_relays) throw std::invalid_argument("fixed_point_residual: bad stage");
    const double t_n = policy.thresholds[static_cast<std::size_t>(n - 1)];
    const double stop = policy.schedule.c(n) * t_n;
    const double cont =
        continuation_value(policy.value_grids[static_cast<std::size_t>(n)], t_n, law);
    return std::abs(stop - cont) / std::max(std::abs(stop), 1e-300);
}

Decision decide(const ThresholdPolicy& policy, int stage, double omega_max, int argmax_stage,
                double omega_sd) {
    const int n_relays = policy.schedule.num_relays;
    if (stage < 1 || stage > n_relays) {
        throw std::invalid_argument("decide: stage out of range");
    }
    if (argmax_stage < 1 || argmax_stage > stage) {
        throw std::invalid_argument("decide: argmax stage out of range");
    }
    if (stage < n_relays) {
        // Stop iff the information state clears the stage threshold. The
        // thresholds live in state space (the fixed point c_n t_n =
        // E[V_{n+1}(max(t_n, w))] and the branch V_n(x) = c_n x for x >= t_n
        // both normalize them there), so the comparison is Omega_n >= t_n;
        // equivalently c_n Omega_n >= c_n t_n. Ties stop.
        const double t_n = policy.thresholds[static_cast<std::size_t>(stage - 1)];
        if (omega_max >= t_n) return {Action::StopWithRelay, argmax_stage};
        return {Action::Continue, 0};
    }
    if (omega_max >= omega_sd) return {Action::StopWithRelay, argmax_stage};
    return {Action::StopNoRelay, 0};
}

StoppingTimeBound stopping_time_bound(const IndexLaw& law) {
    StoppingTimeBound out{};
    out.t_star = g_func(law, 1.0);
    out.epsilon = law.ccdf(out.t_star);
    if (!(out.epsilon > 0.0)) {
        throw SolverError("stopping_time_bound: P(w > t*) underflowed to zero; "
                          "the (1-eps)/eps bound is unbounded at this resolution",
                          0);
    }
    out.bound = (1.0 - out.epsilon) / out.epsilon;
    return out;
}

bool value_upper_bound_check(const ThresholdPolicy& policy, const IndexLaw& law, int n, double x,
                             Rng& rng, int replicates) {
    const int n_relays = policy.schedule.num_relays;
    if (n < 1 || n > n_relays) throw std::invalid_argument("value_upper_bound_check: bad stage");
    const double lhs = policy.value_grids[static_cast<std::size_t>(n - 1)](x);
    const double c_n = policy.schedule.c(n);
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < replicates; ++r) {
        double m = x;
        for (int k = n; k < n_relays; ++k) m = std::max(m, law.sample(rng));
        const double v = c_n * m;
        sum += v;
        sumsq += v * v;
    }
    const double nn = static_cast<double>(replicates);
    const double mean = sum / nn;
    const double var = std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0));
    const double se = std::sqrt(var / nn);
    return lhs <= mean + 3.0 * se + 1e-12 * std::max(1.0, mean);
}

}  // namespace relaysim
