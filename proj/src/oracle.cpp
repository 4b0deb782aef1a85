#include "relaysim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relaysim {
namespace oracle {

DiscreteIndexDist::DiscreteIndexDist(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.empty() || support_.size() != probs_.size()) {
        throw std::invalid_argument("DiscreteIndexDist: support/probs size mismatch");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < support_.size(); ++j) {
        if (support_[j] < 0.0) throw std::invalid_argument("DiscreteIndexDist: negative support");
        if (j > 0 && !(support_[j] > support_[j - 1])) {
            throw std::invalid_argument("DiscreteIndexDist: support must be strictly increasing");
        }
        if (probs_[j] < 0.0) throw std::invalid_argument("DiscreteIndexDist: negative probability");
        total += probs_[j];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("DiscreteIndexDist: probabilities must sum to 1");
    }
    cum_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < probs_.size(); ++j) {
        acc += probs_[j];
        cum_[j] = acc;
    }
    cum_.back() = 1.0;
}

double DiscreteIndexDist::ccdf(double z) const {
    // Right-continuous step: P(w > z).
    double p = 0.0;
    for (std::size_t j = support_.size(); j-- > 0 && support_[j] > z;) p += probs_[j];
    return p;
}

double DiscreteIndexDist::tail_integral(double a, double b) const {
    a = std::max(a, 0.0);
    if (!(b > a)) return 0.0;
    // ccdf is constant between atoms; integrate segment by segment.
    double acc = 0.0;
    double t = a;
    for (std::size_t j = 0; j < support_.size(); ++j) {
        const double s = support_[j];
        if (s <= t) continue;
        if (s >= b) break;
        acc += ccdf(t) * (s - t);
        t = s;
    }
    if (b > support_.back()) {
        acc += ccdf(t) * (support_.back() > t ? support_.back() - t : 0.0);
    } else {
        acc += ccdf(t) * (b - t);
    }
    return acc;
}

double DiscreteIndexDist::mean() const {
    double m = 0.0;
    for (std::size_t j = 0; j < support_.size(); ++j) m += support_[j] * probs_[j];
    return m;
}

double DiscreteIndexDist::sample(Rng& rng) const {
    const double u = rng.uniform01();
    for (std::size_t j = 0; j < cum_.size(); ++j) {
        if (u <= cum_[j]) return support_[j];
    }
    return support_.back();
}

ExactDpResult exact_dp_value(const StageSchedule& schedule, const DiscreteIndexDist& dist) {
    const int n_relays = schedule.num_relays;
    const std::size_t s = dist.support().size();
    if (n_relays > 8 || s > 8) {
        throw std::invalid_argument("exact_dp_value: state space guard (N <= 8, support <= 8)");
    }
    const auto& sup = dist.support();
    const auto& probs = dist.probs();

    std::vector<long double> cum(s);
    {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < s; ++j) {
            acc += probs[j];
            cum[j] = acc;
        }
    }

    ExactDpResult out;
    out.values.assign(static_cast<std::size_t>(n_relays), std::vector<double>(s, 0.0));
    std::vector<long double> v_next(s), v_cur(s);
    for (std::size_t j = 0; j < s; ++j) {
        v_next[j] = static_cast<long double>(schedule.c(n_relays)) * sup[j];
        out.values[static_cast<std::size_t>(n_relays - 1)][j] = static_cast<double>(v_next[j]);
    }
    for (int n = n_relays - 1; n >= 1; --n) {
        const long double c_n = schedule.c(n);
        // suffix[j] = sum_{i > j} p_i V_{n+1}(s_i)
        long double suffix = 0.0L;
        std::vector<long double> tail(s, 0.0L);
        for (std::size_t j = s; j-- > 0;) {
            tail[j] = suffix;
            suffix += static_cast<long double>(probs[j]) * v_next[j];
        }
        for (std::size_t j = 0; j < s; ++j) {
            const long double cont = v_next[j] * cum[j] + tail[j];
            v_cur[j] = std::max(c_n * sup[j], cont);
            out.values[static_cast<std::size_t>(n - 1)][j] = static_cast<double>(v_cur[j]);
        }
        std::swap(v_cur, v_next);
    }
    long double opt = 0.0L;
    for (std::size_t j = 0; j < s; ++j) opt += static_cast<long double>(probs[j]) * v_next[j];
    out.optimal_value = static_cast<double>(opt);
    return out;
}

namespace {

// Exact expected reward of one stopping rule, stop sets given as bitmasks
// per stage (bit j = stop in state support[j]); stage N always stops.
long double evaluate_rule(const StageSchedule& schedule, const DiscreteIndexDist& dist,
                          const std::vector<unsigned>& stop_masks) {
    const auto& sup = dist.support();
    const auto& probs = dist.probs();
    const std::size_t s = sup.size();
    const int n_relays = schedule.num_relays;

    std::vector<long double> mass(s);  // still-probing mass by current max state
    for (std::size_t j = 0; j < s; ++j) mass[j] = probs[j];

    long double value = 0.0L;
    for (int n = 1; n <= n_relays; ++n) {
        const long double c_n = schedule.c(n);
        if (n == n_relays) {
            for (std::size_t j = 0; j < s; ++j) value += mass[j] * c_n * sup[j];
            break;
        }
        const unsigned mask = stop_masks[static_cast<std::size_t>(n - 1)];
        for (std::size_t j = 0; j < s; ++j) {
            if (mask & (1u << j)) {
                value += mass[j] * c_n * sup[j];
                mass[j] = 0.0L;
            }
        }
        // Omega_{n+1} = max(Omega_n, w): m'_j = m_j P(w <= s_j) + p_j sum_{i<j} m_i
        long double prefix = 0.0L;
        long double cum = 0.0L;
        for (std::size_t j = 0; j < s; ++j) {
            cum += probs[j];
            const long double mj = mass[j];
            mass[j] = mj * cum + static_cast<long double>(probs[j]) * prefix;
            prefix += mj;
        }
    }
    return value;
}

bool is_up_set(unsigned mask, std::size_t s) {
    // Once set, stay set toward larger states.
    bool seen = false;
    for (std::size_t j = 0; j < s; ++j) {
        const bool bit = (mask >> j) & 1u;
        if (seen && !bit) return false;
        seen = seen || bit;
    }
    return true;
}

}  // namespace

PolicySearchResult exhaustive_policy_search(const StageSchedule& schedule,
                                            const DiscreteIndexDist& dist) {
    const int n_relays = schedule.num_relays;
    const std::size_t s = dist.support().size();
    if (n_relays > 5 || s > 5) {
        throw std::invalid_argument(
            "exhaustive_policy_search: enumeration guard (N <= 5, support <= 5)");
    }
    const int free_stages = std::max(0, n_relays - 1);
    const unsigned per_stage = 1u << s;
    unsigned long long total = 1;
    for (int n = 0; n < free_stages; ++n) total *= per_stage;

    PolicySearchResult out;
    out.best_value = -1.0;
    std::vector<unsigned> masks(static_cast<std::size_t>(free_stages), 0u);
    std::vector<unsigned> best_masks = masks;

    for (unsigned long long code = 0; code < total; ++code) {
        unsigned long long rest = code;
        for (int n = 0; n < free_stages; ++n) {
            masks[static_cast<std::size_t>(n)] = static_cast<unsigned>(rest % per_stage);
            rest /= per_stage;
        }
        const double value = static_cast<double>(evaluate_rule(schedule, dist, masks));
        if (value > out.best_value) {
            out.best_value = value;
            best_masks = masks;
        }
    }

    // Among rules within rounding of the optimum, prefer a threshold (up-set)
    // one; ties are common in degenerate instances.
    const double tie_tol = 1e-12 * std::max(1.0, out.best_value);
    std::vector<unsigned> upset_masks(static_cast<std::size_t>(free_stages), 0u);
    std::vector<unsigned> upsets;
    for (unsigned m = 0; m < per_stage; ++m) {
        if (is_up_set(m, s)) upsets.push_back(m);
    }
    unsigned long long total_up = 1;
    for (int n = 0; n < free_stages; ++n) total_up *= upsets.size();
    for (unsigned long long code = 0; code < total_up && !out.threshold_rule_attains_best;
         ++code) {
        unsigned long long rest = code;
        for (int n = 0; n < free_stages; ++n) {
            upset_masks[static_cast<std::size_t>(n)] =
                upsets[static_cast<std::size_t>(rest % upsets.size())];
            rest /= upsets.size();
        }
        const double value = static_cast<double>(evaluate_rule(schedule, dist, upset_masks));
        if (value >= out.best_value - tie_tol) {
            out.threshold_rule_attains_best = true;
            best_masks = upset_masks;
        }
    }

    out.best_rule.assign(static_cast<std::size_t>(free_stages), std::vector<char>(s, 0));
    for (int n = 0; n < free_stages; ++n) {
        for (std::size_t j = 0; j < s; ++j) {
            out.best_rule[static_cast<std::size_t>(n)][j] =
                static_cast<char>((best_masks[static_cast<std::size_t>(n)] >> j) & 1u);
        }
    }
    return out;
}

}  // namespace oracle
}  // namespace relaysim
