#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covex/mdp.hpp"

namespace covex {

/// Integer visit counters T_{s,a} over state-action pairs. Counts are
/// exact; floating error enters only when converting to frequencies.
struct VisitCounts {
    int num_states = 0;
    int num_actions = 0;
    std::vector<std::int64_t> counts;
    std::int64_t total_steps = 0;

    static VisitCounts zeros(int num_states, int num_actions) {
        VisitCounts c{num_states, num_actions, {}, 0};
        c.counts.assign(static_cast<std::size_t>(num_states) * num_actions, 0);
        return c;
    }
};

/// Stationary state-action occupancy of pi: d(s,a) = psi(s) * pi(a|s).
inline std::vector<double> occupancy_of_policy(const MdpModel& m, const Policy& pi) {
    const auto psi = stationary_distribution(m, pi);
    std::vector<double> d(m.num_pairs());
    for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a) d[m.sa_index(s, a)] = psi[s] * pi.at(s, a);
    return d;
}

/// Policy extraction pi(a|s) = d(s,a) / sum_b d(s,b).
inline Policy policy_of_occupancy(int num_states, int num_actions,
                                  const std::vector<double>& d) {
    if (d.size() != static_cast<std::size_t>(num_states) * num_actions)
        throw std::invalid_argument("policy_of_occupancy: size mismatch");
    Policy pi{num_states, num_actions, std::vector<double>(d.size())};
    for (int s = 0; s < num_states; ++s) {
        double marginal = 0.0;
        for (int a = 0; a < num_actions; ++a)
            marginal += d[static_cast<std::size_t>(s) * num_actions + a];
        if (!(marginal > 0.0))
            throw std::domain_error("policy_of_occupancy: zero state marginal at s=" +
                                    std::to_string(s));
        for (int a = 0; a < num_actions; ++a)
            pi.probs[static_cast<std::size_t>(s) * num_actions + a] =
                d[static_cast<std::size_t>(s) * num_actions + a] / marginal;
    }
    return pi;
}

/// Empirical frequencies counts / total_steps. Sums to 1 up to rounding
/// but, being an estimate, need not satisfy flow balance.
inline std::vector<double> empirical_occupancy(const VisitCounts& c) {
    if (c.total_steps < 1)
        throw std::invalid_argument("empirical_occupancy: empty history (total_steps = 0)");
    std::vector<double> d(c.counts.size());
    const double t = static_cast<double>(c.total_steps);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(c.counts[i]) / t;
    return d;
}

inline void update_counts(VisitCounts& c, std::span<const std::pair<int, int>> trajectory) {
    for (const auto& [s, a] : trajectory) {
        if (s < 0 || s >= c.num_states || a < 0 || a >= c.num_actions)
            throw std::out_of_range("update_counts: index out of range");
        ++c.counts[static_cast<std::size_t>(s) * c.num_actions + a];
    }
    c.total_steps += static_cast<std::int64_t>(trajectory.size());
}

/// Convex mixture (1 - beta) * base + beta * incoming. With
/// beta = tau_k / (t_{k+1} - 1) this reproduces pooled empirical counts
/// across an episode boundary.
inline std::vector<double> mix_occupancies(const std::vector<double>& base,
                                           const std::vector<double>& incoming, double beta) {
    if (base.size() != incoming.size())
        throw std::invalid_argument("mix_occupancies: size mismatch");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("mix_occupancies: beta must be in [0,1]");
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - beta) * base[i] + beta * incoming[i];
    return out;
}

/// Max-norm flow-balance defect of d against the kernel; membership in
/// the occupancy polytope means this is ~0 and the entries sum to 1.
inline double flow_residual(const MdpModel& m, const std::vector<double>& d) {
    if (d.size() != m.num_pairs()) throw std::invalid_argument("flow_residual: size mismatch");
    double worst = 0.0;
    for (int s2 = 0; s2 < m.num_states; ++s2) {
        double out = 0.0;
        for (int a = 0; a < m.num_actions; ++a) out += d[m.sa_index(s2, a)];
        double in = 0.0;
        for (int s = 0; s < m.num_states; ++s)
            for (int a = 0; a < m.num_actions; ++a)
                in += m.prob(s, a, s2) * d[m.sa_index(s, a)];
        worst = std::max(worst, std::abs(out - in));
    }
    return worst;
}

}  // namespace covex
