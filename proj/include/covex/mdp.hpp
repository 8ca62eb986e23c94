#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "covex/errors.hpp"
#include "covex/rng.hpp"

namespace covex {

/// Finite controlled Markov chain. The kernel is stored row-major as
/// P[(s*A + a)*S + s'] = P(s' | s, a). Models are treated as immutable
/// after validation and are safe to share read-only across runs.
struct MdpModel {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> kernel;

    std::size_t num_pairs() const {
        return static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions);
    }
    std::size_t sa_index(int s, int a) const {
        return static_cast<std::size_t>(s) * num_actions + static_cast<std::size_t>(a);
    }
    std::span<const double> row(int s, int a) const {
        return {kernel.data() + sa_index(s, a) * num_states, static_cast<std::size_t>(num_states)};
    }
    double prob(int s, int a, int s2) const {
        return kernel[sa_index(s, a) * num_states + static_cast<std::size_t>(s2)];
    }
};

/// Stationary randomized policy, probs[(s*A + a)] = pi(a | s).
struct Policy {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> probs;

    std::span<const double> row(int s) const {
        return {probs.data() + static_cast<std::size_t>(s) * num_actions,
                static_cast<std::size_t>(num_actions)};
    }
    double at(int s, int a) const {
        return probs[static_cast<std::size_t>(s) * num_actions + static_cast<std::size_t>(a)];
    }
};

using StateDistribution = std::vector<double>;

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;

    std::string message() const {
        std::string out;
        for (const auto& v : violations) {
            if (!out.empty()) out += "; ";
            out += v;
        }
        return out.empty() ? "ok" : out;
    }
};

inline Policy uniform_policy(int num_states, int num_actions) {
    Policy pi{num_states, num_actions, {}};
    pi.probs.assign(static_cast<std::size_t>(num_states) * num_actions,
                    1.0 / static_cast<double>(num_actions));
    return pi;
}

inline ValidationReport validate_policy(const Policy& pi) {
    ValidationReport report;
    const std::size_t expect =
        static_cast<std::size_t>(pi.num_states) * static_cast<std::size_t>(pi.num_actions);
    if (pi.num_states < 1 || pi.num_actions < 1 || pi.probs.size() != expect)
        throw std::invalid_argument("validate_policy: dimension mismatch");
    for (int s = 0; s < pi.num_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < pi.num_actions; ++a) {
            const double p = pi.at(s, a);
            if (p < 0.0) {
                std::ostringstream os;
                os << "policy row s=" << s << " has negative entry " << p;
                report.violations.push_back(os.str());
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "policy row s=" << s << " sums to " << sum << " != 1";
            report.violations.push_back(os.str());
        }
    }
    report.ok = report.violations.empty();
    return report;
}

namespace detail {

// Adjacency of the uniform-policy chain: edge s -> s2 iff some action
// reaches s2 with positive probability.
inline std::vector<std::vector<int>> positive_digraph(const MdpModel& m) {
    std::vector<std::vector<int>> adj(m.num_states);
    for (int s = 0; s < m.num_states; ++s) {
        for (int s2 = 0; s2 < m.num_states; ++s2) {
            bool reach = false;
            for (int a = 0; a < m.num_actions && !reach; ++a)
                reach = m.prob(s, a, s2) > 0.0;
            if (reach) adj[s].push_back(s2);
        }
    }
    return adj;
}

inline std::vector<int> bfs_dist(const std::vector<std::vector<int>>& adj, int root) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<int> q;
    dist[root] = 0;
    q.push(root);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

// Period of a strongly connected digraph: gcd over edges (u, v) of
// |dist(u) + 1 - dist(v)| with BFS distances from one root.
inline long long digraph_period(const std::vector<std::vector<int>>& adj) {
    const auto dist = bfs_dist(adj, 0);
    long long g = 0;
    for (std::size_t u = 0; u < adj.size(); ++u)
        for (int v : adj[u])
            g = std::gcd(g, static_cast<long long>(std::abs(dist[u] + 1 - dist[v])));
    return g;
}

// Gaussian elimination with partial pivoting; a is n x n row-major,
// solved in place. Returns false when a pivot falls below tol.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n,
                        double tol = 1e-12) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < tol) return false;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        const double d = a[col * n + col];
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
            b[r] -= f * b[col];
        }
    }
    for (int i = 0; i < n; ++i) b[i] /= a[i * n + i];
    return true;
}

}  // namespace detail

/// Structural problems (wrong array sizes) throw; semantic problems
/// (non-stochastic rows, reducibility, periodicity under the uniform
/// policy) are returned as named violations.
inline ValidationReport validate_mdp(const MdpModel& m) {
    const std::size_t expect = static_cast<std::size_t>(m.num_states) * m.num_actions *
                               static_cast<std::size_t>(m.num_states);
    if (m.num_states < 1 || m.num_actions < 1 || m.kernel.size() != expect)
        throw std::invalid_argument("validate_mdp: kernel dimensions do not match S, A");

    ValidationReport report;
    for (int s = 0; s < m.num_states; ++s) {
        for (int a = 0; a < m.num_actions; ++a) {
            double sum = 0.0;
            bool range_ok = true;
            for (int s2 = 0; s2 < m.num_states; ++s2) {
                const double p = m.prob(s, a, s2);
                if (p < 0.0 || p > 1.0 + 1e-12) range_ok = false;
                sum += p;
            }
            if (!range_ok) {
                std::ostringstream os;
                os << "kernel row (s=" << s << ", a=" << a << ") has entries outside [0,1]";
                report.violations.push_back(os.str());
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "kernel row (s=" << s << ", a=" << a << "): row sum " << sum << " != 1";
                report.violations.push_back(os.str());
            }
        }
    }
    if (!report.violations.empty()) {
        report.ok = false;
        return report;  // connectivity checks are meaningless on a broken kernel
    }

    const auto adj = detail::positive_digraph(m);
    const auto fwd = detail::bfs_dist(adj, 0);
    std::vector<std::vector<int>> radj(m.num_states);
    for (int u = 0; u < m.num_states; ++u)
        for (int v : adj[u]) radj[v].push_back(u);
    const auto bwd = detail::bfs_dist(radj, 0);

    std::vector<int> unreachable;
    for (int s = 0; s < m.num_states; ++s)
        if (fwd[s] < 0 || bwd[s] < 0) unreachable.push_back(s);
    if (!unreachable.empty()) {
        std::ostringstream os;
        os << "irreducibility: states {";
        for (std::size_t i = 0; i < unreachable.size(); ++i)
            os << (i ? "," : "") << unreachable[i];
        os << "} not mutually reachable under the uniform policy";
        report.violations.push_back(os.str());
        report.ok = false;
        return report;
    }

    const long long period = detail::digraph_period(adj);
    if (period != 1) {
        std::ostringstream os;
        os << "aperiodicity: uniform-policy chain has period " << period;
        report.violations.push_back(os.str());
    }

    report.ok = report.violations.empty();
    return report;
}

/// Transition matrix of the chain induced by pi, row-major S x S.
inline std::vector<double> induced_transition(const MdpModel& m, const Policy& pi) {
    const int S = m.num_states;
    std::vector<double> p(static_cast<std::size_t>(S) * S, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < m.num_actions; ++a) {
            const double w = pi.at(s, a);
            if (w == 0.0) continue;
            for (int s2 = 0; s2 < S; ++s2) p[s * S + s2] += w * m.prob(s, a, s2);
        }
    return p;
}

/// Unique stationary distribution of the chain induced by pi.
///
/// Solves (P_pi^T - I) psi = 0 directly, with the last equation replaced
/// by the normalization constraint. Rank deficiency beyond the expected
/// single null direction (multiple recurrent classes) surfaces as a
/// vanishing pivot and raises ErgodicityError.
inline StateDistribution stationary_distribution(const MdpModel& m, const Policy& pi) {
    if (pi.num_states != m.num_states || pi.num_actions != m.num_actions)
        throw std::invalid_argument("stationary_distribution: policy dimensions mismatch");
    const int S = m.num_states;
    const auto p = induced_transition(m, pi);

    std::vector<double> a(static_cast<std::size_t>(S) * S);
    std::vector<double> b(S, 0.0);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) a[i * S + j] = p[j * S + i] - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < S; ++j) a[(S - 1) * S + j] = 1.0;
    b[S - 1] = 1.0;

    if (!detail::solve_dense(a, b, S))
        throw ErgodicityError("stationary_distribution: induced chain is not ergodic");

    double sum = 0.0;
    for (int i = 0; i < S; ++i) {
        if (b[i] < -1e-10)
            throw ErgodicityError("stationary_distribution: negative stationary mass");
        if (b[i] < 0.0) b[i] = 0.0;
        sum += b[i];
    }
    for (int i = 0; i < S; ++i) b[i] /= sum;

    double residual = 0.0;
    for (int j = 0; j < S; ++j) {
        double acc = 0.0;
        for (int i = 0; i < S; ++i) acc += b[i] * p[i * S + j];
        residual = std::max(residual, std::abs(acc - b[j]));
    }
    if (residual > 1e-10)
        throw NumericalError("stationary_distribution: fixed-point residual " +
                             std::to_string(residual));
    return b;
}

/// One environment transition, drawn by inverse CDF over a single
/// uniform variate. Deterministic given the generator state.
inline int step(const MdpModel& m, int s, int a, Rng& rng) {
    if (s < 0 || s >= m.num_states || a < 0 || a >= m.num_actions)
        throw std::out_of_range("step: state or action index out of range");
    return inverse_cdf_index(m.row(s, a), rng.uniform());
}

/// Action draw from pi(.|s), same inverse-CDF convention as step().
inline int sample_action(const Policy& pi, int s, Rng& rng) {
    return inverse_cdf_index(pi.row(s), rng.uniform());
}

/// Random test instance: every kernel row is a Dirichlet(alpha) draw
/// mixed with the uniform distribution, so all transitions have mass at
/// least lambda_mix / S and every stationary policy induces an ergodic
/// chain.
inline MdpModel random_ergodic_mdp(int num_states, int num_actions, double alpha,
                                   double lambda_mix, std::uint64_t seed) {
    if (num_states < 1 || num_actions < 1)
        throw std::invalid_argument("random_ergodic_mdp: need S >= 1, A >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("random_ergodic_mdp: alpha must be > 0");
    if (!(lambda_mix > 0.0) || !(lambda_mix < 1.0))
        throw std::invalid_argument("random_ergodic_mdp: lambda_mix must be in (0,1)");

    Rng rng(seed);
    MdpModel m{num_states, num_actions, {}};
    m.kernel.resize(m.num_pairs() * static_cast<std::size_t>(num_states));
    const double u = lambda_mix / static_cast<double>(num_states);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            const auto dir = rng.dirichlet(static_cast<std::size_t>(num_states), alpha);
            for (int s2 = 0; s2 < num_states; ++s2)
                m.kernel[m.sa_index(s, a) * num_states + s2] =
                    (1.0 - lambda_mix) * dir[s2] + u;
        }
    return m;
}

}  // namespace covex
