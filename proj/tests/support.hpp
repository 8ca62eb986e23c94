#pragma once

// Shared fixtures and independent oracles for the unit tests. Oracles
// here deliberately avoid the library's solver paths: the stationary
// oracle is plain power iteration, the gradient oracle is a central
// finite difference of evaluate_U, and the LP oracle is a grid sweep
// over randomized policies.

#include <cmath>
#include <utility>
#include <vector>

#include "covex/coverage.hpp"
#include "covex/mdp.hpp"
#include "covex/occupancy.hpp"

namespace testsupport {

inline covex::MdpModel two_state_chain(double p01, double p10) {
    // single action; state 0 hops to 1 w.p. p01, state 1 hops back w.p. p10
    covex::MdpModel m{2, 1, {1.0 - p01, p01, p10, 1.0 - p10}};
    return m;
}

inline covex::MdpModel deterministic_cycle(int num_states, int num_actions) {
    covex::MdpModel m{num_states, num_actions, {}};
    m.kernel.assign(m.num_pairs() * static_cast<std::size_t>(num_states), 0.0);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a)
            m.kernel[m.sa_index(s, a) * num_states + (s + 1) % num_states] = 1.0;
    return m;
}

inline covex::MdpModel single_state(int num_actions) {
    covex::MdpModel m{1, num_actions, std::vector<double>(num_actions, 1.0)};
    return m;
}

// 3-state, 2-action model whose induced chain is doubly stochastic for
// every policy (all rows are circulants).
inline covex::MdpModel circulant_model() {
    const std::vector<double> rows[2] = {{0.2, 0.5, 0.3}, {0.4, 0.1, 0.5}};
    covex::MdpModel m{3, 2, {}};
    m.kernel.assign(18, 0.0);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            for (int k = 0; k < 3; ++k)
                m.kernel[m.sa_index(s, a) * 3 + (s + k) % 3] = rows[a][k];
    return m;
}

inline covex::Policy random_policy(covex::Rng& rng, int num_states, int num_actions,
                                   double uniform_mix = 0.5) {
    covex::Policy pi{num_states, num_actions, {}};
    pi.probs.reserve(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s) {
        const auto row = rng.dirichlet(static_cast<std::size_t>(num_actions), 1.0);
        for (int a = 0; a < num_actions; ++a)
            pi.probs.push_back((1.0 - uniform_mix) * row[a] + uniform_mix / num_actions);
    }
    return pi;
}

// Power-iteration stationary distribution, independent of the linear
// solve used by the library.
inline covex::StateDistribution power_iteration(const covex::MdpModel& m,
                                                const covex::Policy& pi,
                                                double residual_tol = 1e-13,
                                                int max_iterations = 200000) {
    const int S = m.num_states;
    const auto p = covex::induced_transition(m, pi);
    std::vector<double> psi(S, 1.0 / S), next(S, 0.0);
    for (int it = 0; it < max_iterations; ++it) {
        for (int j = 0; j < S; ++j) {
            double acc = 0.0;
            for (int i = 0; i < S; ++i) acc += psi[i] * p[i * S + j];
            next[j] = acc;
        }
        double norm = 0.0;
        for (double v : next) norm += v;
        for (double& v : next) v /= norm;
        double residual = 0.0;
        for (int j = 0; j < S; ++j) residual = std::max(residual, std::abs(next[j] - psi[j]));
        psi.swap(next);
        if (residual < residual_tol) break;
    }
    return psi;
}

// Central finite difference of evaluate_U, coordinate by coordinate.
inline std::vector<double> fd_gradient(const covex::RhoObjective& obj, std::vector<double> d,
                                       double h) {
    std::vector<double> g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double base = d[i];
        d[i] = base + h;
        const double up = covex::evaluate_U(obj, d);
        d[i] = base - h;
        const double down = covex::evaluate_U(obj, d);
        d[i] = base;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// Brute-force linear optimum over occupancies of a grid of randomized
// policies; exact on 2-state 2-action models because the polytope's
// vertices are deterministic policies, all of which sit on the grid.
inline double policy_grid_linear_max(const covex::MdpModel& m, const std::vector<double>& c,
                                     int grid_points = 101) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double p = static_cast<double>(i) / (grid_points - 1);
        for (int j = 0; j < grid_points; ++j) {
            const double q = static_cast<double>(j) / (grid_points - 1);
            const covex::Policy pi{2, 2, {p, 1.0 - p, q, 1.0 - q}};
            const auto d = covex::occupancy_of_policy(m, pi);
            double value = 0.0;
            for (std::size_t k = 0; k < d.size(); ++k) value += c[k] * d[k];
            best = std::max(best, value);
        }
    }
    return best;
}

// Same grid sweep but maximizing U itself.
inline double policy_grid_u_max(const covex::MdpModel& m, const covex::RhoObjective& obj,
                                int grid_points = 41) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double p = static_cast<double>(i) / (grid_points - 1);
        for (int j = 0; j < grid_points; ++j) {
            const double q = static_cast<double>(j) / (grid_points - 1);
            const covex::Policy pi{2, 2, {p, 1.0 - p, q, 1.0 - q}};
            const auto d = covex::occupancy_of_policy(m, pi);
            bool interior = true;
            for (double v : d)
                if (!(v > 0.0)) interior = false;
            if (!interior) continue;
            best = std::max(best, covex::evaluate_U(obj, d));
        }
    }
    return best;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace testsupport
