#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "covex/coverage.hpp"
#include "covex/errors.hpp"
#include "covex/mdp.hpp"
#include "covex/simplex.hpp"

namespace covex {

/// Linear description of the (restricted) occupancy set: S flow-balance
/// equalities, one normalization equality, and the bounds d >= 2*eta.
/// One flow row is linearly dependent given normalization; it is kept
/// and left to the solver's redundancy handling.
struct OccupancyPolytope {
    int num_states = 0;
    int num_actions = 0;
    double eta = 0.0;
    std::vector<std::vector<double>> eq;  // (S+1) x (S*A)
    std::vector<double> rhs;              // length S+1
};

struct LpSolution {
    lp::Status status = lp::Status::infeasible;
    std::vector<double> point;  // a vertex of the polytope, in d-space
    double objective_value = 0.0;
};

struct MinimaxSolution {
    lp::Status status = lp::Status::infeasible;
    std::vector<double> point;
    double m = 0.0;      // optimal uniform ratio bound: d >= m * mu
    double value = 0.0;  // minimax coverage value 1/m = max_{s,a} mu/d at the optimum
};

struct FeasibilityReport {
    bool feasible = false;
    double margin = 0.0;  // max over feasible d of min_{s,a} d_{s,a}
};

inline OccupancyPolytope build_polytope(const MdpModel& m, double eta) {
    if (!(eta >= 0.0 && eta < 0.5))
        throw std::invalid_argument("build_polytope: eta must be in [0, 1/2)");
    const int S = m.num_states;
    const int A = m.num_actions;
    const std::size_t n = m.num_pairs();

    OccupancyPolytope poly{S, A, eta, {}, {}};
    poly.eq.assign(static_cast<std::size_t>(S) + 1, std::vector<double>(n, 0.0));
    poly.rhs.assign(static_cast<std::size_t>(S) + 1, 0.0);

    for (int s2 = 0; s2 < S; ++s2) {
        auto& row = poly.eq[static_cast<std::size_t>(s2)];
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double coef = -m.prob(s, a, s2);
                if (s == s2) coef += 1.0;
                row[m.sa_index(s, a)] = coef;
            }
    }
    for (std::size_t j = 0; j < n; ++j) poly.eq[static_cast<std::size_t>(S)][j] = 1.0;
    poly.rhs[static_cast<std::size_t>(S)] = 1.0;
    return poly;
}

namespace detail {

// Shift x = d - 2*eta so the solver sees plain x >= 0.
inline std::vector<double> shifted_rhs(const OccupancyPolytope& poly) {
    std::vector<double> b = poly.rhs;
    if (poly.eta > 0.0) {
        for (std::size_t i = 0; i < poly.eq.size(); ++i) {
            double rowsum = 0.0;
            for (double v : poly.eq[i]) rowsum += v;
            b[i] -= 2.0 * poly.eta * rowsum;
        }
    }
    return b;
}

// Minimax coverage as an LP over [d, m, slack]: maximize m subject to
// d in the polytope and d_i - mu_i * m - slack_i = 0.
inline MinimaxSolution minimax_over(const OccupancyPolytope& poly,
                                    const std::vector<double>& mu) {
    const std::size_t n = poly.eq.empty() ? 0 : poly.eq[0].size();
    if (mu.size() != n) throw std::invalid_argument("minimax_over: weight size mismatch");
    const std::size_t rows = poly.eq.size() + n;
    const std::size_t cols = 2 * n + 1;

    std::vector<std::vector<double>> a(rows, std::vector<double>(cols, 0.0));
    std::vector<double> b(rows, 0.0);
    const auto base_rhs = shifted_rhs(poly);
    for (std::size_t i = 0; i < poly.eq.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = poly.eq[i][j];
        b[i] = base_rhs[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = a[poly.eq.size() + i];
        row[i] = 1.0;
        row[n] = -mu[i];
        row[n + 1 + i] = -1.0;
        b[poly.eq.size() + i] = -2.0 * poly.eta;
    }
    std::vector<double> c(cols, 0.0);
    c[n] = 1.0;

    const auto sol = lp::maximize(a, b, c);
    MinimaxSolution out;
    out.status = sol.status;
    if (sol.status != lp::Status::optimal) return out;
    out.point.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.point[j] = sol.x[j] + 2.0 * poly.eta;
    out.m = sol.x[n];
    out.value = out.m > 0.0 ? 1.0 / out.m : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace detail

/// Frank-Wolfe direction oracle: an optimal vertex of the polytope for a
/// linear objective over state-action pairs. Deterministic, and
/// invariant to positive rescaling of the objective.
inline LpSolution lp_maximize(const OccupancyPolytope& poly,
                              const std::vector<double>& objective) {
    const std::size_t n = poly.eq.empty() ? 0 : poly.eq[0].size();
    if (objective.size() != n)
        throw std::invalid_argument("lp_maximize: objective size mismatch");
    for (double v : objective)
        if (!std::isfinite(v)) throw std::invalid_argument("lp_maximize: non-finite objective");

    const auto sol = lp::maximize(poly.eq, detail::shifted_rhs(poly), objective);
    LpSolution out;
    out.status = sol.status;
    if (sol.status != lp::Status::optimal) return out;
    out.point.resize(n);
    out.objective_value = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.point[j] = sol.x[j] + 2.0 * poly.eta;
        out.objective_value += objective[j] * out.point[j];
    }
    return out;
}

/// Exact minimax coverage: argmin over the polytope of max_{s,a} mu/d,
/// solved as the LP max{ m : d >= m*mu, d in D_eta }. The minimax value
/// is 1/m*, attained by the returned occupancy.
inline MinimaxSolution minimax_occupancy(const MdpModel& model, const CoverageWeights& weights,
                                         double eta) {
    const auto poly = build_polytope(model, eta);
    if (weights.size() != model.num_pairs())
        throw std::invalid_argument("minimax_occupancy: weight size mismatch");
    return detail::minimax_over(poly, weights.mu);
}

/// Phase-one feasibility plus the best uniform lower bound any feasible
/// occupancy can put on all pairs (the unit-weight minimax value).
inline FeasibilityReport feasibility_check(const OccupancyPolytope& poly) {
    const std::size_t n = poly.eq.empty() ? 0 : poly.eq[0].size();
    const auto probe = lp::maximize(poly.eq, detail::shifted_rhs(poly),
                                    std::vector<double>(n, 0.0));
    FeasibilityReport report;
    report.feasible = probe.status == lp::Status::optimal;
    if (!report.feasible) return report;
    const auto mm = detail::minimax_over(poly, std::vector<double>(n, 1.0));
    report.margin = mm.status == lp::Status::optimal ? mm.m : 0.0;
    return report;
}

/// Default restriction level: half the feasibility margin, capped at
/// 1/(4*S*A) so the smoothness constant stays moderate.
inline double default_eta(const MdpModel& model) {
    const auto report = feasibility_check(build_polytope(model, 0.0));
    if (!report.feasible)
        throw InfeasibleError("default_eta: occupancy polytope is empty");
    const double cap =
        1.0 / (4.0 * static_cast<double>(model.num_states) * model.num_actions);
    return std::min(report.margin / 2.0, cap);
}

}  // namespace covex
