#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covex/coverage.hpp"
#include "covex/errors.hpp"
#include "covex/mdp.hpp"
#include "covex/occupancy.hpp"
#include "covex/polytope.hpp"

namespace covex {

struct EpisodeRecord {
    int k = 0;
    std::int64_t tau = 0;      // episode length tau_1 * k^2
    std::int64_t t_start = 0;  // first time index of the episode
    double beta = 0.0;         // mixing weight tau_k / (t_{k+1} - 1)
};

struct EpisodeSchedule {
    std::int64_t tau1 = 0;
    int num_episodes = 0;
    std::vector<EpisodeRecord> episodes;
    std::int64_t final_time = 0;  // t_{K+1}; total steps executed is final_time - 1
};

/// Quadratic episode schedule: tau_k = tau1 * k^2 and
/// t_k = tau1 * (k-1)k(2k-1)/6 + 1, all in exact integer arithmetic.
/// The induced mixing weight beta_k always lies in [1/k, 3/k].
inline EpisodeSchedule make_schedule(std::int64_t tau1, int num_episodes) {
    if (tau1 < 1) throw std::invalid_argument("make_schedule: tau1 must be >= 1");
    if (num_episodes < 1) throw std::invalid_argument("make_schedule: K must be >= 1");

    const auto closed_form_t = [tau1](std::int64_t k) -> std::int64_t {
        __int128 v = static_cast<__int128>(tau1) * (k - 1) * k * (2 * k - 1) / 6 + 1;
        if (v > static_cast<__int128>(std::numeric_limits<std::int64_t>::max()))
            throw std::overflow_error("make_schedule: t_k exceeds 64-bit range");
        return static_cast<std::int64_t>(v);
    };
    closed_form_t(static_cast<std::int64_t>(num_episodes) + 1);  // overflow guard up front

    EpisodeSchedule sched{tau1, num_episodes, {}, 0};
    sched.episodes.reserve(static_cast<std::size_t>(num_episodes));
    std::int64_t t = 1;
    for (int k = 1; k <= num_episodes; ++k) {
        EpisodeRecord rec;
        rec.k = k;
        rec.tau = tau1 * static_cast<std::int64_t>(k) * k;
        rec.t_start = t;
        if (rec.t_start != closed_form_t(k))
            throw NumericalError("make_schedule: running sum disagrees with closed form");
        t += rec.tau;
        rec.beta = static_cast<double>(rec.tau) / static_cast<double>(t - 1);
        sched.episodes.push_back(rec);
    }
    sched.final_time = t;
    return sched;
}

struct ExplorationConfig {
    double rho = 2.0;
    CoverageWeights weights;
    double eta = 0.01;
    std::int64_t tau1 = 10;
    int num_episodes = 10;
    double epsilon_cold = 0.5;  // count floor for unvisited pairs
    std::uint64_t seed = 1;
};

struct EpisodeStats {
    int k = 0;
    std::int64_t t_start = 0;
    std::int64_t tau = 0;
    double beta = 0.0;
    std::vector<std::int64_t> counts;  // snapshot after the episode
    std::vector<double> d_hat;         // counts / (t_{k+1} - 1)
    std::vector<double> d_plus;        // count-floored estimate used for evaluation
    double u_hat = 0.0;                // U_rho at d_plus
    double max_ratio = 0.0;            // max mu/d_plus
    double lp_value = 0.0;             // optimal value of the scaled direction LP
    std::vector<double> policy;        // executed policy, flattened (s, a)
    double wall_ms = 0.0;
};

struct ExplorationTrace {
    ExplorationConfig config;
    EpisodeSchedule schedule;
    std::vector<EpisodeStats> episodes;
    VisitCounts final_counts;
    int k_delta = -1;  // first episode whose empirical occupancy clears eta everywhere
};

/// Count-floored occupancy estimate max(T, epsilon) / total. The floor
/// keeps unvisited pairs' gradient finite yet dominant during cold
/// start; the direction LP is invariant to the denominator's scale.
inline std::vector<double> clamped_occupancy(const VisitCounts& counts, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("clamped_occupancy: epsilon must be > 0");
    const double total = static_cast<double>(std::max<std::int64_t>(counts.total_steps, 1));
    std::vector<double> d(counts.counts.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = std::max(static_cast<double>(counts.counts[i]), epsilon) / total;
    return d;
}

/// The episodic exploration loop. Each episode linearizes U_rho at the
/// floored empirical occupancy, solves for the best stationary occupancy
/// in D_eta, extracts its policy, and executes it for tau_k steps
/// continuing from the current environment state (no resets).
/// Fully deterministic for a fixed seed.
inline ExplorationTrace run_exploration(const MdpModel& model, const ExplorationConfig& config) {
    const auto report = validate_mdp(model);
    if (!report.ok) throw ValidationError("run_exploration: invalid model: " + report.message());
    if (config.weights.size() != model.num_pairs())
        throw ValidationError("run_exploration: weight vector does not match model");
    if (!(config.eta > 0.0 && config.eta < 0.5))
        throw ValidationError("run_exploration: eta must be in (0, 1/2)");
    if (!(config.epsilon_cold > 0.0))
        throw ValidationError("run_exploration: epsilon_cold must be > 0");

    const RhoObjective objective(config.rho, config.weights);
    const auto poly = build_polytope(model, config.eta);
    if (!feasibility_check(poly).feasible)
        throw InfeasibleError("run_exploration: D_eta is empty at eta=" +
                              std::to_string(config.eta));
    const auto schedule = make_schedule(config.tau1, config.num_episodes);

    ExplorationTrace trace;
    trace.config = config;
    trace.schedule = schedule;
    trace.episodes.reserve(schedule.episodes.size());

    Rng rng(config.seed);
    VisitCounts counts = VisitCounts::zeros(model.num_states, model.num_actions);
    int state = 0;

    for (const auto& episode : schedule.episodes) {
        const auto started = std::chrono::steady_clock::now();

        const auto d_plus_pre = clamped_occupancy(counts, config.epsilon_cold);
        const auto direction = log_gradient_weights(objective, d_plus_pre);
        const auto lp = lp_maximize(poly, direction);
        if (lp.status != lp::Status::optimal)
            throw InfeasibleError("run_exploration: direction LP returned " +
                                  std::string(lp::to_string(lp.status)));
        const Policy policy = policy_of_occupancy(model.num_states, model.num_actions, lp.point);

        for (std::int64_t i = 0; i < episode.tau; ++i) {
            const int action = sample_action(policy, state, rng);
            ++counts.counts[model.sa_index(state, action)];
            ++counts.total_steps;
            state = step(model, state, action, rng);
        }

        EpisodeStats stats;
        stats.k = episode.k;
        stats.t_start = episode.t_start;
        stats.tau = episode.tau;
        stats.beta = episode.beta;
        stats.counts = counts.counts;
        stats.d_hat = empirical_occupancy(counts);
        stats.d_plus = clamped_occupancy(counts, config.epsilon_cold);
        stats.u_hat = evaluate_U(objective, stats.d_plus);
        stats.max_ratio = max_ratio(config.weights, stats.d_plus).value;
        stats.lp_value = lp.objective_value;
        stats.policy = policy.probs;
        stats.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();

        if (trace.k_delta < 0) {
            bool covered = true;
            for (double v : stats.d_hat)
                if (v < config.eta) {
                    covered = false;
                    break;
                }
            if (covered) trace.k_delta = episode.k;
        }
        trace.episodes.push_back(std::move(stats));
    }
    trace.final_counts = std::move(counts);
    return trace;
}

struct ExactSolveResult {
    std::vector<double> occupancy;
    double u_value = 0.0;
    double gap = 0.0;  // Frank-Wolfe certificate <grad, v - d> at the returned point
    bool converged = false;
    int iterations = 0;
};

/// Full-information Frank-Wolfe over D_eta with the open-loop steps
/// gamma_j = 2/(j+2), j starting at 1 so every iterate keeps a sliver of
/// the interior starting point and the gradient stays finite even at
/// eta = 0. Stops when the duality gap falls below gap_tol or the
/// iteration budget runs out (the latter is a warning, not a failure).
inline ExactSolveResult exact_solve(const MdpModel& model, double rho,
                                    const CoverageWeights& weights, double eta,
                                    int iterations, double gap_tol = 1e-6) {
    const auto report = validate_mdp(model);
    if (!report.ok) throw ValidationError("exact_solve: invalid model: " + report.message());
    if (iterations < 1) throw std::invalid_argument("exact_solve: iterations must be >= 1");

    const RhoObjective objective(rho, weights);
    const auto poly = build_polytope(model, eta);
    if (!feasibility_check(poly).feasible)
        throw InfeasibleError("exact_solve: D_eta is empty at eta=" + std::to_string(eta));

    std::vector<double> d =
        occupancy_of_policy(model, uniform_policy(model.num_states, model.num_actions));

    ExactSolveResult out;
    const auto certificate = [&](const std::vector<double>& at) {
        const auto lg = log_gradient(objective, at);
        const auto lp = lp_maximize(poly, lg.weights);
        if (lp.status != lp::Status::optimal)
            throw InfeasibleError("exact_solve: direction LP returned " +
                                  std::string(lp::to_string(lp.status)));
        double scaled = 0.0;
        for (std::size_t i = 0; i < at.size(); ++i)
            scaled += lg.weights[i] * (lp.point[i] - at[i]);
        return std::pair<double, std::vector<double>>(scaled * std::exp(lg.shift), lp.point);
    };

    for (int j = 1; j <= iterations; ++j) {
        auto [gap, vertex] = certificate(d);
        out.gap = gap;
        out.iterations = j;
        if (std::isfinite(gap) && gap <= gap_tol) {
            out.converged = true;
            break;
        }
        d = mix_occupancies(d, vertex, 2.0 / (j + 2.0));
    }
    if (!out.converged) out.gap = certificate(d).first;

    out.occupancy = std::move(d);
    out.u_value = evaluate_U(objective, out.occupancy);
    return out;
}

/// Per-episode approximation error xi_k = U(d*) - U(d_plus at episode k),
/// evaluated on the count-floored estimate so the series is finite
/// before full coverage. Early entries can dip negative through the
/// floor; they are reported as-is.
inline std::vector<double> approximation_error(const ExplorationTrace& trace,
                                               const std::vector<double>& d_star,
                                               const RhoObjective& objective) {
    detail::require_positive(d_star, "approximation_error");
    const double u_star = evaluate_U(objective, d_star);
    std::vector<double> xi;
    xi.reserve(trace.episodes.size());
    for (const auto& episode : trace.episodes)
        xi.push_back(u_star - evaluate_U(objective, episode.d_plus));
    return xi;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points_used = 0;
    std::vector<std::size_t> excluded;  // nonpositive entries after burn-in
};

/// Least-squares slope of log(xi) against log(t), skipping the first
/// burn_in entries. Nonpositive values after burn-in are excluded and
/// reported; fewer than 5 usable points is an error.
inline RateFit fit_rate(const std::vector<double>& t_values, const std::vector<double>& xi_values,
                        std::size_t burn_in) {
    if (t_values.size() != xi_values.size())
        throw std::invalid_argument("fit_rate: series length mismatch");
    std::vector<double> xs, ys;
    RateFit fit;
    for (std::size_t i = burn_in; i < t_values.size(); ++i) {
        if (!(xi_values[i] > 0.0) || !(t_values[i] > 0.0)) {
            fit.excluded.push_back(i);
            continue;
        }
        xs.push_back(std::log(t_values[i]));
        ys.push_back(std::log(xi_values[i]));
    }
    if (xs.size() < 5)
        throw std::invalid_argument("fit_rate: need at least 5 positive points after burn-in");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissa");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points_used = static_cast<int>(xs.size());
    return fit;
}

}  // namespace covex
