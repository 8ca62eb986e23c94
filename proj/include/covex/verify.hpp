#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "covex/coverage.hpp"
#include "covex/explorer.hpp"
#include "covex/mdp.hpp"
#include "covex/occupancy.hpp"
#include "covex/polytope.hpp"

namespace covex {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    double fd_rel_tol = 1e-5;
    double fd_step = 1e-6;
    int trials = 25;
    std::uint64_t seed = 20240901;
};

namespace detail {

// Full-support random policy: Dirichlet rows mixed halfway to uniform.
inline Policy random_policy(Rng& rng, int num_states, int num_actions) {
    Policy pi{num_states, num_actions, {}};
    pi.probs.reserve(static_cast<std::size_t>(num_states) * num_actions);
    for (int s = 0; s < num_states; ++s) {
        const auto row = rng.dirichlet(static_cast<std::size_t>(num_actions), 1.0);
        for (int a = 0; a < num_actions; ++a)
            pi.probs.push_back(0.5 * row[a] + 0.5 / num_actions);
    }
    return pi;
}

// Central finite difference of U along every coordinate.
inline std::vector<double> fd_gradient(const RhoObjective& obj, const std::vector<double>& d,
                                       double h) {
    std::vector<double> g(d.size());
    std::vector<double> work = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        work[i] = d[i] + h;
        const double up = evaluate_U(obj, work);
        work[i] = d[i] - h;
        const double down = evaluate_U(obj, work);
        work[i] = d[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

inline CheckResult make_result(const std::string& name, bool pass, const std::string& detail) {
    return CheckResult{name, pass, detail};
}

}  // namespace detail

/// Gradient of U_rho against central finite differences on random
/// interior occupancies, for rho in {1, 1.5, 2, 4}.
inline CheckResult check_gradient_fd(const MdpModel& model, const VerifyOptions& opt) {
    Rng rng(opt.seed);
    double worst = 0.0;
    for (int trial = 0; trial < opt.trials; ++trial) {
        const auto d = occupancy_of_policy(
            model, detail::random_policy(rng, model.num_states, model.num_actions));
        std::vector<double> mu(model.num_pairs());
        for (auto& w : mu) w = rng.uniform(0.8, 1.25);
        for (double rho : {1.0, 1.5, 2.0, 4.0}) {
            const RhoObjective obj(rho, CoverageWeights(mu));
            const auto exact = gradient_U(obj, d);
            const auto approx = detail::fd_gradient(obj, d, opt.fd_step);
            for (std::size_t i = 0; i < exact.size(); ++i)
                worst = std::max(worst, std::abs(approx[i] - exact[i]) / std::abs(exact[i]));
        }
    }
    std::ostringstream os;
    os << "max relative error " << worst << " (tol " << opt.fd_rel_tol << ")";
    return detail::make_result("gradient_finite_difference", worst <= opt.fd_rel_tol, os.str());
}

/// Concavity of U_rho along random chords.
inline CheckResult check_concavity(const MdpModel& model, const VerifyOptions& opt) {
    Rng rng(opt.seed + 1);
    double worst = 0.0;
    for (int trial = 0; trial < opt.trials; ++trial) {
        const auto d1 = occupancy_of_policy(
            model, detail::random_policy(rng, model.num_states, model.num_actions));
        const auto d2 = occupancy_of_policy(
            model, detail::random_policy(rng, model.num_states, model.num_actions));
        std::vector<double> mu(model.num_pairs());
        for (auto& w : mu) w = rng.uniform(0.5, 2.0);
        const double lam = rng.uniform(0.05, 0.95);
        for (double rho : {1.0, 2.0, 4.0}) {
            const RhoObjective obj(rho, CoverageWeights(mu));
            const double mixed = evaluate_U(obj, mix_occupancies(d1, d2, 1.0 - lam));
            const double chord = lam * evaluate_U(obj, d1) + (1.0 - lam) * evaluate_U(obj, d2);
            worst = std::max(worst, chord - mixed);
        }
    }
    std::ostringstream os;
    os << "max chord excess " << worst;
    return detail::make_result("concavity", worst <= 1e-9, os.str());
}

/// Lemma-style sandwich d_{i*}^(1/rho) r_max <= V_rho <= r_max plus the
/// large-rho approach to the max ratio.
inline CheckResult check_sandwich(const MdpModel& model, const VerifyOptions& opt) {
    Rng rng(opt.seed + 2);
    const std::size_t n = model.num_pairs();
    bool ok = true;
    std::ostringstream os;
    for (int trial = 0; trial < opt.trials && ok; ++trial) {
        std::vector<double> mu(n), d(n);
        for (auto& w : mu) w = rng.uniform(0.5, 2.0);
        const auto dir = rng.dirichlet(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) d[i] = 0.9 * dir[i] + 0.1 / static_cast<double>(n);
        const CoverageWeights weights(mu);
        const auto ratio = max_ratio(weights, d);
        double prev = 0.0;
        for (double rho : {2.0, 8.0, 32.0, 128.0, 1024.0}) {
            const double v = v_rho(RhoObjective(rho, weights), d);
            const double lower = std::pow(d[ratio.index], 1.0 / rho) * ratio.value;
            if (!(v >= lower - 1e-9 * ratio.value) || !(v <= ratio.value + 1e-9 * ratio.value)) {
                os << "sandwich broken at rho=" << rho << " (V=" << v << ", bounds [" << lower
                   << ", " << ratio.value << "])";
                ok = false;
                break;
            }
            if (v + 1e-9 < prev) {
                os << "V_rho not nondecreasing at rho=" << rho;
                ok = false;
                break;
            }
            prev = v;
        }
        if (ok && std::abs(prev - ratio.value) > 0.01 * ratio.value) {
            os << "V_1024 misses max ratio by " << std::abs(prev - ratio.value) / ratio.value;
            ok = false;
        }
    }
    if (ok) os << "all sandwich bounds hold";
    return detail::make_result("v_rho_sandwich", ok, os.str());
}

/// U_1 identity against KL divergence and the rho = 2 closed form.
inline CheckResult check_limit_identities(const MdpModel& model, const VerifyOptions& opt) {
    Rng rng(opt.seed + 3);
    const std::size_t n = model.num_pairs();
    double worst = 0.0;
    for (int trial = 0; trial < opt.trials; ++trial) {
        std::vector<double> mu(n);
        for (auto& w : mu) w = rng.uniform(0.5, 2.0);
        const CoverageWeights weights(mu);
        const auto d = occupancy_of_policy(
            model, detail::random_policy(rng, model.num_states, model.num_actions));

        const auto mu_bar = weights.normalized();
        double entropy = 0.0;
        for (double w : mu_bar) entropy -= w * std::log(w);
        const double lhs = evaluate_U(RhoObjective(1.0, weights), d);
        const double rhs = -weights.sum() * (kl_divergence(mu_bar, d) + entropy);
        worst = std::max(worst, std::abs(lhs - rhs));

        double direct = 0.0;
        for (std::size_t i = 0; i < n; ++i) direct -= mu[i] * mu[i] / d[i];
        const double u2 = evaluate_U(RhoObjective(2.0, weights), d);
        worst = std::max(worst, std::abs(u2 - direct) / std::abs(direct));
    }
    std::ostringstream os;
    os << "max identity defect " << worst;
    return detail::make_result("limit_identities", worst <= 1e-10, os.str());
}

/// LP oracle invariants: constraint satisfaction of optimal vertices,
/// invariance under objective rescaling, and agreement between the
/// minimax LP and the max-ratio functional.
inline CheckResult check_lp_invariants(const MdpModel& model, const VerifyOptions& opt) {
    Rng rng(opt.seed + 4);
    const std::size_t n = model.num_pairs();
    std::ostringstream os;
    const double eta = default_eta(model) / 2.0;
    const auto poly = build_polytope(model, eta);

    for (int trial = 0; trial < opt.trials; ++trial) {
        std::vector<double> c(n);
        for (auto& v : c) v = rng.uniform(-1.0, 1.0);
        const auto sol = lp_maximize(poly, c);
        if (sol.status != lp::Status::optimal) {
            os << "direction LP not optimal";
            return detail::make_result("lp_invariants", false, os.str());
        }
        double sum = 0.0;
        for (double v : sol.point) {
            if (v < 2.0 * eta - 1e-8) {
                os << "bound violated by optimal vertex";
                return detail::make_result("lp_invariants", false, os.str());
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-8 || flow_residual(model, sol.point) > 1e-8) {
            os << "optimal vertex leaves the polytope";
            return detail::make_result("lp_invariants", false, os.str());
        }
        for (double scale : {1e-6, 1e6}) {
            std::vector<double> cs(n);
            for (std::size_t i = 0; i < n; ++i) cs[i] = scale * c[i];
            const auto scaled = lp_maximize(poly, cs);
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                diff = std::max(diff, std::abs(scaled.point[i] - sol.point[i]));
            if (diff > 1e-12) {
                os << "objective rescaling moved the vertex by " << diff;
                return detail::make_result("lp_invariants", false, os.str());
            }
        }
    }

    std::vector<double> mu(n);
    for (auto& w : mu) w = rng.uniform(0.5, 2.0);
    const CoverageWeights weights(mu);
    const auto mm = minimax_occupancy(model, weights, eta);
    if (mm.status != lp::Status::optimal) {
        os << "minimax LP not optimal";
        return detail::make_result("lp_invariants", false, os.str());
    }
    const auto ratio = max_ratio(weights, mm.point);
    if (std::abs(ratio.value - mm.value) > 1e-7 * std::max(1.0, mm.value)) {
        os << "max ratio " << ratio.value << " vs minimax value " << mm.value;
        return detail::make_result("lp_invariants", false, os.str());
    }
    os << "vertices feasible, scale-invariant; minimax consistent";
    return detail::make_result("lp_invariants", true, os.str());
}

/// Occupancy <-> policy round trip on random full-support policies.
inline CheckResult check_occupancy_roundtrip(const MdpModel& model, const VerifyOptions& opt) {
    Rng rng(opt.seed + 5);
    double worst = 0.0;
    for (int trial = 0; trial < opt.trials; ++trial) {
        const auto pi = detail::random_policy(rng, model.num_states, model.num_actions);
        const auto d = occupancy_of_policy(model, pi);
        if (flow_residual(model, d) > 1e-8)
            return detail::make_result("occupancy_roundtrip", false, "flow residual too large");
        const auto back = policy_of_occupancy(model.num_states, model.num_actions, d);
        for (std::size_t i = 0; i < pi.probs.size(); ++i)
            worst = std::max(worst, std::abs(back.probs[i] - pi.probs[i]));
    }
    std::ostringstream os;
    os << "max policy defect " << worst;
    return detail::make_result("occupancy_roundtrip", worst <= 1e-9, os.str());
}

/// The full suite used by the verify command.
inline std::vector<CheckResult> verify_model(const MdpModel& model, const VerifyOptions& opt) {
    std::vector<CheckResult> results;
    const auto report = validate_mdp(model);
    results.push_back(
        detail::make_result("model_validation", report.ok, report.message()));
    if (!report.ok) return results;  // downstream checks assume a valid model

    results.push_back(check_gradient_fd(model, opt));
    results.push_back(check_concavity(model, opt));
    results.push_back(check_sandwich(model, opt));
    results.push_back(check_limit_identities(model, opt));
    results.push_back(check_lp_invariants(model, opt));
    results.push_back(check_occupancy_roundtrip(model, opt));
    return results;
}

}  // namespace covex
