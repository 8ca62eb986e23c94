#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace covex {

/// Fixed positive importance weights mu over state-action pairs.
struct CoverageWeights {
    std::vector<double> mu;
    double mu_max = 0.0;
    double mu_min = 0.0;

    CoverageWeights() = default;

    explicit CoverageWeights(std::vector<double> values) : mu(std::move(values)) {
        if (mu.empty()) throw std::invalid_argument("CoverageWeights: empty weight vector");
        mu_max = -std::numeric_limits<double>::infinity();
        mu_min = std::numeric_limits<double>::infinity();
        for (double w : mu) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::invalid_argument(
                    "CoverageWeights: entries must be strictly positive and finite");
            mu_max = std::max(mu_max, w);
            mu_min = std::min(mu_min, w);
        }
    }

    static CoverageWeights uniform(std::size_t n) {
        return CoverageWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return mu.size(); }

    double sum() const {
        double s = 0.0;
        for (double w : mu) s += w;
        return s;
    }

    /// Normalized weights summing to 1.
    std::vector<double> normalized() const {
        const double s = sum();
        std::vector<double> out(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) out[i] = mu[i] / s;
        return out;
    }
};

/// The coverage objective family: mu-weighted log at rho = 1, the power
/// form mu^rho d^(1-rho) / (1-rho) for rho > 1. Concave, separable, with
/// gradient (mu/d)^rho.
struct RhoObjective {
    double rho = 1.0;
    CoverageWeights weights;

    RhoObjective() = default;
    RhoObjective(double rho_, CoverageWeights weights_)
        : rho(rho_), weights(std::move(weights_)) {
        if (!(rho >= 1.0)) throw std::invalid_argument("RhoObjective: rho must be >= 1");
    }
};

namespace detail {

inline void require_positive(const std::vector<double>& d, const char* who) {
    for (double x : d)
        if (!(x > 0.0)) throw std::domain_error(std::string(who) + ": occupancy entry <= 0");
}

inline void require_size(const RhoObjective& obj, const std::vector<double>& d,
                         const char* who) {
    if (obj.weights.size() != d.size())
        throw std::invalid_argument(std::string(who) + ": weight/occupancy size mismatch");
}

}  // namespace detail

inline double evaluate_U(const RhoObjective& obj, const std::vector<double>& d) {
    detail::require_size(obj, d, "evaluate_U");
    detail::require_positive(d, "evaluate_U");
    const auto& mu = obj.weights.mu;
    double total = 0.0;
    if (obj.rho == 1.0) {
        for (std::size_t i = 0; i < d.size(); ++i) total += mu[i] * std::log(d[i]);
    } else {
        // mu^rho d^(1-rho) = d * (mu/d)^rho, which delays overflow
        const double scale = 1.0 / (1.0 - obj.rho);
        for (std::size_t i = 0; i < d.size(); ++i)
            total += scale * d[i] * std::pow(mu[i] / d[i], obj.rho);
    }
    return total;
}

/// Gradient of U_rho: entry (s,a) is (mu/d)^rho. Throws overflow_error
/// when a ratio power leaves the double range; callers needing only
/// direction should use log_gradient_weights instead.
inline std::vector<double> gradient_U(const RhoObjective& obj, const std::vector<double>& d) {
    detail::require_size(obj, d, "gradient_U");
    detail::require_positive(d, "gradient_U");
    const auto& mu = obj.weights.mu;
    std::vector<double> g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        g[i] = std::pow(mu[i] / d[i], obj.rho);
        if (!std::isfinite(g[i]))
            throw std::overflow_error(
                "gradient_U: entry overflow, use log_gradient_weights");
    }
    return g;
}

struct LogGradient {
    std::vector<double> weights;  // max entry exactly 1
    double shift = 0.0;           // log of the dropped common factor
};

/// Gradient computed in the log domain and renormalized so the largest
/// entry is exactly 1: weights[i] = exp(rho*(log mu_i - log d_i) - shift).
/// Proportional to gradient_U with identical argmax set, and never
/// overflows no matter how large rho is.
inline LogGradient log_gradient(const RhoObjective& obj, const std::vector<double>& d_hat) {
    detail::require_size(obj, d_hat, "log_gradient_weights");
    detail::require_positive(d_hat, "log_gradient_weights");
    const auto& mu = obj.weights.mu;
    std::vector<double> logs(d_hat.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d_hat.size(); ++i) {
        logs[i] = obj.rho * (std::log(mu[i]) - std::log(d_hat[i]));
        m = std::max(m, logs[i]);
    }
    LogGradient out;
    out.shift = m;
    out.weights.resize(d_hat.size());
    for (std::size_t i = 0; i < d_hat.size(); ++i) {
        // floor entries the exponential underflows so the vector stays positive
        out.weights[i] = std::max(std::exp(logs[i] - m),
                                  std::numeric_limits<double>::denorm_min());
    }
    return out;
}

inline std::vector<double> log_gradient_weights(const RhoObjective& obj,
                                                const std::vector<double>& d_hat) {
    return log_gradient(obj, d_hat).weights;
}

/// Gradient-Lipschitz constant of U_rho on the restricted set
/// {d : d >= 2*eta}: C = rho * mu_max^rho / (2^(rho+1) * eta^(rho+1)).
inline double smoothness_constant(const RhoObjective& obj, double eta) {
    if (!(eta > 0.0 && eta < 0.5))
        throw std::invalid_argument("smoothness_constant: eta must be in (0, 1/2)");
    return obj.rho * std::pow(obj.weights.mu_max, obj.rho) /
           (std::pow(2.0, obj.rho + 1.0) * std::pow(eta, obj.rho + 1.0));
}

/// V_rho = ((1-rho) U_rho)^(1/rho) = (sum_i d_i (mu_i/d_i)^rho)^(1/rho),
/// evaluated by log-sum-exp so arbitrarily large rho stays finite.
/// Satisfies d_{i*}^(1/rho) * r_max <= V_rho <= r_max.
inline double v_rho(const RhoObjective& obj, const std::vector<double>& d) {
    if (!(obj.rho > 1.0)) throw std::invalid_argument("v_rho: requires rho > 1");
    detail::require_size(obj, d, "v_rho");
    detail::require_positive(d, "v_rho");
    const auto& mu = obj.weights.mu;
    std::vector<double> logs(d.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.size(); ++i) {
        logs[i] = std::log(d[i]) + obj.rho * (std::log(mu[i]) - std::log(d[i]));
        m = std::max(m, logs[i]);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - m);
    return std::exp((m + std::log(acc)) / obj.rho);
}

struct MaxRatio {
    double value = 0.0;
    std::size_t index = 0;  // first attaining pair in row-major order
};

inline MaxRatio max_ratio(const CoverageWeights& weights, const std::vector<double>& d) {
    if (weights.size() != d.size()) throw std::invalid_argument("max_ratio: size mismatch");
    detail::require_positive(d, "max_ratio");
    MaxRatio best{-std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = weights.mu[i] / d[i];
        if (r > best.value) {
            best.value = r;
            best.index = i;
        }
    }
    return best;
}

/// KL(p || q) with the 0 log 0 = 0 convention. Requires q > 0 wherever
/// p > 0.
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0) throw std::domain_error("kl_divergence: negative probability");
        if (p[i] == 0.0) continue;
        if (!(q[i] > 0.0))
            throw std::domain_error("kl_divergence: q has zero mass inside support of p");
        total += p[i] * std::log(p[i] / q[i]);
    }
    return total;
}

}  // namespace covex
