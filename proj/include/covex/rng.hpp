#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace covex {

/// Seeded random source for simulation and instance generation.
///
/// All variates are derived from the mt19937_64 stream through fixed
/// arithmetic (no std::*_distribution), so a given seed produces the same
/// sequence on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) built from the top 53 bits of one draw.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one variate per call).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Gamma(alpha, 1) by Marsaglia-Tsang; alpha < 1 boosted through
    /// Gamma(alpha + 1) * U^(1/alpha).
    double gamma(double alpha) {
        if (!(alpha > 0.0)) throw std::invalid_argument("gamma: alpha must be > 0");
        if (alpha < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            const double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = uniform();
            if (u <= 0.0) continue;
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Symmetric Dirichlet(alpha) sample of dimension n.
    std::vector<double> dirichlet(std::size_t n, double alpha) {
        std::vector<double> x(n);
        double sum = 0.0;
        for (auto& xi : x) {
            xi = gamma(alpha);
            sum += xi;
        }
        if (sum <= 0.0) {
            // all draws underflowed (tiny alpha): fall back to uniform
            for (auto& xi : x) xi = 1.0 / static_cast<double>(n);
            return x;
        }
        for (auto& xi : x) xi /= sum;
        return x;
    }

private:
    std::mt19937_64 engine_;
};

/// Index of the inverse-CDF cell containing u, for a probability row.
/// Falls back to the last positive entry when u lands past the
/// accumulated mass (rows sum to 1 only up to rounding).
inline int inverse_cdf_index(std::span<const double> probs, double u) {
    double cum = 0.0;
    int last_pos = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_pos = static_cast<int>(i);
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    if (last_pos < 0) throw std::domain_error("inverse_cdf_index: all-zero row");
    return last_pos;
}

}  // namespace covex
