#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "covex/errors.hpp"

namespace covex::lp {

enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
    }
    return "?";
}

struct Options {
    double pivot_tol = 1e-10;
    double feas_tol = 1e-8;
    int max_iterations = 50000;
};

struct Result {
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

/// Two-phase dense primal simplex for
///     maximize c.x  subject to  A x = b, x >= 0.
///
/// Bland's rule on both the entering and leaving choices keeps the pivot
/// sequence cycle-free and fully deterministic, so identical inputs give
/// bit-identical vertices. Redundant equality rows (the occupancy
/// polytope always carries one) are detected in phase one and dropped.
/// Sized for desk-scale problems: everything is a dense tableau.
inline Result maximize(std::vector<std::vector<double>> a, std::vector<double> b,
                       const std::vector<double>& c, const Options& opt = {}) {
    const std::size_t m = a.size();
    const std::size_t n = c.size();
    for (const auto& row : a)
        if (row.size() != n) throw std::invalid_argument("lp::maximize: ragged constraint row");
    if (b.size() != m) throw std::invalid_argument("lp::maximize: rhs size mismatch");

    // keep originals for the final feasibility audit
    const std::vector<std::vector<double>> a0 = a;
    const std::vector<double> b0 = b;

    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            for (auto& v : a[i]) v = -v;
            b[i] = -b[i];
        }
    }

    const std::size_t width = n + m + 1;  // structural vars, artificials, rhs
    std::vector<std::vector<double>> t(m, std::vector<double>(width, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
        basis[i] = n + i;
    }

    int iterations = 0;
    const auto pivot = [&](std::size_t pr, std::size_t pc) {
        const double piv = t[pr][pc];
        for (auto& v : t[pr]) v /= piv;
        for (std::size_t r = 0; r < t.size(); ++r) {
            if (r == pr) continue;
            const double f = t[r][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) t[r][j] -= f * t[pr][j];
        }
        basis[pr] = pc;
    };

    // One simplex phase under Bland's rule. cost covers columns < ncols.
    const auto run = [&](const std::vector<double>& cost, std::size_t ncols) -> Status {
        for (;;) {
            if (++iterations > opt.max_iterations)
                throw NumericalError("lp::maximize: stalled after " +
                                     std::to_string(iterations) + " pivots (m=" +
                                     std::to_string(t.size()) + ", n=" + std::to_string(n) +
                                     ")");
            // reduced costs, recomputed fresh each pass (problems are tiny)
            std::size_t enter = width;
            for (std::size_t j = 0; j < ncols; ++j) {
                double red = cost[j];
                for (std::size_t i = 0; i < t.size(); ++i)
                    red -= cost[basis[i]] * t[i][j];
                if (red > opt.pivot_tol) {
                    enter = j;
                    break;  // Bland: lowest improving index
                }
            }
            if (enter == width) return Status::optimal;

            std::size_t leave = t.size();
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i][enter] > opt.pivot_tol) {
                    const double ratio = t[i][width - 1] / t[i][enter];
                    if (leave == t.size() || ratio < best_ratio - 1e-15 ||
                        (std::abs(ratio - best_ratio) <= 1e-15 &&
                         basis[i] < basis[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave == t.size()) return Status::unbounded;
            pivot(leave, enter);
        }
    };

    Result result;

    // ---- phase one: minimize the artificial mass
    std::vector<double> phase1_cost(width - 1, 0.0);
    for (std::size_t j = n; j < n + m; ++j) phase1_cost[j] = -1.0;
    run(phase1_cost, n + m);

    double artificial_mass = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (basis[i] >= n) artificial_mass += t[i][width - 1];
    if (artificial_mass > opt.feas_tol) {
        result.status = Status::infeasible;
        result.iterations = iterations;
        return result;
    }

    // drive leftover artificials out of the basis; rows that offer no
    // structural pivot are redundant constraints and get dropped
    for (std::size_t i = 0; i < t.size();) {
        if (basis[i] < n) {
            ++i;
            continue;
        }
        std::size_t col = width;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(t[i][j]) > opt.pivot_tol) {
                col = j;
                break;
            }
        }
        if (col < width) {
            pivot(i, col);
            ++i;
        } else {
            t.erase(t.begin() + static_cast<std::ptrdiff_t>(i));
            basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }

    // ---- phase two: the real objective, artificial columns banned
    std::vector<double> phase2_cost(width - 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = c[j];
    const Status status = run(phase2_cost, n);
    if (status == Status::unbounded) {
        result.status = Status::unbounded;
        result.iterations = iterations;
        return result;
    }

    result.x.assign(n, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (basis[i] < n) result.x[basis[i]] = t[i][width - 1];

    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double acc = -b0[i];
        for (std::size_t j = 0; j < n; ++j) acc += a0[i][j] * result.x[j];
        worst = std::max(worst, std::abs(acc));
    }
    if (worst > opt.feas_tol)
        throw NumericalError("lp::maximize: solution violates constraints by " +
                             std::to_string(worst));

    result.status = Status::optimal;
    result.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) result.objective += c[j] * result.x[j];
    result.iterations = iterations;
    return result;
}

}  // namespace covex::lp
