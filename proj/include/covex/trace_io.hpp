#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "covex/errors.hpp"
#include "covex/explorer.hpp"

namespace covex {

/// Shortest text form that round-trips a double exactly (17 significant
/// digits), so CSV consumers can re-verify without drift.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct TraceCsvOptions {
    bool include_occupancy = false;  // append flattened d_hat columns d_s_a
    bool include_timing = false;     // real wall_ms; off keeps output reproducible
};

/// One row per episode: k,t_k,tau_k,beta_k,U_hat,U_star,xi_k,max_ratio,
/// lp_value,wall_ms. xi and U_star come from the caller because the
/// comparator d* is solved separately.
inline std::string trace_csv(const ExplorationTrace& trace, const std::vector<double>& xi,
                             double u_star, const TraceCsvOptions& opt = {}) {
    if (!xi.empty() && xi.size() != trace.episodes.size())
        throw std::invalid_argument("trace_csv: xi series length mismatch");

    std::string out = "k,t_k,tau_k,beta_k,U_hat,U_star,xi_k,max_ratio,lp_value,wall_ms";
    if (opt.include_occupancy) {
        for (int s = 0; s < trace.final_counts.num_states; ++s)
            for (int a = 0; a < trace.final_counts.num_actions; ++a)
                out += ",d_" + std::to_string(s) + "_" + std::to_string(a);
    }
    out += '\n';

    for (std::size_t i = 0; i < trace.episodes.size(); ++i) {
        const auto& ep = trace.episodes[i];
        out += std::to_string(ep.k);
        out += ',' + std::to_string(ep.t_start);
        out += ',' + std::to_string(ep.tau);
        out += ',' + fmt17(ep.beta);
        out += ',' + fmt17(ep.u_hat);
        out += ',' + fmt17(u_star);
        out += ',' + fmt17(xi.empty() ? std::nan("") : xi[i]);
        out += ',' + fmt17(ep.max_ratio);
        out += ',' + fmt17(ep.lp_value);
        out += ',' + fmt17(opt.include_timing ? ep.wall_ms : 0.0);
        if (opt.include_occupancy)
            for (double v : ep.d_hat) out += ',' + fmt17(v);
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("write_text_file: cannot write " + path);
    out << content;
}

}  // namespace covex
