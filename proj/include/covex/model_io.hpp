#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covex/coverage.hpp"
#include "covex/errors.hpp"
#include "covex/mdp.hpp"

namespace covex {

struct LoadedModel {
    MdpModel model;
    std::optional<CoverageWeights> weights;  // the optional "mu" table
};

/// Reads {"S", "A", "P", "mu"?} with P indexed (s, a, s'). Kernel rows
/// off true by more than 1e-9 are rejected; smaller drift (serialization
/// rounding) is renormalized away.
inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_model: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("load_model: " + path + ": " + e.what());
    }

    if (!doc.contains("S") || !doc.contains("A") || !doc.contains("P"))
        throw ValidationError("load_model: missing required field S, A, or P");
    MdpModel model;
    model.num_states = doc["S"].get<int>();
    model.num_actions = doc["A"].get<int>();
    if (model.num_states < 1 || model.num_actions < 1)
        throw ValidationError("load_model: S and A must be positive");

    const auto& p = doc["P"];
    if (!p.is_array() || p.size() != static_cast<std::size_t>(model.num_states))
        throw ValidationError("load_model: P must have S outer entries");
    model.kernel.resize(model.num_pairs() * static_cast<std::size_t>(model.num_states));
    for (int s = 0; s < model.num_states; ++s) {
        if (!p[s].is_array() || p[s].size() != static_cast<std::size_t>(model.num_actions))
            throw ValidationError("load_model: P[" + std::to_string(s) +
                                  "] must have A entries");
        for (int a = 0; a < model.num_actions; ++a) {
            const auto& row = p[s][a];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(model.num_states))
                throw ValidationError("load_model: P[" + std::to_string(s) + "][" +
                                      std::to_string(a) + "] must have S entries");
            double sum = 0.0;
            for (int s2 = 0; s2 < model.num_states; ++s2) {
                const double v = row[s2].get<double>();
                if (!std::isfinite(v) || v < 0.0)
                    throw ValidationError("load_model: kernel entry out of range at (s=" +
                                          std::to_string(s) + ", a=" + std::to_string(a) + ")");
                model.kernel[model.sa_index(s, a) * model.num_states + s2] = v;
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw ValidationError("load_model: kernel row (s=" + std::to_string(s) +
                                      ", a=" + std::to_string(a) + ") sums to " +
                                      std::to_string(sum));
            if (sum != 1.0) {
                for (int s2 = 0; s2 < model.num_states; ++s2)
                    model.kernel[model.sa_index(s, a) * model.num_states + s2] /= sum;
            }
        }
    }

    LoadedModel out{std::move(model), std::nullopt};
    if (doc.contains("mu")) {
        const auto& mu = doc["mu"];
        if (!mu.is_array() || mu.size() != static_cast<std::size_t>(out.model.num_states))
            throw ValidationError("load_model: mu must have S rows");
        std::vector<double> flat;
        flat.reserve(out.model.num_pairs());
        for (int s = 0; s < out.model.num_states; ++s) {
            if (!mu[s].is_array() ||
                mu[s].size() != static_cast<std::size_t>(out.model.num_actions))
                throw ValidationError("load_model: mu rows must have A entries");
            for (int a = 0; a < out.model.num_actions; ++a)
                flat.push_back(mu[s][a].get<double>());
        }
        try {
            out.weights = CoverageWeights(std::move(flat));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("load_model: bad mu table: ") + e.what());
        }
    }
    return out;
}

inline void save_model(const std::string& path, const MdpModel& model,
                       const std::optional<CoverageWeights>& weights = std::nullopt) {
    nlohmann::ordered_json doc;
    doc["S"] = model.num_states;
    doc["A"] = model.num_actions;
    auto p = nlohmann::ordered_json::array();
    for (int s = 0; s < model.num_states; ++s) {
        auto per_state = nlohmann::ordered_json::array();
        for (int a = 0; a < model.num_actions; ++a) {
            auto row = nlohmann::ordered_json::array();
            for (int s2 = 0; s2 < model.num_states; ++s2) row.push_back(model.prob(s, a, s2));
            per_state.push_back(std::move(row));
        }
        p.push_back(std::move(per_state));
    }
    doc["P"] = std::move(p);
    if (weights) {
        auto mu = nlohmann::ordered_json::array();
        for (int s = 0; s < model.num_states; ++s) {
            auto row = nlohmann::ordered_json::array();
            for (int a = 0; a < model.num_actions; ++a)
                row.push_back(weights->mu[model.sa_index(s, a)]);
            mu.push_back(std::move(row));
        }
        doc["mu"] = std::move(mu);
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("save_model: cannot write " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace covex
