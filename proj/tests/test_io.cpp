#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "covex/model_io.hpp"
#include "covex/trace_io.hpp"
#include "support.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "covex_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("model save/load round trip is exact") {
    const auto m = covex::random_ergodic_mdp(4, 3, 1.0, 0.05, 99);
    covex::Rng rng(3);
    std::vector<double> mu(12);
    for (auto& v : mu) v = rng.uniform(0.5, 2.0);

    const auto path = temp_file("roundtrip.json");
    covex::save_model(path.string(), m, covex::CoverageWeights(mu));
    const auto loaded = covex::load_model(path.string());

    REQUIRE(loaded.model.num_states == 4);
    REQUIRE(loaded.model.num_actions == 3);
    // doubles round-trip exactly; row renormalization may shift single ulps
    REQUIRE(testsupport::linf(loaded.model.kernel, m.kernel) <= 1e-15);
    REQUIRE(loaded.weights.has_value());
    REQUIRE(loaded.weights->mu == mu);
    REQUIRE(covex::validate_mdp(loaded.model).ok);
}

TEST_CASE("loader rejects rows that are far from stochastic") {
    const auto path = temp_file("bad_row.json");
    std::ofstream(path) << R"({"S":2,"A":1,"P":[[[0.5,0.6]],[[0.5,0.5]]]})";
    REQUIRE_THROWS_AS(covex::load_model(path.string()), covex::ValidationError);
    try {
        covex::load_model(path.string());
    } catch (const covex::ValidationError& e) {
        REQUIRE_THAT(e.what(), ContainsSubstring("sums to"));
    }
}

TEST_CASE("loader renormalizes sub-tolerance drift") {
    const auto path = temp_file("drift.json");
    std::ofstream(path) << R"({"S":2,"A":1,"P":[[[0.70000000005,0.3]],[[0.6,0.4]]]})";
    const auto loaded = covex::load_model(path.string());
    double sum = 0.0;
    for (int s2 = 0; s2 < 2; ++s2) sum += loaded.model.prob(0, 0, s2);
    REQUIRE(sum == Approx(1.0).margin(1e-15));
    REQUIRE(covex::validate_mdp(loaded.model).ok);
}

TEST_CASE("loader names missing or malformed fields") {
    const auto missing = temp_file("missing.json");
    std::ofstream(missing) << R"({"S":2,"A":1})";
    REQUIRE_THROWS_AS(covex::load_model(missing.string()), covex::ValidationError);

    const auto ragged = temp_file("ragged.json");
    std::ofstream(ragged) << R"({"S":2,"A":1,"P":[[[1.0,0.0]]]})";
    REQUIRE_THROWS_AS(covex::load_model(ragged.string()), covex::ValidationError);

    const auto bad_mu = temp_file("bad_mu.json");
    std::ofstream(bad_mu)
        << R"({"S":2,"A":1,"P":[[[0.5,0.5]],[[0.5,0.5]]],"mu":[[1.0],[0.0]]})";
    REQUIRE_THROWS_AS(covex::load_model(bad_mu.string()), covex::ValidationError);

    REQUIRE_THROWS_AS(covex::load_model("/nonexistent/covex.json"), covex::ValidationError);
}

TEST_CASE("fmt17 round-trips doubles exactly") {
    for (double v : {1.0 / 3.0, 0.1, 2.5e-300, 6.02e23, -0.0, 1.7976931348623157e308}) {
        const double back = std::strtod(covex::fmt17(v).c_str(), nullptr);
        REQUIRE(back == v);
    }
}

TEST_CASE("trace CSV layout") {
    const auto m = covex::random_ergodic_mdp(2, 2, 1.0, 0.05, 5);
    covex::ExplorationConfig config;
    config.rho = 2.0;
    config.weights = covex::CoverageWeights::uniform(4);
    config.eta = 0.02;
    config.tau1 = 6;
    config.num_episodes = 1;
    config.seed = 2;
    const auto trace = covex::run_exploration(m, config);
    const std::vector<double> xi = {0.125};

    const auto csv = covex::trace_csv(trace, xi, -1.5);
    std::size_t newlines = 0;
    for (char c : csv) newlines += c == '\n';
    REQUIRE(newlines == 2);  // header + one episode
    REQUIRE(csv.rfind("k,t_k,tau_k,beta_k,U_hat,U_star,xi_k,max_ratio,lp_value,wall_ms\n", 0) ==
            0);
    REQUIRE_THAT(csv, ContainsSubstring("0.125"));
    REQUIRE_THAT(csv, ContainsSubstring(",0\n"));  // timing suppressed by default

    covex::TraceCsvOptions opt;
    opt.include_occupancy = true;
    const auto wide = covex::trace_csv(trace, xi, -1.5, opt);
    REQUIRE_THAT(wide, ContainsSubstring("d_0_0,d_0_1,d_1_0,d_1_1"));

    REQUIRE_THROWS_AS(covex::trace_csv(trace, {0.1, 0.2}, -1.5), std::invalid_argument);
}
