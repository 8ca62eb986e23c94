#include <catch2/catch_amalgamated.hpp>

#include "covex/mdp.hpp"
#include "support.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("validate_mdp flags a periodic two-state cycle") {
    const auto m = testsupport::deterministic_cycle(2, 2);
    const auto report = covex::validate_mdp(m);
    REQUIRE_FALSE(report.ok);
    REQUIRE_THAT(report.message(), ContainsSubstring("aperiodicity"));
    REQUIRE_THAT(report.message(), ContainsSubstring("period 2"));
}

TEST_CASE("validate_mdp reports the first bad row sum") {
    covex::MdpModel m{2, 1, {0.5, 0.6, 0.5, 0.5}};
    const auto report = covex::validate_mdp(m);
    REQUIRE_FALSE(report.ok);
    REQUIRE_THAT(report.message(), ContainsSubstring("row sum 1.1"));
}

TEST_CASE("validate_mdp reports unreachable states") {
    // state 2 is absorbing-from-nowhere: nothing reaches it
    covex::MdpModel m{3, 1, {0.5, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0}};
    const auto report = covex::validate_mdp(m);
    REQUIRE_FALSE(report.ok);
    REQUIRE_THAT(report.message(), ContainsSubstring("irreducibility"));
}

TEST_CASE("validate_mdp distinguishes structural errors") {
    covex::MdpModel m{2, 2, {0.5, 0.5}};  // far too short
    REQUIRE_THROWS_AS(covex::validate_mdp(m), std::invalid_argument);
}

TEST_CASE("generated models are ergodic and bounded below") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int S = 2 + static_cast<int>(seed % 5);
        const int A = 1 + static_cast<int>(seed % 3);
        const double lambda = 0.1;
        const auto m = covex::random_ergodic_mdp(S, A, 1.0, lambda, seed);
        REQUIRE(covex::validate_mdp(m).ok);
        for (double p : m.kernel) REQUIRE(p >= lambda / S);
    }
}

TEST_CASE("generator is deterministic in the seed") {
    const auto a = covex::random_ergodic_mdp(4, 3, 0.7, 0.05, 42);
    const auto b = covex::random_ergodic_mdp(4, 3, 0.7, 0.05, 42);
    const auto c = covex::random_ergodic_mdp(4, 3, 0.7, 0.05, 43);
    REQUIRE(a.kernel == b.kernel);
    REQUIRE(a.kernel != c.kernel);
}

TEST_CASE("generator rejects bad parameters") {
    REQUIRE_THROWS_AS(covex::random_ergodic_mdp(0, 2, 1.0, 0.1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(covex::random_ergodic_mdp(3, 2, -1.0, 0.1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(covex::random_ergodic_mdp(3, 2, 1.0, 0.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(covex::random_ergodic_mdp(3, 2, 1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("stationary distribution of the textbook two-state chain") {
    // p = 0.3 out of state 0, q = 0.6 out of state 1 -> psi = (2/3, 1/3)
    const auto m = testsupport::two_state_chain(0.3, 0.6);
    const auto psi = covex::stationary_distribution(m, covex::uniform_policy(2, 1));
    REQUIRE(psi[0] == Approx(2.0 / 3.0).epsilon(1e-12));
    REQUIRE(psi[1] == Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("doubly stochastic chains have the uniform fixed point") {
    const auto m = testsupport::circulant_model();
    const auto psi = covex::stationary_distribution(m, covex::uniform_policy(3, 2));
    for (double v : psi) REQUIRE(v == Approx(1.0 / 3.0).margin(1e-13));
}

TEST_CASE("stationary distribution matches the power-iteration oracle") {
    covex::Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = covex::random_ergodic_mdp(5, 2, 1.0, 0.05, 100 + trial);
        const auto pi = testsupport::random_policy(rng, 5, 2);
        const auto direct = covex::stationary_distribution(m, pi);
        const auto iterated = testsupport::power_iteration(m, pi);
        REQUIRE(testsupport::linf(direct, iterated) < 1e-12);
    }
}

TEST_CASE("stationary distribution satisfies the fixed-point residual bound") {
    covex::Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const int S = 2 + trial % 5;
        const int A = 1 + trial % 3;
        const auto m = covex::random_ergodic_mdp(S, A, 0.8, 0.05, 500 + trial);
        const auto pi = testsupport::random_policy(rng, S, A);
        const auto psi = covex::stationary_distribution(m, pi);
        const auto p = covex::induced_transition(m, pi);
        double sum = 0.0;
        for (int j = 0; j < S; ++j) {
            double acc = 0.0;
            for (int i = 0; i < S; ++i) acc += psi[i] * p[i * S + j];
            REQUIRE(std::abs(acc - psi[j]) <= 1e-10);
            REQUIRE(psi[j] >= 0.0);
            sum += psi[j];
        }
        REQUIRE(sum == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("multiple recurrent classes raise ErgodicityError") {
    covex::MdpModel m{4, 1, {}};
    m.kernel = {0.5, 0.5, 0.0, 0.0,   //
                0.5, 0.5, 0.0, 0.0,   //
                0.0, 0.0, 0.5, 0.5,   //
                0.0, 0.0, 0.5, 0.5};  // two disjoint blocks
    REQUIRE_THROWS_AS(covex::stationary_distribution(m, covex::uniform_policy(4, 1)),
                      covex::ErgodicityError);
}

TEST_CASE("step follows a point-mass row") {
    covex::MdpModel m{3, 1, {0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.0}};
    covex::Rng rng(99);
    for (int i = 0; i < 50; ++i) REQUIRE(covex::step(m, 0, 0, rng) == 2);
}

TEST_CASE("step implements inverse CDF over one uniform draw") {
    const auto m = testsupport::two_state_chain(0.5, 0.5);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double u = covex::Rng(seed).uniform();
        covex::Rng rng(seed);
        const int expected = u < 0.5 ? 0 : 1;
        REQUIRE(covex::step(m, 0, 0, rng) == expected);
    }
}

TEST_CASE("step rejects out-of-range indices") {
    const auto m = testsupport::two_state_chain(0.3, 0.6);
    covex::Rng rng(1);
    REQUIRE_THROWS_AS(covex::step(m, 2, 0, rng), std::out_of_range);
    REQUIRE_THROWS_AS(covex::step(m, 0, 1, rng), std::out_of_range);
}

TEST_CASE("step frequencies match the row over many draws") {
    covex::MdpModel m{3, 1, {0.2, 0.3, 0.5, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0}};
    covex::Rng rng(2024);
    std::vector<int> hits(3, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(covex::step(m, 0, 0, rng))];
    REQUIRE(std::abs(hits[0] / double(n) - 0.2) < 0.01);
    REQUIRE(std::abs(hits[1] / double(n) - 0.3) < 0.01);
    REQUIRE(std::abs(hits[2] / double(n) - 0.5) < 0.01);
}

TEST_CASE("step streams are bit-reproducible") {
    const auto m = covex::random_ergodic_mdp(4, 2, 1.0, 0.05, 5);
    const auto run = [&m](std::uint64_t seed) {
        covex::Rng rng(seed);
        std::vector<int> states;
        int s = 0;
        for (int i = 0; i < 1000; ++i) {
            s = covex::step(m, s, i % 2, rng);
            states.push_back(s);
        }
        return states;
    };
    REQUIRE(run(31) == run(31));
    REQUIRE(run(31) != run(32));
}

TEST_CASE("long trajectories visit states at stationary frequency") {
    const auto m = covex::random_ergodic_mdp(5, 2, 1.0, 0.05, 77);
    covex::Rng rng(3);
    const auto pi = testsupport::random_policy(rng, 5, 2);
    const auto psi = covex::stationary_distribution(m, pi);

    covex::Rng sim(4);
    std::vector<std::int64_t> visits(5, 0);
    int s = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        ++visits[static_cast<std::size_t>(s)];
        const int a = covex::sample_action(pi, s, sim);
        s = covex::step(m, s, a, sim);
    }
    for (int j = 0; j < 5; ++j)
        REQUIRE(std::abs(visits[j] / double(n) - psi[j]) < 0.01);
}
