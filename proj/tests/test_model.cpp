#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using namespace drmdp;
using drmdp::testing::random_model;
using drmdp::testing::single_slot_model;
using drmdp::testing::small_model;

namespace {

// Independent count: walk every (price, s, g) tuple in a bounding box and
// keep the admissible ones.
std::size_t brute_force_count(int prices, int W, int W_hat, int g_max) {
    std::size_t n = 0;
    for (int p = 0; p < prices; ++p)
        for (int g = 0; g <= g_max; ++g)
            for (int s = -W - W_hat - 1; s <= W + W_hat + 1; ++s) {
                const bool ok = g == 0 ? (s >= 0 && s <= W_hat) : (s >= -W && s <= W);
                n += ok ? 1 : 0;
            }
    return n;
}

} // namespace

TEST_CASE("state counts of the reference instances") {
    CHECK(state_space_size(default_instance()) == 96);
    CHECK(state_space_size(single_slot_model()) == 2);
    CHECK(state_space_size(small_model()) == 10);
    CHECK(enumerate_states(default_instance()).size() == 96);
}

TEST_CASE("minimal instance enumerates the idle and the request state") {
    const auto states = enumerate_states(single_slot_model());
    REQUIRE(states.size() == 2);
    CHECK(states[0] == State{0, 0, 0});
    CHECK(states[1] == State{0, 0, 1});
}

TEST_CASE("size formula matches enumeration on random dimensions") {
    std::mt19937_64 gen(12345);
    std::uniform_int_distribution<int> dp(1, 5), dw(0, 6), dwh(0, 8), dg(1, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const int P = dp(gen), W = dw(gen), Wh = dwh(gen), G = dg(gen);
        const auto m = random_model(gen, P, W, Wh, G);
        const auto states = enumerate_states(m);
        CAPTURE(P, W, Wh, G);
        CHECK(state_space_size(m) == brute_force_count(P, W, Wh, G));
        CHECK(states.size() == brute_force_count(P, W, Wh, G));
        CHECK(std::set<State>(states.begin(), states.end()).size() == states.size());
    }
}

TEST_CASE("index and state are inverse bijections") {
    const auto m = default_instance();
    const StateSpace space(m);
    const auto states = enumerate_states(m);
    for (std::size_t k = 0; k < states.size(); ++k) {
        CHECK(space.index(states[k]) == k);
        CHECK(space.contains(states[k]));
    }
    CHECK_THROWS_AS(space.index(State{0, -1, 0}), ModelError);
    CHECK_THROWS_AS(space.index(State{0, 5, 1}), ModelError);
    CHECK_THROWS_AS(space.index(State{4, 0, 0}), ModelError);
    CHECK_THROWS_AS(space.index(State{0, 0, 3}), ModelError);
}

TEST_CASE("validation names the offending field") {
    auto expect_path = [](DeviceModel m, const std::string& path) {
        try {
            validate(m);
            FAIL("expected ModelError at " << path);
        } catch (const ModelError& e) {
            CHECK(e.path() == path);
        }
    };
    SECTION("row sum") {
        auto m = small_model();
        m.price_chain.transition[1] = {0.3, 0.6};
        expect_path(m, "price_transition[1]");
    }
    SECTION("reducible chain") {
        auto m = small_model();
        m.price_chain.transition = {{1.0, 0.0}, {0.5, 0.5}};
        CHECK_THROWS_AS(validate(m), ModelError);
    }
    SECTION("periodic chain") {
        auto m = small_model();
        m.price_chain.transition = {{0.0, 1.0}, {1.0, 0.0}};
        CHECK_THROWS_AS(validate(m), ModelError);
    }
    SECTION("continuation at the end of the window") {
        auto m = small_model();
        m.requests.continuation.at(1, 1) = 0.1;
        expect_path(m, "requests.continuation[2][0]");
    }
    SECTION("arrival mass") {
        auto m = small_model();
        m.requests.arrival.at(1, 0, 1) = 0.8;
        expect_path(m, "requests.arrival[1]");
    }
    SECTION("negative dissatisfaction") {
        auto m = small_model();
        m.dissatisfaction.u_r.at(1, 1) = -1.0;
        expect_path(m, "dissatisfaction.u_r[2][0]");
    }
    SECTION("regen outside the state space") {
        auto m = small_model();
        m.requests.regen = {{2, 0, 1.0}};
        expect_path(m, "requests.regen[0]");
    }
    SECTION("declared compliant but on-target cost is nonzero") {
        auto m = small_model();
        m.dissatisfaction.u_r.at(0, 1) = 0.5;
        expect_path(m, "theorem1_compliant");
        m.theorem1_compliant = false;
        CHECK_NOTHROW(validate(m));
        const auto v = theorem1_violations(m);
        REQUIRE(v.size() == 1);
        CHECK(v[0].find("condition (c)") != std::string::npos);
    }
    SECTION("cancellation before target must be free when compliant") {
        auto m = small_model();
        m.dissatisfaction.u_c.at(-1, 1) = 0.5;
        expect_path(m, "theorem1_compliant");
    }
    SECTION("alpha outside (0, 1)") {
        auto m = small_model();
        m.params.alpha = 1.0;
        CHECK_THROWS_AS(validate(m), ModelError);
    }
}

TEST_CASE("stationary distribution of two-state chains") {
    SECTION("symmetric") {
        const auto pi = stationary_distribution(PriceChain{{1.0, 2.0}, {{0.7, 0.3}, {0.3, 0.7}}});
        CHECK(pi[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(pi[1] == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("flip probabilities 0.2 and 0.3") {
        // balance: 0.2 pi0 = 0.3 pi1, pi0 + pi1 = 1
        const auto pi = stationary_distribution(PriceChain{{1.0, 2.0}, {{0.8, 0.2}, {0.3, 0.7}}});
        CHECK(pi[0] == Catch::Approx(0.6).margin(1e-12));
        CHECK(pi[1] == Catch::Approx(0.4).margin(1e-12));
    }
}

TEST_CASE("stationary distribution is invariant under the chain") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_model(gen, 2 + trial % 5, 1, 1, 1);
        const auto& chain = m.price_chain;
        const auto pi = stationary_distribution(chain);
        double total = 0.0;
        for (std::size_t j = 0; j < pi.size(); ++j) {
            double flow = 0.0;
            for (std::size_t i = 0; i < pi.size(); ++i) flow += pi[i] * chain.transition[i][j];
            CHECK(flow == Catch::Approx(pi[j]).margin(1e-12));
            CHECK(pi[j] > 0.0);
            total += pi[j];
        }
        CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
}
