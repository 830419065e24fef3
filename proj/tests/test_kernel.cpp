#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <map>

using namespace drmdp;
using drmdp::testing::random_model;
using drmdp::testing::small_model;

namespace {

double total_prob(const std::vector<TransitionOutcome>& outs) {
    double t = 0.0;
    for (const auto& o : outs) t += o.prob;
    return t;
}

// Probability of each device portion (s, g) summed over price successors.
std::map<std::pair<int, int>, double> device_marginal(const std::vector<TransitionOutcome>& outs) {
    std::map<std::pair<int, int>, double> m;
    for (const auto& o : outs) m[{o.next.s, o.next.g}] += o.prob;
    return m;
}

} // namespace

TEST_CASE("idle state with no arrivals only ages") {
    auto m = default_instance();
    for (int s = 0; s <= m.params.W_hat; ++s)
        for (int dd = -m.params.W; dd <= 0; ++dd)
            for (int g = 1; g <= m.params.g_max; ++g) m.requests.arrival.at(s, dd, g) = 0.0;
    for (int price = 0; price < 4; ++price) {
        const auto outs = transitions(m, State{price, 3, 0}, Action::Off);
        const auto& row = m.price_chain.transition[static_cast<std::size_t>(price)];
        std::size_t positive = 0;
        for (double p : row) positive += p > 0.0 ? 1 : 0;
        REQUIRE(outs.size() == positive);
        for (const auto& o : outs) {
            CHECK(o.next.s == 4);
            CHECK(o.next.g == 0);
            CHECK(o.prob == row[static_cast<std::size_t>(o.next.price_idx)]);
            CHECK(o.cost == 0.0);
            CHECK_FALSE(o.episode_ended);
        }
    }
}

TEST_CASE("request at the end of the window is canceled with certainty") {
    const auto m = default_instance();
    const int W = m.params.W;
    const auto outs = transitions(m, State{1, W, 1}, Action::Off);
    CHECK(total_prob(outs) == Catch::Approx(1.0).margin(1e-12));
    for (const auto& o : outs) {
        CHECK(o.episode_ended);
        CHECK(o.cost == m.params.gamma * m.dissatisfaction.u_c(W, 1));
        CHECK(o.next.s == 0);
        CHECK(o.next.g == 0);
    }
}

TEST_CASE("serving an on-target request costs the bill and regenerates") {
    auto m = with_gamma(default_instance(), 2.5);
    const auto outs = transitions(m, State{2, 0, 1}, Action::On);
    CHECK(total_prob(outs) == Catch::Approx(1.0).margin(1e-12));
    for (const auto& o : outs) {
        CHECK(o.cost == Catch::Approx(15.0 * 1.0 + 2.5 * m.dissatisfaction.u_r(0, 1)));
        CHECK(o.bill == 15.0);
        CHECK(o.next.s == 0);
        CHECK(o.next.g == 0);
        CHECK(o.episode_ended);
    }
}

TEST_CASE("self-initiated job costs the bill plus u_e") {
    const auto m = with_gamma(default_instance(), 3.0);
    for (int s = 0; s <= m.params.W_hat; ++s)
        for (const auto& o : transitions(m, State{3, s, 0}, Action::On)) {
            CHECK(o.cost == Catch::Approx(20.0 + 3.0 * m.dissatisfaction.u_e[static_cast<std::size_t>(s)]));
            CHECK(o.episode_ended);
        }
}

TEST_CASE("request outcomes: continue or cancel") {
    const auto m = small_model();
    const auto outs = transitions(m, State{0, -1, 1}, Action::Off);
    const auto dev = device_marginal(outs);
    CHECK(dev.at({0, 1}) == Catch::Approx(0.9));
    CHECK(dev.at({0, 0}) == Catch::Approx(0.1));
    for (const auto& o : outs) CHECK(o.cost == 0.0); // cancellation before target is free here
}

TEST_CASE("idle state arrivals use the table row of the current elapsed time") {
    const auto m = small_model();
    const auto dev = device_marginal(transitions(m, State{1, 1, 0}, Action::Off));
    CHECK(dev.at({-1, 1}) == Catch::Approx(0.3));
    CHECK(dev.at({0, 1}) == Catch::Approx(0.3));
    CHECK(dev.at({1, 0}) == Catch::Approx(0.4)); // saturates at W_hat
}

TEST_CASE("kernel invariants on random instances") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 15; ++trial) {
        const auto m = random_model(gen, 1 + trial % 4, trial % 3, trial % 4, 1 + trial % 3);
        const StateSpace space(m);
        const double pmin = m.price_chain.min_price();
        for (const auto& x : enumerate_states(m))
            for (Action a : kActions) {
                const auto outs = transitions(m, x, a);
                CHECK(total_prob(outs) == Catch::Approx(1.0).margin(1e-12));
                std::vector<double> price_marginal(m.price_chain.size(), 0.0);
                for (const auto& o : outs) {
                    CHECK(space.contains(o.next));
                    CHECK(o.prob > 0.0);
                    CHECK(o.cost >= 0.0);
                    CHECK(o.cost == Catch::Approx(o.bill + m.params.gamma * o.dissatisfaction));
                    if (a == Action::On) CHECK(o.cost >= pmin * m.params.C - 1e-12);
                    price_marginal[static_cast<std::size_t>(o.next.price_idx)] += o.prob;
                }
                const auto& row = m.price_chain.transition[static_cast<std::size_t>(x.price_idx)];
                for (std::size_t j = 0; j < row.size(); ++j)
                    CHECK(price_marginal[j] == Catch::Approx(row[j]).margin(1e-12));
            }
    }
}

TEST_CASE("compiled kernel mirrors transitions") {
    const auto m = default_instance();
    const Kernel k(m);
    REQUIRE(k.state_count() == 96);
    for (std::size_t s = 0; s < k.state_count(); ++s)
        for (Action a : kActions) {
            const auto outs = transitions(m, k.space().state(s), a);
            const auto entries = k.outcomes(s, a);
            REQUIRE(entries.size() == outs.size());
            for (std::size_t i = 0; i < outs.size(); ++i) {
                CHECK(entries[i].next == k.space().index(outs[i].next));
                CHECK(entries[i].prob == outs[i].prob);
                CHECK(entries[i].cost == outs[i].cost);
            }
        }
    double mass = 0.0;
    for (double p : k.initial_distribution()) mass += p;
    CHECK(mass == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("transitions rejects states outside the space") {
    CHECK_THROWS_AS(transitions(small_model(), State{0, 2, 1}, Action::Off), ModelError);
    CHECK_THROWS_AS(transitions(small_model(), State{2, 0, 0}, Action::On), ModelError);
}
