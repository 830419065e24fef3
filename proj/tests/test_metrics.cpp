#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace drmdp;
using drmdp::testing::random_model;
using drmdp::testing::single_slot_model;
using drmdp::testing::small_model;

TEST_CASE("baseline serves requests exactly on target and never self-initiates") {
    const auto m = default_instance();
    const StateSpace space(m);
    const Policy mu = baseline_policy(m);
    for (std::size_t k = 0; k < space.size(); ++k) {
        const State x = space.state(k);
        const Action expected = x.g >= 1 && x.s == 0 ? Action::On : Action::Off;
        CHECK(mu.action(k) == expected);
    }
    CHECK(mu.action(space.index(State{0, 0, 2})) == Action::On);
    CHECK(mu.action(space.index(State{0, -2, 1})) == Action::Off);
    CHECK(mu.action(space.index(State{3, 4, 0})) == Action::Off);
}

TEST_CASE("baseline value on the deterministic single-slot instance") {
    // idle at t = 0, request arrives, served at t = 1, back to idle at t = 2
    for (double alpha : {0.5, 0.9, 0.99})
        for (double price : {1.0, 12.0}) {
            const auto m = single_slot_model(price, alpha, 2.0, 1.0);
            const double expected = price * alpha / (1.0 - alpha * alpha);
            CHECK(policy_value(m, baseline_policy(m), 1e-12) == Catch::Approx(expected).epsilon(1e-10));
        }
}

TEST_CASE("value decomposes linearly in gamma") {
    std::mt19937_64 gen(31);
    const auto base = random_model(gen, 3, 2, 2, 2);
    const Kernel k0(with_gamma(base, 1.0));
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<Action> acts(k0.state_count());
    for (auto& a : acts) a = coin(gen) ? Action::On : Action::Off;
    const Policy mu = Policy::deterministic(acts);
    const auto dec = decompose_value(k0, mu, 1e-12);
    for (double gamma : {0.0, 0.3, 1.0, 4.0, 25.0}) {
        const Kernel k(with_gamma(base, gamma));
        CHECK(policy_value(k, mu, 1e-12) == Catch::Approx(dec.a_mu + gamma * dec.b_mu).epsilon(1e-10));
    }
}

TEST_CASE("baseline incurs no dissatisfaction on compliant instances") {
    for (const auto& m : {default_instance(), small_model()}) {
        const auto dec = decompose_value(m, baseline_policy(m), 1e-12);
        CHECK(std::abs(dec.b_mu) <= 1e-9);
        CHECK(dec.a_mu > 0.0);
    }
}

TEST_CASE("always-off policy costs nothing when early cancellation is free") {
    // requests arrive with target offset -1 and are canceled before s = 0
    auto m = small_model();
    for (int s = 0; s <= 1; ++s) {
        m.requests.arrival.at(s, 0, 1) = 0.0;
        m.requests.arrival.at(s, -1, 1) = 0.5;
    }
    m.requests.continuation.at(-1, 1) = 0.0;
    validate(m);
    const Policy off(state_space_size(m));
    const auto dec = decompose_value(m, off, 1e-12);
    CHECK(dec.a_mu == 0.0);
    CHECK(dec.b_mu == 0.0);
}

TEST_CASE("DRP at zero tradeoff equals the whole baseline cost") {
    for (const auto& m : {with_gamma(default_instance(), 0.0), small_model(0.0)}) {
        const auto r = dr_potential(m, 1e-10);
        REQUIRE(r.rdrp);
        CHECK(*r.rdrp == Catch::Approx(1.0).margin(1e-8));
        CHECK(r.v_star == Catch::Approx(0.0).margin(1e-8));
    }
}

TEST_CASE("DRP is non-negative and non-increasing in gamma") {
    const auto m = small_model();
    double prev_drp = INFINITY, prev_rdrp = INFINITY, v_base = NAN;
    for (double gamma = 0.0; gamma <= 12.0; gamma += 0.5) {
        const auto r = dr_potential(with_gamma(m, gamma), 1e-10);
        CHECK(r.drp >= -1e-8);
        CHECK(r.v_star <= r.v_base + 1e-8);
        CHECK(r.drp <= prev_drp + 1e-8);
        CHECK(*r.rdrp <= prev_rdrp + 1e-8);
        if (std::isnan(v_base)) v_base = r.v_base;
        CHECK(r.v_base == Catch::Approx(v_base).margin(1e-8));
        prev_drp = r.drp;
        prev_rdrp = *r.rdrp;
    }
}

TEST_CASE("gamma* bound") {
    auto m = default_instance();
    CHECK(gamma_star_bound(m, 1.0) == Catch::Approx(20000.0));
    m.price_chain.prices = {12.0, 12.0, 12.0, 12.0};
    CHECK(gamma_star_bound(m, 1.0) == 0.0);
    CHECK_THROWS_AS(gamma_star_bound(m, 0.0), std::invalid_argument);
}

TEST_CASE("brute-force delta_B on the single-slot instance") {
    // Non-baseline policies: skip requests (cancellation u_c every other
    // step from t = 1) or self-initiate every step (u_e from t = 0).
    for (double alpha : {0.5, 0.9})
        for (auto [u_c, u_e] : {std::pair{3.0, 2.0}, std::pair{0.5, 4.0}, std::pair{10.0, 0.25}}) {
            const auto m = single_slot_model(10.0, alpha, 1.0, 1.0, u_c, u_e);
            const double expected = std::min(u_c * alpha / (1.0 - alpha * alpha), u_e / (1.0 - alpha));
            const auto db = delta_b_bruteforce(m);
            REQUIRE(db);
            CHECK(*db == Catch::Approx(expected).epsilon(1e-9));

            const double scale = 3.5;
            const auto scaled = single_slot_model(10.0, alpha, 1.0, 1.0, scale * u_c, scale * u_e);
            CHECK(*delta_b_bruteforce(scaled) == Catch::Approx(scale * expected).epsilon(1e-9));
        }
}

TEST_CASE("delta_B is undefined without dissatisfaction and refused above the cap") {
    CHECK_FALSE(delta_b_bruteforce(single_slot_model(10.0, 0.9, 1.0, 1.0, 0.0, 0.0)).has_value());
    CHECK_THROWS_AS(delta_b_bruteforce(default_instance()), std::length_error);
}

TEST_CASE("baseline is optimal just above gamma*") {
    const auto m = small_model();
    const auto db = delta_b_bruteforce(m);
    REQUIRE(db);
    const double gs = gamma_star_bound(m, *db);
    const auto r = dr_potential(with_gamma(m, 1.01 * gs), 1e-10);
    CHECK(std::abs(r.drp) <= 1e-8);
}

TEST_CASE("relative improvement") {
    CHECK(relative_improvement(100.0, 90.0) == Catch::Approx(0.1));
    CHECK(relative_improvement(100.0, 100.0) == 0.0);
    CHECK(relative_improvement(100.0, 110.0) == Catch::Approx(-0.1));
    CHECK_THROWS_AS(relative_improvement(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("CSV row formatting") {
    MetricsReport r;
    r.gamma = 0.2;
    r.v_base = 100.0;
    r.v_star = 25.0;
    r.drp = 75.0;
    r.rdrp = 0.75;
    r.v_tilde_mean = 80.0;
    r.v_tilde_se = 1.5;
    r.runs = 10;
    r.ri = 0.2;
    CHECK(csv_row(r) == "0.2,100,25,75,0.75,80,1.5,10,0.2");
    r.rdrp.reset();
    r.ri.reset();
    r.v_tilde_se = NAN;
    CHECK(csv_row(r) == "0.2,100,25,75,undefined,80,nan,10,undefined");
    CHECK(csv_header() == "gamma,v_base,v_star,drp,rdrp,v_tilde_mean,v_tilde_se,runs,ri");
}
