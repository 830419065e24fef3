#pragma once

// Hand-built instances shared by the test programs.

#include "drmdp/drmdp.hpp"

#include <random>

namespace drmdp::testing {

/// |P| = 1, W = 0, g_max = 1, W_hat = 0: states [0,0,0] and [0,0,1].
/// From [0,0] a request with d = 0 arrives with probability `arrival`; the
/// request must be served now or it is canceled.
inline DeviceModel single_slot_model(double price = 10.0, double alpha = 0.9, double gamma = 1.0,
                                     double arrival = 1.0, double u_c = 3.0, double u_e = 2.0) {
    DeviceModel m;
    m.price_chain.prices = {price};
    m.price_chain.transition = {{1.0}};
    m.params = DeviceParams{0, 0, 1, 1.0, alpha, gamma};
    m.dissatisfaction.u_r = RequestTable(0, 1);
    m.dissatisfaction.u_c = RequestTable(0, 1);
    m.dissatisfaction.u_c.at(0, 1) = u_c;
    m.dissatisfaction.u_e = {u_e};
    m.requests.arrival = ArrivalTable(0, 0, 1);
    m.requests.arrival.at(0, 0, 1) = arrival;
    m.requests.continuation = RequestTable(0, 1);
    m.requests.regen = {{0, 0, 1.0}};
    m.theorem1_compliant = true;
    validate(m);
    return m;
}

/// Two prices, W = W_hat = g_max = 1, alpha = 0.95: ten states.
inline DeviceModel small_model(double gamma = 1.0) {
    DeviceModel m;
    m.price_chain.prices = {10.0, 20.0};
    m.price_chain.transition = {{0.8, 0.2}, {0.3, 0.7}};
    m.params = DeviceParams{1, 1, 1, 1.0, 0.95, gamma};
    auto& u = m.dissatisfaction;
    u.u_r = RequestTable(1, 1);
    u.u_r.at(-1, 1) = 1.0;
    u.u_r.at(1, 1) = 2.0;
    u.u_c = RequestTable(1, 1);
    u.u_c.at(0, 1) = 3.0;
    u.u_c.at(1, 1) = 5.0;
    u.u_e = {2.0, 1.0};
    auto& r = m.requests;
    r.arrival = ArrivalTable(1, 1, 1);
    r.arrival.at(0, -1, 1) = 0.2;
    r.arrival.at(0, 0, 1) = 0.2;
    r.arrival.at(1, -1, 1) = 0.3;
    r.arrival.at(1, 0, 1) = 0.3;
    r.continuation = RequestTable(1, 1);
    r.continuation.at(-1, 1) = 0.9;
    r.continuation.at(0, 1) = 0.6;
    r.regen = {{0, 0, 1.0}};
    m.theorem1_compliant = true;
    validate(m);
    return m;
}

/// Random valid instance with the given dimensions. Every price row is
/// strictly positive, so the chain is irreducible and aperiodic.
inline DeviceModel random_model(std::mt19937_64& gen, int prices, int W, int W_hat, int g_max) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DeviceModel m;
    for (int i = 0; i < prices; ++i) m.price_chain.prices.push_back(5.0 + 20.0 * u(gen));
    for (int i = 0; i < prices; ++i) {
        std::vector<double> row(static_cast<std::size_t>(prices));
        double sum = 0.0;
        for (auto& x : row) sum += (x = 0.1 + u(gen));
        for (auto& x : row) x /= sum;
        double rest = 1.0;
        for (std::size_t j = 0; j + 1 < row.size(); ++j) rest -= row[j];
        row.back() = rest;
        m.price_chain.transition.push_back(row);
    }
    m.params = DeviceParams{W, W_hat, g_max, 0.5 + u(gen), 0.5 + 0.45 * u(gen), 3.0 * u(gen)};
    auto& d = m.dissatisfaction;
    d.u_r = RequestTable(W, g_max);
    d.u_c = RequestTable(W, g_max);
    m.requests.continuation = RequestTable(W, g_max);
    for (int s = -W; s <= W; ++s)
        for (int g = 1; g <= g_max; ++g) {
            d.u_r.at(s, g) = s == 0 ? 0.0 : 5.0 * u(gen);
            d.u_c.at(s, g) = s < 0 ? 0.0 : 5.0 * u(gen);
            m.requests.continuation.at(s, g) = s == W ? 0.0 : u(gen);
        }
    for (int s = 0; s <= W_hat; ++s) d.u_e.push_back(5.0 * u(gen));
    m.requests.arrival = ArrivalTable(W, W_hat, g_max);
    const double types = (W + 1) * g_max;
    for (int s = 0; s <= W_hat; ++s) {
        const double total = 0.9 * u(gen);
        for (int dd = -W; dd <= 0; ++dd)
            for (int g = 1; g <= g_max; ++g) m.requests.arrival.at(s, dd, g) = total / types;
    }
    m.requests.regen = {{0, 0, 0.5}, {std::min(1, W_hat), 0, 0.25}, {-W, 1, 0.25}};
    m.theorem1_compliant = true;
    validate(m);
    return m;
}

} // namespace drmdp::testing
