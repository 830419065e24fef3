#pragma once

// Tabular Q-learning with a per-episode constant step size and a behavioral
// policy that, with probability epsilon, samples from the Boltzmann
// (softmin) distribution over Q(x, .) and otherwise acts greedily.

#include "drmdp/env.hpp"
#include "drmdp/rng.hpp"
#include "drmdp/solver.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmdp {

/// beta_j = numerator / (offset + j)^exponent for episode j = 0, 1, ...
/// Robbins-Monro (sum beta = inf, sum beta^2 < inf) for exponent in (0.5, 1].
struct StepSizeSchedule {
    double numerator = 10.0;
    double offset = 20.0;
    double exponent = 1.0;

    double operator()(long episode) const {
        const double base = offset + static_cast<double>(episode);
        return numerator / (exponent == 1.0 ? base : std::pow(base, exponent));
    }
};

struct LearnerConfig {
    double epsilon = 0.05;
    double eta = 0.1;
    StepSizeSchedule step_size;
    double q_init = 0.0;
    long episodes = 4000;
    /// Guard against policies that never end an episode.
    long max_episode_steps = 10'000'000;

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
        if (!(step_size.numerator > 0.0) || !(step_size.offset > 0.0))
            throw std::invalid_argument("step size schedule must be positive");
        if (!(step_size.exponent > 0.5 && step_size.exponent <= 1.0))
            throw std::invalid_argument("step size exponent must lie in (0.5, 1]");
        if (!std::isfinite(q_init)) throw std::invalid_argument("q_init must be finite");
        if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
        if (max_episode_steps < 1) throw std::invalid_argument("max_episode_steps must be >= 1");
    }
};

/// Softmin probability of Off: exp(-q_off/eta) / (exp(-q_off/eta) + exp(-q_on/eta)).
/// Depends on q_off - q_on only.
inline double boltzmann_off_probability(double q_off, double q_on, double eta) {
    return 1.0 / (1.0 + std::exp((q_off - q_on) / eta));
}

inline Action behavioral_action(const QTable& q, std::size_t state, const LearnerConfig& cfg, RngStream& rng) {
    if (rng.bernoulli(cfg.epsilon)) {
        const double p_off = boltzmann_off_probability(q(state, Action::Off), q(state, Action::On), cfg.eta);
        return rng.uniform() < p_off ? Action::Off : Action::On;
    }
    return q.argmin(state);
}

/// Applies q(x, a) += beta * delta with delta = cost + alpha * min_a' q(x', a') - q(x, a).
/// Returns delta.
inline double td_update(QTable& q, std::size_t state, Action a, double cost, std::size_t next_state,
                        double beta, double alpha) {
    const double delta = cost + alpha * q.min_value(next_state) - q(state, a);
    q.at(state, a) += beta * delta;
    return delta;
}

struct LearnResult {
    QTable q;
    /// sum_t alpha^t Phi_t over the whole run, t counted globally across episodes.
    double lifetime_cost = 0.0;
    /// Discounted contribution of each episode to lifetime_cost.
    std::vector<double> episode_costs;
    std::vector<std::uint64_t> visits; ///< per state index
    std::uint64_t steps = 0;
    /// alpha^steps * cost_bound / (1 - alpha): bias bound from truncating the infinite sum.
    double tail_bound = 0.0;
};

/// Runs cfg.episodes episodes of Q-learning from a fresh reset. Optionally
/// logs one CSV record per episode: episode,length,discounted_cost,beta.
inline LearnResult learn(Environment& env, const LearnerConfig& cfg, RngStream& rng,
                         std::ostream* episode_log = nullptr) {
    cfg.validate();
    const std::size_t n = env.space().size();
    const double alpha = env.alpha();

    LearnResult r;
    r.q = QTable(n, cfg.q_init);
    r.visits.assign(n, 0);
    r.episode_costs.reserve(static_cast<std::size_t>(cfg.episodes));
    if (episode_log) {
        episode_log->precision(17);
        *episode_log << "episode,length,discounted_cost,beta\n";
    }

    env.reset(rng);
    std::size_t x = *env.current_index();
    double discount = 1.0;
    for (long j = 0; j < cfg.episodes; ++j) {
        const double beta = cfg.step_size(j);
        double episode_cost = 0.0;
        long length = 0;
        for (bool ended = false; !ended;) {
            if (length >= cfg.max_episode_steps)
                throw std::runtime_error("episode " + std::to_string(j) + " exceeded " +
                                         std::to_string(cfg.max_episode_steps) + " steps");
            ++r.visits[x];
            const Action a = behavioral_action(r.q, x, cfg, rng);
            const EnvStep st = env.step(a, rng);
            episode_cost += discount * st.cost;
            discount *= alpha;
            td_update(r.q, x, a, st.cost, st.next_index, beta, alpha);
            x = st.next_index;
            ended = st.episode_ended;
            ++length;
        }
        r.steps += static_cast<std::uint64_t>(length);
        r.lifetime_cost += episode_cost;
        r.episode_costs.push_back(episode_cost);
        if (episode_log) *episode_log << j << ',' << length << ',' << episode_cost << ',' << beta << '\n';
    }
    r.tail_bound = discount * env.cost_bound() / (1.0 - alpha);
    return r;
}

} // namespace drmdp
