#pragma once

#include "drmdp/model.hpp"
#include "drmdp/stationary.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace drmdp {

/// One branch of the one-step kernel from a state-action pair. `cost` is the
/// instantaneous cost of the (x, a, next) triple; it is split into its bill
/// and dissatisfaction parts so that cost == bill + gamma * dissatisfaction.
struct TransitionOutcome {
    State next;
    double prob = 0.0;
    double cost = 0.0;
    double bill = 0.0;
    double dissatisfaction = 0.0;
    bool episode_ended = false; ///< the device portion was regenerated
};

namespace detail {

template <typename Emit>
void for_each_price_successor(const DeviceModel& m, int price_idx, Emit&& emit) {
    const auto& row = m.price_chain.transition[static_cast<std::size_t>(price_idx)];
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] > 0.0) emit(static_cast<int>(j), row[j]);
}

} // namespace detail

/// Enumerates every positive-probability outcome of taking `a` in `x`.
///
/// The EMS observes P_t and acts; P_{t+1} is then drawn from the price chain
/// independently of the device portion, including on regeneration steps.
/// Arrival probabilities and u_e saturate at W_hat.
inline std::vector<TransitionOutcome> transitions(const DeviceModel& m, const State& x, Action a) {
    const StateSpace space(m);
    if (!space.contains(x)) space.index(x); // throws with a descriptive message

    const auto& p = m.params;
    const auto& d = m.dissatisfaction;
    const auto& req = m.requests;
    const double price = m.price_chain.prices[static_cast<std::size_t>(x.price_idx)];
    std::vector<TransitionOutcome> out;

    auto regenerate = [&](double branch_prob, double bill, double dis) {
        detail::for_each_price_successor(m, x.price_idx, [&](int next_price, double pp) {
            for (const auto& e : req.regen) {
                if (e.prob <= 0.0) continue;
                out.push_back({State{next_price, e.s, e.g}, branch_prob * pp * e.prob,
                               bill + p.gamma * dis, bill, dis, true});
            }
        });
    };

    if (!x.has_request()) {
        const int s = std::min(x.s, p.W_hat);
        if (a == Action::On) {
            regenerate(1.0, price * p.C, d.u_e[static_cast<std::size_t>(s)]);
            return out;
        }
        const double residual = 1.0 - req.arrival.total(s);
        detail::for_each_price_successor(m, x.price_idx, [&](int next_price, double pp) {
            for (int dd = -p.W; dd <= 0; ++dd)
                for (int g = 1; g <= p.g_max; ++g) {
                    double pa = req.arrival(s, dd, g);
                    if (pa > 0.0) out.push_back({State{next_price, dd, g}, pp * pa});
                }
            if (residual > 0.0)
                out.push_back({State{next_price, std::min(s + 1, p.W_hat), 0}, pp * residual});
        });
        return out;
    }

    if (a == Action::On) {
        regenerate(1.0, price * p.C, d.u_r(x.s, x.g));
        return out;
    }
    const double keep = req.continuation(x.s, x.g);
    if (keep > 0.0)
        detail::for_each_price_successor(m, x.price_idx, [&](int next_price, double pp) {
            out.push_back({State{next_price, x.s + 1, x.g}, pp * keep});
        });
    if (keep < 1.0) regenerate(1.0 - keep, 0.0, d.u_c(x.s, x.g));
    return out;
}

/// The full kernel of an instance compiled into flat per-(state, action)
/// outcome lists, plus the evaluation distribution pi_P x pi_0 over states.
/// Immutable once built; share freely between threads.
class Kernel {
public:
    struct Entry {
        std::uint32_t next = 0;
        bool episode_ended = false;
        double prob = 0.0;
        double cost = 0.0;
        double bill = 0.0;
        double dissatisfaction = 0.0;
    };

    explicit Kernel(const DeviceModel& m)
        : space_(m), alpha_(m.params.alpha), gamma_(m.params.gamma),
          price_stationary_(stationary_distribution(m.price_chain)) {
        const std::size_t n = space_.size();
        offsets_.reserve(n * kActionCount + 1);
        offsets_.push_back(0);
        for (std::size_t k = 0; k < n; ++k) {
            const State x = space_.state(k);
            for (Action a : kActions) {
                for (const auto& o : transitions(m, x, a)) {
                    entries_.push_back({static_cast<std::uint32_t>(space_.index(o.next)),
                                        o.episode_ended, o.prob, o.cost, o.bill,
                                        o.dissatisfaction});
                    max_abs_cost_ = std::max(max_abs_cost_, std::abs(o.cost));
                }
                offsets_.push_back(entries_.size());
            }
        }
        initial_.assign(n, 0.0);
        for (std::size_t pi = 0; pi < space_.price_count(); ++pi)
            for (const auto& e : m.requests.regen)
                initial_[space_.index(State{static_cast<int>(pi), e.s, e.g})] +=
                    price_stationary_[pi] * e.prob;
    }

    const StateSpace& space() const noexcept { return space_; }
    std::size_t state_count() const noexcept { return space_.size(); }
    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return gamma_; }
    double max_abs_cost() const noexcept { return max_abs_cost_; }

    std::span<const Entry> outcomes(std::size_t state, Action a) const {
        const std::size_t row = state * kActionCount + to_index(a);
        return {entries_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
    }

    /// pi_P x pi_0 as a distribution over state indices.
    const std::vector<double>& initial_distribution() const noexcept { return initial_; }
    const std::vector<double>& price_stationary() const noexcept { return price_stationary_; }

private:
    StateSpace space_;
    double alpha_;
    double gamma_;
    std::vector<double> price_stationary_;
    std::vector<std::size_t> offsets_;
    std::vector<Entry> entries_;
    std::vector<double> initial_;
    double max_abs_cost_ = 0.0;
};

} // namespace drmdp
