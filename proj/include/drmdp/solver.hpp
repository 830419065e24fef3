#pragma once

// Exact dynamic-programming solution of the device MDP. All backups are
// Jacobi sweeps over an immutable copy of the previous table, so results do
// not depend on state visiting order.

#include "drmdp/error.hpp"
#include "drmdp/kernel.hpp"
#include "drmdp/model.hpp"
#include "drmdp/stationary.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmdp {

/// Dense (state index, action) -> value table.
class QTable {
public:
    QTable() = default;
    explicit QTable(std::size_t states, double fill = 0.0) : values_(states * kActionCount, fill) {}

    std::size_t state_count() const noexcept { return values_.size() / kActionCount; }

    double operator()(std::size_t k, Action a) const { return values_[k * kActionCount + to_index(a)]; }
    double& at(std::size_t k, Action a) { return values_[k * kActionCount + to_index(a)]; }

    double min_value(std::size_t k) const {
        return std::min((*this)(k, Action::Off), (*this)(k, Action::On));
    }
    /// argmin over actions, ties resolved toward Off.
    Action argmin(std::size_t k) const {
        return (*this)(k, Action::On) < (*this)(k, Action::Off) ? Action::On : Action::Off;
    }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool operator==(const QTable&) const = default;

private:
    std::vector<double> values_;
};

inline double sup_distance(const QTable& a, const QTable& b) {
    if (a.state_count() != b.state_count())
        throw std::invalid_argument("sup_distance: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    return d;
}

/// Randomized stationary policy: (state index, action) -> probability.
class Policy {
public:
    Policy() = default;
    explicit Policy(std::size_t states) : probs_(states * kActionCount, 0.0) {
        for (std::size_t k = 0; k < states; ++k) probs_[k * kActionCount] = 1.0;
    }
    static Policy deterministic(const std::vector<Action>& actions) {
        Policy p(actions.size());
        for (std::size_t k = 0; k < actions.size(); ++k) p.set_action(k, actions[k]);
        return p;
    }

    std::size_t state_count() const noexcept { return probs_.size() / kActionCount; }

    double operator()(std::size_t k, Action a) const { return probs_[k * kActionCount + to_index(a)]; }

    void set_action(std::size_t k, Action a) {
        probs_[k * kActionCount] = a == Action::Off ? 1.0 : 0.0;
        probs_[k * kActionCount + 1] = a == Action::On ? 1.0 : 0.0;
    }
    void set_probs(std::size_t k, double off, double on) {
        if (off < 0.0 || on < 0.0 || std::abs(off + on - 1.0) > 1e-12)
            throw std::invalid_argument("policy row must be a probability distribution");
        probs_[k * kActionCount] = off;
        probs_[k * kActionCount + 1] = on;
    }

    /// Most likely action (Off on ties); the action itself for deterministic rows.
    Action action(std::size_t k) const {
        return (*this)(k, Action::On) > (*this)(k, Action::Off) ? Action::On : Action::Off;
    }
    bool is_deterministic() const {
        return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p == 0.0 || p == 1.0; });
    }

    const std::vector<double>& values() const noexcept { return probs_; }
    bool operator==(const Policy&) const = default;

private:
    std::vector<double> probs_;
};

/// Which part of the per-outcome cost a policy evaluation accumulates.
enum class CostChannel { Total, Bill, Dissatisfaction };

namespace detail {

inline double channel_cost(const Kernel::Entry& e, CostChannel c) noexcept {
    switch (c) {
    case CostChannel::Bill: return e.bill;
    case CostChannel::Dissatisfaction: return e.dissatisfaction;
    case CostChannel::Total: break;
    }
    return e.cost;
}

inline void require_dims(const Kernel& k, std::size_t states, const char* what) {
    if (states != k.state_count())
        throw std::invalid_argument(std::string(what) + ": table has " + std::to_string(states) +
                                    " states, model has " + std::to_string(k.state_count()));
}

/// One Jacobi sweep q' = sum p [c + alpha * next_value(x')].
inline QTable backup_with(const Kernel& k, const std::vector<double>& next_value, CostChannel c) {
    const std::size_t n = k.state_count();
    const double alpha = k.alpha();
    QTable out(n);
    for (std::size_t s = 0; s < n; ++s)
        for (Action a : kActions) {
            double acc = 0.0;
            for (const auto& e : k.outcomes(s, a)) acc += e.prob * (channel_cost(e, c) + alpha * next_value[e.next]);
            out.at(s, a) = acc;
        }
    return out;
}

inline std::vector<double> min_values(const QTable& q) {
    std::vector<double> v(q.state_count());
    for (std::size_t s = 0; s < v.size(); ++s) v[s] = q.min_value(s);
    return v;
}

inline std::vector<double> policy_values(const QTable& q, const Policy& mu) {
    std::vector<double> v(q.state_count());
    for (std::size_t s = 0; s < v.size(); ++s)
        v[s] = mu(s, Action::Off) * q(s, Action::Off) + mu(s, Action::On) * q(s, Action::On);
    return v;
}

} // namespace detail

/// Optimal Bellman operator T(q)(x, a) = sum p [cost + alpha * min_a' q(x', a')].
inline QTable bellman_backup(const Kernel& k, const QTable& q) {
    detail::require_dims(k, q.state_count(), "bellman_backup");
    return detail::backup_with(k, detail::min_values(q), CostChannel::Total);
}

inline QTable bellman_backup(const DeviceModel& m, const QTable& q) { return bellman_backup(Kernel(m), q); }

/// Bellman operator of a fixed policy, on the selected cost channel.
inline QTable policy_backup(const Kernel& k, const Policy& mu, const QTable& q,
                            CostChannel channel = CostChannel::Total) {
    detail::require_dims(k, q.state_count(), "policy_backup");
    detail::require_dims(k, mu.state_count(), "policy_backup");
    return detail::backup_with(k, detail::policy_values(q, mu), channel);
}

struct ValueIterationResult {
    QTable q;
    double residual = 0.0; ///< ||T(q) - q||_inf of the returned table
    long iterations = 0;
    bool converged = false;
};

/// Iterates q <- T(q) until the sup-norm Bellman residual is <= tol. The
/// returned table is the last iterate whose residual was measured, so
/// `residual` is exact for it. Non-convergence is reported via `converged`.
inline ValueIterationResult value_iteration(const Kernel& k, double tol, long max_iter,
                                            std::optional<QTable> initial = std::nullopt) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
    ValueIterationResult r;
    r.q = initial ? std::move(*initial) : QTable(k.state_count());
    detail::require_dims(k, r.q.state_count(), "value_iteration");
    for (;;) {
        QTable next = bellman_backup(k, r.q);
        r.residual = sup_distance(next, r.q);
        if (r.residual <= tol) {
            r.converged = true;
            return r;
        }
        if (r.iterations >= max_iter) return r;
        r.q = std::move(next);
        ++r.iterations;
    }
}

inline ValueIterationResult value_iteration(const DeviceModel& m, double tol, long max_iter,
                                            std::optional<QTable> initial = std::nullopt) {
    return value_iteration(Kernel(m), tol, max_iter, std::move(initial));
}

/// Largest |S||A| for which policy_q solves the linear system directly.
inline constexpr std::size_t kDirectSolveLimit = 10'000;

/// Q-function of a fixed policy on the selected cost channel. Solves
/// (I - alpha P_mu) v = c_mu directly for small instances, then polishes
/// with policy backups until the fixed-point residual is <= tol.
inline QTable policy_q(const Kernel& k, const Policy& mu, double tol,
                       CostChannel channel = CostChannel::Total, long max_iter = 10'000'000) {
    if (!(tol > 0.0)) throw std::invalid_argument("policy_q: tol must be > 0");
    detail::require_dims(k, mu.state_count(), "policy_q");
    const std::size_t n = k.state_count();
    const double alpha = k.alpha();

    QTable q(n);
    if (n * kActionCount <= kDirectSolveLimit) {
        const auto dim = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
        for (std::size_t s = 0; s < n; ++s)
            for (Action act : kActions) {
                const double w = mu(s, act);
                if (w == 0.0) continue;
                for (const auto& e : k.outcomes(s, act)) {
                    c(static_cast<Eigen::Index>(s)) += w * e.prob * detail::channel_cost(e, channel);
                    a(static_cast<Eigen::Index>(s), e.next) -= alpha * w * e.prob;
                }
            }
        Eigen::VectorXd v = a.partialPivLu().solve(c);
        std::vector<double> vs(v.data(), v.data() + dim);
        q = detail::backup_with(k, vs, channel);
    }

    for (long it = 0;; ++it) {
        QTable next = policy_backup(k, mu, q, channel);
        const double residual = sup_distance(next, q);
        if (residual <= tol) return q;
        if (it >= max_iter)
            throw ConvergenceError("policy_q did not reach tolerance", residual, it);
        q = std::move(next);
    }
}

inline QTable policy_q(const DeviceModel& m, const Policy& mu, double tol,
                       CostChannel channel = CostChannel::Total) {
    return policy_q(Kernel(m), mu, tol, channel);
}

/// Deterministic greedy policy: argmin_a q(x, a), ties toward Off.
inline Policy greedy(const QTable& q) {
    Policy p(q.state_count());
    for (std::size_t s = 0; s < q.state_count(); ++s) p.set_action(s, q.argmin(s));
    return p;
}

struct PolicyIterationResult {
    Policy policy;
    QTable q;
    int iterations = 0;
};

/// Howard policy iteration with exact evaluation. An action is only replaced
/// when the alternative is better by more than a relative 1e-10, which
/// keeps the loop from cycling on numerical ties.
inline PolicyIterationResult policy_iteration(const Kernel& k, double tol,
                                              std::optional<Policy> initial = std::nullopt,
                                              int max_iter = 1000) {
    PolicyIterationResult r;
    r.policy = initial ? std::move(*initial) : Policy(k.state_count());
    detail::require_dims(k, r.policy.state_count(), "policy_iteration");
    if (!r.policy.is_deterministic()) r.policy = greedy(policy_q(k, r.policy, tol));
    for (;;) {
        r.q = policy_q(k, r.policy, tol);
        bool changed = false;
        for (std::size_t s = 0; s < k.state_count(); ++s) {
            const Action cur = r.policy.action(s);
            const Action alt = cur == Action::On ? Action::Off : Action::On;
            const double margin = 1e-10 * std::max(1.0, std::abs(r.q(s, cur)));
            if (r.q(s, alt) < r.q(s, cur) - margin) {
                r.policy.set_action(s, alt);
                changed = true;
            }
        }
        if (!changed) return r;
        if (++r.iterations >= max_iter)
            throw ConvergenceError("policy iteration did not stabilize", 0.0, r.iterations);
    }
}

} // namespace drmdp
