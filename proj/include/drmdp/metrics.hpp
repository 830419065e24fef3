#pragma once

// Policy performance V_mu = E_{x ~ pi_P x pi_0} E_{a ~ mu(x)} Q_mu(x, a), the
// baseline policy, demand-response potential (DRP / RDRP), relative
// improvement of a learner (RI), and the gamma* threshold diagnostics.

#include "drmdp/kernel.hpp"
#include "drmdp/model.hpp"
#include "drmdp/solver.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmdp {

/// Never self-initiate; complete each request exactly at its target time.
inline Policy baseline_policy(const StateSpace& space) {
    Policy p(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
        const State x = space.state(k);
        p.set_action(k, x.has_request() && x.s == 0 ? Action::On : Action::Off);
    }
    return p;
}

inline Policy baseline_policy(const DeviceModel& m) { return baseline_policy(StateSpace(m)); }

/// Expectation of sum_a mu(x, a) q(x, a) under the evaluation distribution.
inline double expected_value(const Kernel& k, const Policy& mu, const QTable& q) {
    const auto& init = k.initial_distribution();
    double v = 0.0;
    for (std::size_t s = 0; s < init.size(); ++s) {
        if (init[s] == 0.0) continue;
        v += init[s] * (mu(s, Action::Off) * q(s, Action::Off) + mu(s, Action::On) * q(s, Action::On));
    }
    return v;
}

inline double policy_value(const Kernel& k, const Policy& mu, double tol,
                           CostChannel channel = CostChannel::Total) {
    return expected_value(k, mu, policy_q(k, mu, tol, channel));
}

inline double policy_value(const DeviceModel& m, const Policy& mu, double tol) {
    return policy_value(Kernel(m), mu, tol);
}

/// V_mu = a_mu + gamma * b_mu: expected discounted bill and dissatisfaction.
struct ValueDecomposition {
    double a_mu = 0.0;
    double b_mu = 0.0;
};

inline ValueDecomposition decompose_value(const Kernel& k, const Policy& mu, double tol) {
    return {policy_value(k, mu, tol, CostChannel::Bill),
            policy_value(k, mu, tol, CostChannel::Dissatisfaction)};
}

inline ValueDecomposition decompose_value(const DeviceModel& m, const Policy& mu, double tol) {
    return decompose_value(Kernel(m), mu, tol);
}

struct DrPotential {
    double v_base = 0.0;
    double v_star = 0.0;
    double drp = 0.0;
    std::optional<double> rdrp; ///< empty when v_base == 0
    Policy optimal;
    double vi_residual = 0.0;
    long vi_iterations = 0;
};

/// Optimal policy via value iteration; its greedy policy is then refined by
/// exact policy iteration so V* is an exact policy value rather than a
/// value-iteration estimate.
inline Policy optimal_policy(const Kernel& k, double tol, long max_iter, double* residual = nullptr,
                             long* iterations = nullptr) {
    auto vi = value_iteration(k, tol, max_iter);
    if (!vi.converged)
        throw ConvergenceError("value iteration did not reach tolerance", vi.residual, vi.iterations);
    if (residual) *residual = vi.residual;
    if (iterations) *iterations = vi.iterations;
    return policy_iteration(k, tol, greedy(vi.q)).policy;
}

inline DrPotential dr_potential(const Kernel& k, double tol, long max_iter = 10'000'000) {
    DrPotential r;
    r.v_base = policy_value(k, baseline_policy(k.space()), tol);
    r.optimal = optimal_policy(k, tol, max_iter, &r.vi_residual, &r.vi_iterations);
    r.v_star = policy_value(k, r.optimal, tol);
    r.drp = r.v_base - r.v_star;
    if (r.v_base > 0.0) r.rdrp = r.drp / r.v_base;
    return r;
}

inline DrPotential dr_potential(const DeviceModel& m, double tol, long max_iter = 10'000'000) {
    return dr_potential(Kernel(m), tol, max_iter);
}

/// (P_max - P_min) C / ((1 - alpha) delta_b).
///
/// The bound compares bills of policies that run the same jobs at different
/// prices. A policy that skips jobs can lower the bill by up to
/// P_max C / (1 - alpha), so on some instances the baseline is not optimal
/// above this value; check with dr_potential.
inline double gamma_star_bound(const DeviceModel& m, double delta_b) {
    if (!(delta_b > 0.0)) throw std::invalid_argument("gamma_star_bound: delta_b must be > 0");
    const auto& chain = m.price_chain;
    return (chain.max_price() - chain.min_price()) * m.params.C / ((1.0 - m.params.alpha) * delta_b);
}

inline constexpr std::size_t kDeltaBStateCap = 16;

/// Smallest strictly positive B_mu over all 2^|S| deterministic policies.
/// Empty when every deterministic policy has B_mu == 0. Values below
/// 1e-9 * max(dissatisfaction) / (1 - alpha) count as zero: they are
/// linear-solve roundoff on policies whose B_mu vanishes exactly.
inline std::optional<double> delta_b_bruteforce(const DeviceModel& m, std::size_t cap = kDeltaBStateCap,
                                                double tol = 1e-10) {
    const Kernel k(m);
    const std::size_t n = k.state_count();
    if (n > cap || n >= 63)
        throw std::length_error("delta_b_bruteforce: " + std::to_string(n) +
                                " states exceeds the enumeration cap of " + std::to_string(cap));
    double u_max = 0.0;
    for (const auto* v : {&m.dissatisfaction.u_r.values(), &m.dissatisfaction.u_c.values(), &m.dissatisfaction.u_e})
        for (double x : *v) u_max = std::max(u_max, x);
    const double zero = 1e-9 * u_max / (1.0 - m.params.alpha);
    std::optional<double> best;
    std::vector<Action> actions(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t s = 0; s < n; ++s) actions[s] = (mask >> s) & 1U ? Action::On : Action::Off;
        const double b = policy_value(k, Policy::deterministic(actions), tol, CostChannel::Dissatisfaction);
        if (b > zero && (!best || b < *best)) best = b;
    }
    return best;
}

/// (v_base - v_tilde) / v_base; negative when the learner does worse than the baseline.
inline double relative_improvement(double v_base, double v_tilde) {
    if (!(v_base > 0.0)) throw std::invalid_argument("relative_improvement: v_base must be > 0");
    return (v_base - v_tilde) / v_base;
}

struct MetricsReport {
    double gamma = 0.0;
    double v_base = NAN;
    double v_star = NAN;
    double drp = NAN;
    std::optional<double> rdrp;
    double v_tilde_mean = NAN;
    double v_tilde_se = NAN;
    long runs = 0;
    std::optional<double> ri;
    std::string error; ///< non-empty when this row failed
};

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_header() {
    return "gamma,v_base,v_star,drp,rdrp,v_tilde_mean,v_tilde_se,runs,ri";
}

/// Undefined ratios (v_base == 0) print as "undefined".
inline std::string csv_row(const MetricsReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
    return format_number(r.gamma) + ',' + format_number(r.v_base) + ',' + format_number(r.v_star) + ',' +
           format_number(r.drp) + ',' + opt(r.rdrp) + ',' + format_number(r.v_tilde_mean) + ',' +
           format_number(r.v_tilde_se) + ',' + std::to_string(r.runs) + ',' + opt(r.ri);
}

} // namespace drmdp
