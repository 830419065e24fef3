#pragma once

// Problem-instance data model for a single-device demand-response MDP.
//
// State x = [price index, elapsed time s, priority g]. While no request has
// been received in the current episode g = 0 and s counts steps since the
// episode started (saturating at W_hat). Once a request arrives, g is its
// priority in [1, g_max] and s is the signed offset from its target time,
// s in [-W, W].

#include "drmdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

namespace drmdp {

enum class Action : std::uint8_t { Off = 0, On = 1 };

inline constexpr std::size_t kActionCount = 2;
inline constexpr Action kActions[kActionCount] = {Action::Off, Action::On};

constexpr std::size_t to_index(Action a) noexcept { return static_cast<std::size_t>(a); }
constexpr const char* to_string(Action a) noexcept { return a == Action::On ? "on" : "off"; }

struct State {
    int price_idx = 0;
    int s = 0;
    int g = 0; ///< 0: no request received in this episode

    bool has_request() const noexcept { return g > 0; }
    auto operator<=>(const State&) const = default;
};

struct PriceChain {
    std::vector<double> prices;
    std::vector<std::vector<double>> transition; ///< row-stochastic

    std::size_t size() const noexcept { return prices.size(); }
    double max_price() const { return *std::max_element(prices.begin(), prices.end()); }
    double min_price() const { return *std::min_element(prices.begin(), prices.end()); }
};

struct DeviceParams {
    int W = 0;        ///< target-time window
    int W_hat = 0;    ///< elapsed-time saturation bound for no-request states
    int g_max = 1;    ///< number of priorities
    double C = 1.0;   ///< energy per standardized job
    double alpha = 0.9; ///< discount factor
    double gamma = 0.0; ///< bill vs. dissatisfaction tradeoff
};

/// Dense table over s in [-W, W] and g in [1, g_max].
class RequestTable {
public:
    RequestTable() = default;
    RequestTable(int W, int g_max, double fill = 0.0)
        : W_(W), g_max_(g_max), data_(static_cast<std::size_t>((2 * W + 1) * g_max), fill) {}

    int W() const noexcept { return W_; }
    int g_max() const noexcept { return g_max_; }

    double operator()(int s, int g) const { return data_[offset(s, g)]; }
    double& at(int s, int g) { return data_[offset(s, g)]; }

    const std::vector<double>& values() const noexcept { return data_; }

private:
    std::size_t offset(int s, int g) const {
        return static_cast<std::size_t>((s + W_) * g_max_ + (g - 1));
    }

    int W_ = 0;
    int g_max_ = 1;
    std::vector<double> data_;
};

/// Arrival probabilities p[s][d][g]: s in [0, W_hat] (no-request elapsed
/// time), d in [-W, 0] (elapsed time relative to the new target), g in
/// [1, g_max].
class ArrivalTable {
public:
    ArrivalTable() = default;
    ArrivalTable(int W, int W_hat, int g_max, double fill = 0.0)
        : W_(W), W_hat_(W_hat), g_max_(g_max),
          data_(static_cast<std::size_t>((W_hat + 1) * (W + 1) * g_max), fill) {}

    int W() const noexcept { return W_; }
    int W_hat() const noexcept { return W_hat_; }
    int g_max() const noexcept { return g_max_; }

    double operator()(int s, int d, int g) const { return data_[offset(s, d, g)]; }
    double& at(int s, int d, int g) { return data_[offset(s, d, g)]; }

    /// Total probability that some request arrives after elapsed time s.
    double total(int s) const {
        double sum = 0.0;
        for (int d = -W_; d <= 0; ++d)
            for (int g = 1; g <= g_max_; ++g) sum += (*this)(s, d, g);
        return sum;
    }

private:
    std::size_t offset(int s, int d, int g) const {
        return static_cast<std::size_t>((s * (W_ + 1) + (d + W_)) * g_max_ + (g - 1));
    }

    int W_ = 0;
    int W_hat_ = 0;
    int g_max_ = 1;
    std::vector<double> data_;
};

struct DissatisfactionTables {
    RequestTable u_r;          ///< request satisfied at offset s
    RequestTable u_c;          ///< request canceled at offset s
    std::vector<double> u_e;   ///< EMS-initiated job after s idle steps, s in [0, W_hat]
};

/// One atom of the device-portion regeneration distribution.
struct RegenEntry {
    int s = 0;
    int g = 0;
    double prob = 0.0;
};

struct RequestModel {
    ArrivalTable arrival;
    RequestTable continuation; ///< probability an unsatisfied request is not canceled this step
    std::vector<RegenEntry> regen;
};

struct DeviceModel {
    PriceChain price_chain;
    DeviceParams params;
    DissatisfactionTables dissatisfaction;
    RequestModel requests;
    /// When set, validation additionally enforces zero dissatisfaction for
    /// on-target completion and for cancellation before the target.
    bool theorem1_compliant = false;
};

inline DeviceModel with_gamma(DeviceModel model, double gamma) {
    model.params.gamma = gamma;
    return model;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline constexpr double kSumTolerance = 1e-12;

inline std::string idx(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

inline bool strongly_connected(const std::vector<std::vector<double>>& p) {
    const std::size_t n = p.size();
    auto reach = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::queue<std::size_t> q;
        q.push(0);
        seen[0] = true;
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (std::size_t v = 0; v < n; ++v) {
                double w = forward ? p[u][v] : p[v][u];
                if (w > 0.0 && !seen[v]) {
                    seen[v] = true;
                    q.push(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reach(true) && reach(false);
}

/// Period of an irreducible chain: gcd over edges u->v of level(u) + 1 - level(v).
inline long chain_period(const std::vector<std::vector<double>>& p) {
    const std::size_t n = p.size();
    std::vector<long> level(n, -1);
    std::queue<std::size_t> q;
    level[0] = 0;
    q.push(0);
    long period = 0;
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (p[u][v] <= 0.0) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            } else {
                period = std::gcd(period, std::abs(level[u] + 1 - level[v]));
            }
        }
    }
    return period;
}

inline void check_probability(double p, const std::string& path) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw ModelError(path, "probability " + std::to_string(p) + " outside [0, 1]");
}

} // namespace detail

inline void validate(const PriceChain& chain) {
    const std::size_t n = chain.prices.size();
    if (n == 0) throw ModelError("prices", "price list is empty");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(chain.prices[i]) || chain.prices[i] <= 0.0)
            throw ModelError(detail::idx("prices", i), "price must be strictly positive");
    if (chain.transition.size() != n)
        throw ModelError("price_transition", "expected " + std::to_string(n) + " rows");
    for (std::size_t i = 0; i < n; ++i) {
        const auto path = detail::idx("price_transition", i);
        if (chain.transition[i].size() != n)
            throw ModelError(path, "expected " + std::to_string(n) + " columns");
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            detail::check_probability(chain.transition[i][j], detail::idx(path, j));
            sum += chain.transition[i][j];
        }
        if (std::abs(sum - 1.0) > detail::kSumTolerance)
            throw ModelError(path, "row sums to " + std::to_string(sum) + ", expected 1");
    }
    if (!detail::strongly_connected(chain.transition))
        throw ModelError("price_transition", "price chain is not irreducible");
    if (detail::chain_period(chain.transition) != 1)
        throw ModelError("price_transition", "price chain is periodic");
}

inline void validate(const DeviceParams& p) {
    if (p.W < 0) throw ModelError("W", "must be >= 0");
    if (p.W_hat < 0) throw ModelError("W_hat", "must be >= 0");
    if (p.g_max < 1) throw ModelError("g_max", "must be >= 1");
    if (!(p.C > 0.0) || !std::isfinite(p.C)) throw ModelError("C", "must be > 0");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ModelError("alpha", "must lie in (0, 1)");
    if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) throw ModelError("gamma", "must be >= 0");
}

/// Monotonicity preconditions that are not already structural invariants.
/// Returns one message per violated condition; empty when compliant.
inline std::vector<std::string> theorem1_violations(const DeviceModel& m) {
    std::vector<std::string> out;
    const auto& p = m.params;
    if (std::any_of(m.price_chain.prices.begin(), m.price_chain.prices.end(),
                    [](double x) { return !(x > 0.0); }))
        out.emplace_back("condition (a): some price is not strictly positive");
    auto negative = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double x) { return x < 0.0; });
    };
    if (negative(m.dissatisfaction.u_r.values()) || negative(m.dissatisfaction.u_c.values()) ||
        negative(m.dissatisfaction.u_e))
        out.emplace_back("condition (b): some dissatisfaction entry is negative");
    for (int g = 1; g <= p.g_max; ++g)
        if (m.dissatisfaction.u_r(0, g) != 0.0)
            out.emplace_back("condition (c): dissatisfaction.u_r at s=0, g=" + std::to_string(g) +
                             " is nonzero (on-target completion must cost nothing)");
    for (int s = -p.W; s < 0; ++s)
        for (int g = 1; g <= p.g_max; ++g)
            if (m.dissatisfaction.u_c(s, g) != 0.0)
                out.emplace_back("condition (c): dissatisfaction.u_c at s=" + std::to_string(s) +
                                 ", g=" + std::to_string(g) +
                                 " is nonzero (cancellation before target must cost nothing)");
    return out;
}

/// Checks every invariant of the instance and throws ModelError naming the
/// first violation.
inline void validate(const DeviceModel& m) {
    validate(m.price_chain);
    validate(m.params);
    const auto& p = m.params;
    const auto& d = m.dissatisfaction;
    const auto& r = m.requests;

    auto check_request_table = [&](const RequestTable& t, const std::string& path) {
        if (t.W() != p.W || t.g_max() != p.g_max ||
            t.values().size() != static_cast<std::size_t>((2 * p.W + 1) * p.g_max))
            throw ModelError(path, "dimensions do not match W and g_max");
    };
    check_request_table(d.u_r, "dissatisfaction.u_r");
    check_request_table(d.u_c, "dissatisfaction.u_c");
    check_request_table(r.continuation, "requests.continuation");
    if (d.u_e.size() != static_cast<std::size_t>(p.W_hat + 1))
        throw ModelError("dissatisfaction.u_e", "expected W_hat + 1 entries");
    if (r.arrival.W() != p.W || r.arrival.W_hat() != p.W_hat || r.arrival.g_max() != p.g_max)
        throw ModelError("requests.arrival", "dimensions do not match W, W_hat and g_max");

    for (int s = -p.W; s <= p.W; ++s)
        for (int g = 1; g <= p.g_max; ++g) {
            const auto at = "[" + std::to_string(s + p.W) + "][" + std::to_string(g - 1) + "]";
            for (auto [table, name] : {std::pair{&d.u_r, "dissatisfaction.u_r"},
                                       std::pair{&d.u_c, "dissatisfaction.u_c"}}) {
                double v = (*table)(s, g);
                if (!std::isfinite(v) || v < 0.0)
                    throw ModelError(name + at, "dissatisfaction must be finite and >= 0");
            }
            detail::check_probability(r.continuation(s, g), "requests.continuation" + at);
        }
    for (int s = 0; s <= p.W_hat; ++s)
        if (!std::isfinite(d.u_e[s]) || d.u_e[s] < 0.0)
            throw ModelError(detail::idx("dissatisfaction.u_e", s),
                             "dissatisfaction must be finite and >= 0");

    for (int g = 1; g <= p.g_max; ++g)
        if (r.continuation(p.W, g) != 0.0)
            throw ModelError("requests.continuation[" + std::to_string(2 * p.W) + "][" +
                                 std::to_string(g - 1) + "]",
                             "a request must be canceled with certainty at s = W");

    for (int s = 0; s <= p.W_hat; ++s) {
        const auto path = detail::idx("requests.arrival", s);
        for (int dd = -p.W; dd <= 0; ++dd)
            for (int g = 1; g <= p.g_max; ++g)
                detail::check_probability(r.arrival(s, dd, g),
                                          path + "[" + std::to_string(dd + p.W) + "][" +
                                              std::to_string(g - 1) + "]");
        double total = r.arrival.total(s);
        if (total > 1.0 + detail::kSumTolerance)
            throw ModelError(path, "arrival probabilities sum to " + std::to_string(total) +
                                       " > 1");
    }

    if (r.regen.empty()) throw ModelError("requests.regen", "distribution is empty");
    double regen_sum = 0.0;
    for (std::size_t i = 0; i < r.regen.size(); ++i) {
        const auto& e = r.regen[i];
        const auto path = detail::idx("requests.regen", i);
        bool valid = e.g == 0 ? (e.s >= 0 && e.s <= p.W_hat)
                              : (e.g >= 1 && e.g <= p.g_max && e.s >= -p.W && e.s <= p.W);
        if (!valid) throw ModelError(path, "not a valid device-portion state");
        detail::check_probability(e.prob, path);
        regen_sum += e.prob;
    }
    if (std::abs(regen_sum - 1.0) > detail::kSumTolerance)
        throw ModelError("requests.regen", "sums to " + std::to_string(regen_sum) + ", expected 1");

    if (m.theorem1_compliant) {
        auto v = theorem1_violations(m);
        if (!v.empty()) throw ModelError("theorem1_compliant", v.front());
    }
}

// ---------------------------------------------------------------------------
// State enumeration
//
// Prices are the major axis. Within a price: no-request states s = 0..W_hat,
// then request states ordered by (s, g) with s = -W..W, g = 1..g_max.

class StateSpace {
public:
    StateSpace() = default;
    StateSpace(std::size_t price_count, const DeviceParams& p)
        : prices_(price_count), W_(p.W), W_hat_(p.W_hat), g_max_(p.g_max) {}
    explicit StateSpace(const DeviceModel& m) : StateSpace(m.price_chain.size(), m.params) {}

    std::size_t device_portion_size() const noexcept {
        return static_cast<std::size_t>((2 * W_ + 1) * g_max_ + W_hat_ + 1);
    }
    std::size_t size() const noexcept { return prices_ * device_portion_size(); }
    std::size_t price_count() const noexcept { return prices_; }

    bool contains(const State& x) const noexcept {
        if (x.price_idx < 0 || static_cast<std::size_t>(x.price_idx) >= prices_) return false;
        if (x.g == 0) return x.s >= 0 && x.s <= W_hat_;
        return x.g >= 1 && x.g <= g_max_ && x.s >= -W_ && x.s <= W_;
    }

    /// Index of the device portion [s, g] within a price block.
    std::size_t device_index(int s, int g) const noexcept {
        if (g == 0) return static_cast<std::size_t>(s);
        return static_cast<std::size_t>(W_hat_ + 1 + (s + W_) * g_max_ + (g - 1));
    }

    std::size_t index(const State& x) const {
        if (!contains(x))
            throw ModelError("state", "(" + std::to_string(x.price_idx) + ", " +
                                          std::to_string(x.s) + ", " + std::to_string(x.g) +
                                          ") is not a valid state of this instance");
        return static_cast<std::size_t>(x.price_idx) * device_portion_size() +
               device_index(x.s, x.g);
    }

    State state(std::size_t k) const {
        const auto dps = device_portion_size();
        State x;
        x.price_idx = static_cast<int>(k / dps);
        auto r = static_cast<int>(k % dps);
        if (r <= W_hat_) {
            x.s = r;
            x.g = 0;
        } else {
            r -= W_hat_ + 1;
            x.s = r / g_max_ - W_;
            x.g = r % g_max_ + 1;
        }
        return x;
    }

private:
    std::size_t prices_ = 0;
    int W_ = 0;
    int W_hat_ = 0;
    int g_max_ = 1;
};

/// |P| * [(2W + 1) g_max + W_hat + 1]
inline std::size_t state_space_size(const DeviceModel& m) { return StateSpace(m).size(); }

inline std::vector<State> enumerate_states(const DeviceModel& m) {
    StateSpace space(m);
    std::vector<State> out;
    out.reserve(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) out.push_back(space.state(k));
    return out;
}

} // namespace drmdp
