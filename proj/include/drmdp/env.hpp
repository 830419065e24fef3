#pragma once

#include "drmdp/kernel.hpp"
#include "drmdp/model.hpp"
#include "drmdp/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace drmdp {

struct EnvStep {
    double cost = 0.0;
    State next;
    std::size_t next_index = 0;
    bool episode_ended = false; ///< job completed or request canceled; device portion regenerated
};

/// Zero-mean evaluation noise added to the user's evaluation of a finished
/// job. Disabled (empty) by default, in which case evaluation == dissatisfaction.
using EvaluationNoise = std::function<double(RngStream&)>;

/// Sampled device environment. The learner sees states and observed costs
/// only; the kernel stays private. One instance per concurrent run; the
/// kernel itself is shared read-only.
class Environment {
public:
    explicit Environment(std::shared_ptr<const Kernel> kernel, EvaluationNoise noise = {})
        : kernel_(std::move(kernel)), noise_(std::move(noise)) {
        if (!kernel_) throw std::invalid_argument("Environment: null kernel");
    }

    const StateSpace& space() const noexcept { return kernel_->space(); }
    double alpha() const noexcept { return kernel_->alpha(); }
    double gamma() const noexcept { return kernel_->gamma(); }
    /// Largest |cost| of any noiseless outcome; bounds truncation bias.
    double cost_bound() const noexcept { return kernel_->max_abs_cost(); }

    /// Starts from x ~ pi_P x pi_0.
    State reset(RngStream& rng) {
        current_ = rng.categorical(kernel_->initial_distribution());
        t_ = 0;
        return kernel_->space().state(*current_);
    }

    /// Starts from a given state index.
    void reset_to(std::size_t state) {
        if (state >= kernel_->state_count()) throw std::out_of_range("Environment::reset_to: bad state index");
        current_ = state;
        t_ = 0;
    }

    std::optional<std::size_t> current_index() const noexcept { return current_; }

    EnvStep step(Action a, RngStream& rng) {
        if (!current_) throw std::logic_error("Environment::step called before reset");
        const auto outs = kernel_->outcomes(*current_, a);
        double u = rng.uniform();
        const Kernel::Entry* pick = &outs.back();
        for (const auto& e : outs) {
            if (u < e.prob) {
                pick = &e;
                break;
            }
            u -= e.prob;
        }
        EnvStep r;
        r.cost = pick->cost;
        if (noise_ && pick->episode_ended) r.cost += kernel_->gamma() * noise_(rng);
        r.next_index = pick->next;
        r.next = kernel_->space().state(pick->next);
        r.episode_ended = pick->episode_ended;

        if (trace_) {
            const State x = kernel_->space().state(*current_);
            *trace_ << t_ << ',' << x.price_idx << ',' << x.s << ',' << x.g << ',' << to_string(a)
                    << ',' << r.cost << ',' << (r.episode_ended ? 1 : 0) << '\n';
        }
        current_ = r.next_index;
        ++t_;
        return r;
    }

    /// Writes one CSV record per step: t,price_idx,s,g,action,cost,episode_ended.
    void set_trace(std::ostream* out) {
        trace_ = out;
        if (trace_) {
            trace_->precision(17);
            *trace_ << "t,price_idx,s,g,action,cost,episode_ended\n";
        }
    }

private:
    std::shared_ptr<const Kernel> kernel_;
    EvaluationNoise noise_;
    std::optional<std::size_t> current_;
    std::uint64_t t_ = 0;
    std::ostream* trace_ = nullptr;
};

} // namespace drmdp
