#pragma once

// Gamma sweep: for every tradeoff value, V_base and V* by dynamic
// programming and the learner's discounted lifetime cost by independent
// Monte-Carlo runs of Q-learning.

#include "drmdp/config.hpp"
#include "drmdp/env.hpp"
#include "drmdp/learner.hpp"
#include "drmdp/metrics.hpp"
#include "drmdp/model.hpp"
#include "drmdp/rng.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace drmdp {

/// Shipped default instance: four price levels {10, 12, 15, 20}, two
/// priorities (1 = normal, 2 = high), W = 4, W_hat = 5, alpha = 0.9995,
/// C = 1, regeneration always to [s = 0, g = 0], ten equally likely request
/// types. Arrival and cancellation probabilities increase with elapsed time.
/// Table values are synthetic; see docs/default-instance.md.
inline DeviceModel default_instance() {
    DeviceModel m;
    m.price_chain.prices = {10.0, 12.0, 15.0, 20.0};
    m.price_chain.transition = {
        {0.70, 0.20, 0.10, 0.00},
        {0.15, 0.60, 0.20, 0.05},
        {0.05, 0.20, 0.60, 0.15},
        {0.00, 0.10, 0.20, 0.70},
    };
    auto& p = m.params;
    p.W = 4;
    p.W_hat = 5;
    p.g_max = 2;
    p.C = 1.0;
    p.alpha = 0.9995;
    p.gamma = 1.0;
    m.theorem1_compliant = true;

    // p_s: probability that some request arrives after s idle steps
    const double arrival[] = {0.05, 0.10, 0.15, 0.20, 0.30, 0.40};
    const int types = (p.W + 1) * p.g_max;
    m.requests.arrival = ArrivalTable(p.W, p.W_hat, p.g_max);
    for (int s = 0; s <= p.W_hat; ++s)
        for (int d = -p.W; d <= 0; ++d)
            for (int g = 1; g <= p.g_max; ++g) m.requests.arrival.at(s, d, g) = arrival[s] / types;

    // cancellation probability for s = -W..W, priority independent
    const double cancel[] = {0.02, 0.03, 0.04, 0.06, 0.10, 0.20, 0.35, 0.55, 1.0};
    m.requests.continuation = RequestTable(p.W, p.g_max);
    m.dissatisfaction.u_r = RequestTable(p.W, p.g_max);
    m.dissatisfaction.u_c = RequestTable(p.W, p.g_max);
    for (int s = -p.W; s <= p.W; ++s)
        for (int g = 1; g <= p.g_max; ++g) {
            m.requests.continuation.at(s, g) = 1.0 - cancel[s + p.W];
            const double weight = g; // high priority hurts twice as much
            m.dissatisfaction.u_r.at(s, g) = s < 0 ? 0.5 * weight * -s : 1.0 * weight * s;
            m.dissatisfaction.u_c.at(s, g) = s < 0 ? 0.0 : weight * (2.0 + s);
        }
    m.dissatisfaction.u_e = {4.0, 3.0, 2.5, 2.0, 1.5, 1.0};
    m.requests.regen = {{0, 0, 1.0}};
    validate(m);
    return m;
}

/// ceil(2 / (1 - alpha)) episodes.
inline long default_episode_budget(double alpha) {
    return static_cast<long>(std::ceil(2.0 / (1.0 - alpha) - 1e-9));
}

struct SweepConfig {
    std::vector<double> gamma_grid;
    LearnerConfig learner;
    /// Empty: default_episode_budget(alpha) of the instance.
    std::optional<long> episodes;
    long runs = 200;
    std::uint64_t base_seed = 0;
    double tol = 1e-9;
    std::filesystem::path output_path = "sweep.csv";

    void validate() const {
        if (gamma_grid.empty()) throw std::invalid_argument("gamma_grid is empty");
        for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
            if (!(gamma_grid[i] >= 0.0) || !std::isfinite(gamma_grid[i]))
                throw std::invalid_argument("gamma_grid[" + std::to_string(i) + "] must be >= 0");
            if (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1]))
                throw std::invalid_argument("gamma_grid must be strictly increasing");
        }
        if (runs < 1) throw std::invalid_argument("runs must be >= 1");
        if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
        if (episodes && *episodes < 1) throw std::invalid_argument("episodes must be >= 1");
        LearnerConfig l = learner;
        l.episodes = 1;
        l.validate();
    }
};

/// start, start + step, ... up to stop (inclusive, with slack for roundoff).
inline std::vector<double> gamma_range(double start, double stop, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("gamma step must be > 0");
    std::vector<double> g;
    for (long i = 0;; ++i) {
        const double v = start + static_cast<double>(i) * step;
        if (v > stop + 1e-9 * step) break;
        g.push_back(v);
    }
    return g;
}

inline LearnerConfig learner_from_json(const Json& j, LearnerConfig cfg = {}) {
    if (!j.is_object()) throw ModelError("learner", "expected an object");
    auto num = [&](const char* key, double& out) {
        if (auto it = j.find(key); it != j.end()) out = detail::number(*it, std::string("learner.") + key);
    };
    num("epsilon", cfg.epsilon);
    num("eta", cfg.eta);
    num("q_init", cfg.q_init);
    if (auto it = j.find("step_size"); it != j.end()) {
        const auto& ss = *it;
        cfg.step_size.numerator = detail::number(detail::member(ss, "numerator", "learner.step_size"),
                                                 "learner.step_size.numerator");
        cfg.step_size.offset = detail::number(detail::member(ss, "offset", "learner.step_size"),
                                              "learner.step_size.offset");
        if (auto e = ss.find("exponent"); e != ss.end())
            cfg.step_size.exponent = detail::number(*e, "learner.step_size.exponent");
    }
    if (auto it = j.find("episodes"); it != j.end() && !it->is_null())
        cfg.episodes = detail::integer(*it, "learner.episodes");
    if (auto it = j.find("max_episode_steps"); it != j.end())
        cfg.max_episode_steps = detail::integer(*it, "learner.max_episode_steps");
    return cfg;
}

/// Parses a sweep file. `gamma_grid` is either an explicit array or
/// {"start": a, "stop": b, "step": h}.
inline SweepConfig sweep_from_json(const Json& j) {
    SweepConfig cfg;
    const auto& grid = detail::member(j, "gamma_grid", "");
    if (grid.is_array()) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            cfg.gamma_grid.push_back(detail::number(grid[i], detail::idx("gamma_grid", i)));
    } else {
        cfg.gamma_grid = gamma_range(detail::number(detail::member(grid, "start", "gamma_grid"), "gamma_grid.start"),
                                     detail::number(detail::member(grid, "stop", "gamma_grid"), "gamma_grid.stop"),
                                     detail::number(detail::member(grid, "step", "gamma_grid"), "gamma_grid.step"));
    }
    if (auto it = j.find("learner"); it != j.end()) {
        cfg.learner = learner_from_json(*it);
        if (auto e = it->find("episodes"); e != it->end() && !e->is_null()) cfg.episodes = cfg.learner.episodes;
    }
    if (auto it = j.find("runs"); it != j.end()) cfg.runs = detail::integer(*it, "runs");
    if (auto it = j.find("base_seed"); it != j.end()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
            throw ModelError("base_seed", "expected a non-negative integer");
        cfg.base_seed = it->get<std::uint64_t>();
    }
    if (auto it = j.find("tol"); it != j.end()) cfg.tol = detail::number(*it, "tol");
    if (auto it = j.find("output_path"); it != j.end()) {
        if (!it->is_string()) throw ModelError("output_path", "expected a string");
        cfg.output_path = it->get<std::string>();
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ModelError("sweep", e.what());
    }
    return cfg;
}

struct SweepOptions {
    unsigned workers = 1;
    std::ostream* csv = nullptr;      ///< header + one row per gamma, written in grid order as rows complete
    std::ostream* progress = nullptr; ///< human-readable progress lines
};

/// Runs the sweep. Cells (DP per gamma, one learner run per (gamma, run))
/// are executed by a bounded worker pool; every reduction is an ordered sum
/// so the output does not depend on the number of workers. A failing cell
/// marks its row with an error and the sweep continues.
inline std::vector<MetricsReport> run_sweep(const DeviceModel& model_template, const SweepConfig& cfg,
                                            const SweepOptions& opt = {}) {
    cfg.validate();
    const std::size_t rows = cfg.gamma_grid.size();
    const auto runs = static_cast<std::size_t>(cfg.runs);
    const std::size_t cells_per_row = runs + 1;

    LearnerConfig learner = cfg.learner;
    learner.episodes = cfg.episodes.value_or(default_episode_budget(model_template.params.alpha));

    std::vector<std::shared_ptr<const Kernel>> kernels(rows);
    std::vector<MetricsReport> reports(rows);
    std::vector<std::string> row_setup_error(rows);
    for (std::size_t k = 0; k < rows; ++k) {
        reports[k].gamma = cfg.gamma_grid[k];
        reports[k].runs = cfg.runs;
        try {
            kernels[k] = std::make_shared<const Kernel>(with_gamma(model_template, cfg.gamma_grid[k]));
        } catch (const std::exception& e) {
            row_setup_error[k] = e.what();
        }
    }

    std::vector<DrPotential> potentials(rows);
    std::vector<double> lifetime(rows * runs, NAN);
    std::vector<std::string> cell_error(rows * cells_per_row);

    auto run_cell = [&](std::size_t cell) {
        const std::size_t k = cell / cells_per_row;
        const std::size_t c = cell % cells_per_row;
        if (!kernels[k]) return;
        try {
            if (c == 0) {
                potentials[k] = dr_potential(*kernels[k], cfg.tol);
            } else {
                const std::size_t r = c - 1;
                Environment env(kernels[k]);
                RngStream rng(derive_seed(cfg.base_seed, k, r));
                lifetime[k * runs + r] = learn(env, learner, rng).lifetime_cost;
            }
        } catch (const std::exception& e) {
            cell_error[cell] = e.what();
        }
    };

    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::size_t> remaining(rows, cells_per_row);
    std::atomic<std::size_t> next{0};
    const std::size_t total = rows * cells_per_row;
    auto worker = [&] {
        for (std::size_t cell; (cell = next.fetch_add(1)) < total;) {
            run_cell(cell);
            std::lock_guard lock(mu);
            if (--remaining[cell / cells_per_row] == 0) cv.notify_all();
        }
    };

    const unsigned workers = std::max(1U, opt.workers);
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);

    if (opt.csv) *opt.csv << csv_header() << '\n' << std::flush;
    for (std::size_t k = 0; k < rows; ++k) {
        {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return remaining[k] == 0; });
        }
        auto& rep = reports[k];
        rep.error = row_setup_error[k];
        for (std::size_t c = 0; c < cells_per_row && rep.error.empty(); ++c)
            rep.error = cell_error[k * cells_per_row + c];
        const bool dp_ok = row_setup_error[k].empty() && cell_error[k * cells_per_row].empty();
        if (dp_ok) {
            const auto& pot = potentials[k];
            rep.v_base = pot.v_base;
            rep.v_star = pot.v_star;
            rep.drp = pot.drp;
            rep.rdrp = pot.rdrp;
        }
        if (rep.error.empty()) {
            double sum = 0.0;
            for (std::size_t r = 0; r < runs; ++r) sum += lifetime[k * runs + r];
            rep.v_tilde_mean = sum / static_cast<double>(runs);
            if (runs > 1) {
                double ss = 0.0;
                for (std::size_t r = 0; r < runs; ++r) {
                    const double d = lifetime[k * runs + r] - rep.v_tilde_mean;
                    ss += d * d;
                }
                rep.v_tilde_se = std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs));
            }
            if (rep.v_base > 0.0) rep.ri = relative_improvement(rep.v_base, rep.v_tilde_mean);
        }
        if (opt.csv) *opt.csv << csv_row(rep) << '\n' << std::flush;
        if (opt.progress) {
            *opt.progress << "gamma " << format_number(rep.gamma) << " (" << (k + 1) << "/" << rows << ")";
            if (rep.error.empty())
                *opt.progress << " rdrp " << (rep.rdrp ? format_number(*rep.rdrp) : "undefined") << " ri "
                              << (rep.ri ? format_number(*rep.ri) : "undefined") << '\n';
            else
                *opt.progress << " FAILED: " << rep.error << '\n';
        }
    }
    return reports;
}

} // namespace drmdp
