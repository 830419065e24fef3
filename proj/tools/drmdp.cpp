// drmdp command-line tool: solve, baseline, learn, sweep, check-theorem1, stationary.

#include "drmdp/drmdp.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace drmdp;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRefused = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string sweep;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool tol_given = false;
    unsigned workers = std::max(1U, std::thread::hardware_concurrency());
    std::string out;
    std::optional<double> gamma;
    long max_iter = 10'000'000;
    // learn
    std::string episode_log;
    std::string trajectory;
    // check-theorem1
    std::string gamma_grid = "0:10:0.5";
    std::optional<double> delta_b;
    std::size_t bruteforce_cap = kDeltaBStateCap;
    double small_rdrp = 1e-3;
};

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string("--") + what + " is required");
    if (!std::filesystem::is_regular_file(path))
        throw UsageError(std::string(what) + " file not found: " + path);
}

DeviceModel load_instance(const Options& o) {
    require_file(o.config, "config");
    DeviceModel m = load_model(o.config);
    if (o.gamma) {
        m = with_gamma(std::move(m), *o.gamma);
        validate(m);
    }
    return m;
}

void check_tol(const Options& o) {
    if (!(o.tol > 0.0)) throw UsageError("--tol must be > 0");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// "a:b:h" range or comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> g;
    try {
        if (text.find(':') != std::string::npos) {
            std::istringstream in(text);
            std::string a, b, h;
            if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, h))
                throw UsageError("gamma grid range must look like start:stop:step");
            g = gamma_range(std::stod(a), std::stod(b), std::stod(h));
        } else {
            std::istringstream in(text);
            for (std::string tok; std::getline(in, tok, ',');) g.push_back(std::stod(tok));
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("bad gamma grid '") + text + "': " + e.what());
    }
    if (g.empty()) throw UsageError("gamma grid is empty");
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] < 0.0 || (i > 0 && g[i] <= g[i - 1]))
            throw UsageError("gamma grid must be non-negative and strictly increasing");
    return g;
}

int cmd_solve(const Options& o) {
    check_tol(o);
    const DeviceModel m = load_instance(o);
    const Kernel k(m);
    const auto vi = value_iteration(k, o.tol, o.max_iter);
    const Policy mu = greedy(vi.q);
    const std::string prefix = o.out.empty() ? "solution" : o.out;
    {
        auto out = open_out(prefix + ".qtable");
        write_qtable(out, vi.q);
    }
    {
        auto out = open_out(prefix + ".policy");
        write_policy(out, mu);
    }
    std::cout << "states " << k.state_count() << '\n'
              << "gamma " << fmt(m.params.gamma) << '\n'
              << "iterations " << vi.iterations << '\n'
              << "residual " << fmt(vi.residual) << '\n'
              << "v_star " << fmt(expected_value(k, mu, vi.q)) << '\n'
              << "wrote " << prefix << ".qtable " << prefix << ".policy\n";
    if (!vi.converged) {
        std::cerr << "error: value iteration stopped after " << vi.iterations << " iterations with residual "
                  << fmt(vi.residual) << " > tol " << fmt(o.tol) << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_baseline(const Options& o) {
    check_tol(o);
    const DeviceModel m = load_instance(o);
    const Kernel k(m);
    const Policy mu = baseline_policy(k.space());
    const QTable q = policy_q(k, mu, o.tol);
    const auto dec = decompose_value(k, mu, o.tol);
    std::cout << "gamma " << fmt(m.params.gamma) << '\n'
              << "v_base " << fmt(expected_value(k, mu, q)) << '\n'
              << "bill " << fmt(dec.a_mu) << '\n'
              << "dissatisfaction " << fmt(dec.b_mu) << '\n';
    if (!o.out.empty()) {
        auto qo = open_out(o.out + ".qtable");
        write_qtable(qo, q);
        auto po = open_out(o.out + ".policy");
        write_policy(po, mu);
        std::cout << "wrote " << o.out << ".qtable " << o.out << ".policy\n";
    }
    return kExitOk;
}

int cmd_learn(const Options& o) {
    const DeviceModel m = load_instance(o);
    LearnerConfig cfg;
    cfg.episodes = default_episode_budget(m.params.alpha);
    if (!o.sweep.empty()) {
        require_file(o.sweep, "sweep");
        const Json j = read_json_file(o.sweep);
        if (auto it = j.find("learner"); it != j.end()) cfg = learner_from_json(*it, cfg);
    }
    cfg.validate();
    auto kernel = std::make_shared<const Kernel>(m);
    Environment env(kernel);
    std::ofstream trace, log;
    if (!o.trajectory.empty()) {
        trace = open_out(o.trajectory);
        env.set_trace(&trace);
    }
    if (!o.episode_log.empty()) log = open_out(o.episode_log);
    RngStream rng(o.seed);
    const auto r = learn(env, cfg, rng, o.episode_log.empty() ? nullptr : &log);
    std::cout << "episodes " << cfg.episodes << '\n'
              << "steps " << r.steps << '\n'
              << "lifetime_discounted_cost " << fmt(r.lifetime_cost) << '\n'
              << "tail_bound " << fmt(r.tail_bound) << '\n';
    if (!o.out.empty()) {
        auto qo = open_out(o.out);
        write_qtable(qo, r.q);
        std::cout << "wrote " << o.out << '\n';
    }
    return kExitOk;
}

int cmd_sweep(const Options& o) {
    require_file(o.sweep, "sweep");
    const DeviceModel m = load_instance(o);
    SweepConfig cfg = sweep_from_json(read_json_file(o.sweep));
    if (o.seed_given) cfg.base_seed = o.seed;
    if (!o.out.empty()) cfg.output_path = o.out;
    if (o.tol_given) {
        check_tol(o);
        cfg.tol = o.tol;
    }
    auto csv = open_out(cfg.output_path.string());
    SweepOptions opt;
    opt.workers = o.workers;
    opt.csv = &csv;
    opt.progress = &std::cerr;
    const auto reports = run_sweep(m, cfg, opt);
    std::size_t failed = 0;
    for (const auto& r : reports) failed += r.error.empty() ? 0 : 1;
    std::cerr << "wrote " << cfg.output_path.string() << " (" << reports.size() << " rows";
    if (failed) std::cerr << ", " << failed << " failed";
    std::cerr << ")\n";
    return failed ? kExitFailure : kExitOk;
}

int cmd_check_theorem1(const Options& o) {
    check_tol(o);
    const DeviceModel m = load_instance(o);
    auto violations = theorem1_violations(m);
    if (!m.theorem1_compliant) violations.insert(violations.begin(), "instance does not declare theorem1_compliant");
    if (!violations.empty()) {
        std::cerr << "refusing to check: instance is not declared compliant with the monotonicity preconditions\n";
        for (const auto& v : violations) std::cerr << "  " << v << '\n';
        return kExitRefused;
    }
    const auto grid = parse_grid(o.gamma_grid);
    constexpr double kTol = 1e-8;

    std::vector<DrPotential> pots;
    for (double g : grid) pots.push_back(dr_potential(with_gamma(m, g), o.tol, o.max_iter));
    bool all = true;
    auto report = [&](int claim, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS" : "FAIL") << " claim " << claim << ": " << detail << '\n';
        all = all && ok;
    };

    double base_spread = 0.0;
    for (const auto& p : pots) base_spread = std::max(base_spread, std::abs(p.v_base - pots.front().v_base));
    report(1, base_spread <= kTol, "V_base independent of gamma (max deviation " + fmt(base_spread) + ")");

    {
        std::string detail;
        bool ok;
        const auto& last = pots.back();
        const double last_rdrp = last.rdrp.value_or(0.0);
        std::optional<double> db = o.delta_b;
        const std::size_t n = state_space_size(m);
        if (!db && n <= o.bruteforce_cap) db = delta_b_bruteforce(m, o.bruteforce_cap);
        if (db) {
            const double gs = gamma_star_bound(m, *db);
            const double drp = dr_potential(with_gamma(m, 1.01 * gs), o.tol, o.max_iter).drp;
            ok = std::abs(drp) <= kTol;
            detail = "delta_B " + fmt(*db) + ", gamma* " + fmt(gs) + ", DRP(1.01 gamma*) " + fmt(drp);
        } else {
            ok = last_rdrp <= o.small_rdrp;
            detail = "RDRP at largest gamma " + fmt(grid.back()) + " is " + fmt(last_rdrp) + " (threshold " +
                     fmt(o.small_rdrp) + ")";
        }
        report(2, ok, detail);
    }

    {
        double worst = 0.0;
        for (std::size_t i = 1; i < pots.size(); ++i) {
            worst = std::max(worst, pots[i].drp - pots[i - 1].drp);
            if (pots[i].rdrp && pots[i - 1].rdrp) worst = std::max(worst, *pots[i].rdrp - *pots[i - 1].rdrp);
        }
        report(3, worst <= kTol, "DRP and RDRP non-increasing (largest increase " + fmt(worst) + ")");
    }

    {
        const auto p0 = grid.front() == 0.0 ? pots.front() : dr_potential(with_gamma(m, 0.0), o.tol, o.max_iter);
        const bool ok = p0.rdrp && std::abs(*p0.rdrp - 1.0) <= kTol;
        report(4, ok, "RDRP(0) = " + (p0.rdrp ? fmt(*p0.rdrp) : std::string("undefined")));
    }
    return all ? kExitOk : kExitFailure;
}

int cmd_stationary(const Options& o) {
    const DeviceModel m = load_instance(o);
    const auto pi = stationary_distribution(m.price_chain);
    std::cout << "index,price,probability\n";
    for (std::size_t i = 0; i < pi.size(); ++i)
        std::cout << i << ',' << fmt(m.price_chain.prices[i]) << ',' << fmt(pi[i]) << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demand-response device MDP: exact solution, Q-learning and metrics"};
    app.require_subcommand(1, 1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Instance configuration (JSON)");
        sub->add_option("--gamma", o.gamma, "Override the instance's gamma");
    };
    auto with_tol = [&](CLI::App* sub) {
        sub->add_option("--tol", o.tol, "Sup-norm Bellman residual tolerance")->capture_default_str();
        sub->add_option("--max-iter", o.max_iter, "Value-iteration iteration cap")->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve", "Value iteration; writes Q* and the greedy policy");
    common(solve);
    with_tol(solve);
    solve->add_option("--out", o.out, "Output prefix (<prefix>.qtable, <prefix>.policy)");

    auto* baseline = app.add_subcommand("baseline", "Evaluate the baseline policy");
    common(baseline);
    with_tol(baseline);
    baseline->add_option("--out", o.out, "Output prefix for its Q-table and policy");

    auto* learn_cmd = app.add_subcommand("learn", "One Q-learning run");
    common(learn_cmd);
    learn_cmd->add_option("--sweep", o.sweep, "Sweep/learner configuration (its 'learner' section is used)");
    learn_cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    learn_cmd->add_option("--out", o.out, "Write the final Q-table here");
    learn_cmd->add_option("--episode-log", o.episode_log, "Per-episode CSV log");
    learn_cmd->add_option("--trajectory", o.trajectory, "Per-step CSV trajectory dump");

    auto* sweep = app.add_subcommand("sweep", "Gamma sweep: RDRP by DP, RI by Monte-Carlo Q-learning");
    common(sweep);
    sweep->add_option("--sweep", o.sweep, "Sweep configuration (JSON)");
    auto* sweep_tol = sweep->add_option("--tol", o.tol, "Sup-norm Bellman residual tolerance (overrides tol)");
    auto* seed_opt = sweep->add_option("--seed", o.seed, "Base seed (overrides base_seed in the sweep file)");
    sweep->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
    sweep->add_option("--out", o.out, "CSV output path (overrides output_path)");

    auto* theorem = app.add_subcommand("check-theorem1", "Check the gamma-monotonicity results numerically");
    common(theorem);
    with_tol(theorem);
    theorem->add_option("--gamma-grid", o.gamma_grid, "start:stop:step or comma list")->capture_default_str();
    theorem->add_option("--delta-b", o.delta_b, "Lower bound on delta_B for the gamma* check");
    theorem->add_option("--bruteforce-cap", o.bruteforce_cap, "Max states for brute-force delta_B")
        ->capture_default_str();
    theorem->add_option("--small-rdrp", o.small_rdrp, "RDRP threshold at the largest gamma when gamma* is unknown")
        ->capture_default_str();

    auto* stationary = app.add_subcommand("stationary", "Stationary distribution of the price chain");
    common(stationary);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    o.seed_given = seed_opt->count() > 0;
    o.tol_given = sweep_tol->count() > 0;

    try {
        if (*solve) return cmd_solve(o);
        if (*baseline) return cmd_baseline(o);
        if (*learn_cmd) return cmd_learn(o);
        if (*sweep) return cmd_sweep(o);
        if (*theorem) return cmd_check_theorem1(o);
        if (*stationary) return cmd_stationary(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ModelError& e) {
        std::cerr << "invalid instance: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
