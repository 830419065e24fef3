#pragma once

// Flat text format for Q-tables and policies: one line per (state, action),
//
//   # <kind> states=<n>
//   <state index> <off|on> <value>
//
// Values are written with 17 significant digits so they read back exactly.

#include "drmdp/solver.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace drmdp {

namespace detail {

inline void write_rows(std::ostream& out, const char* kind, std::size_t states,
                       const std::vector<double>& values) {
    out << "# " << kind << " states=" << states << '\n';
    char buf[64];
    for (std::size_t k = 0; k < states; ++k)
        for (Action a : kActions) {
            std::snprintf(buf, sizeof buf, "%.17g", values[k * kActionCount + to_index(a)]);
            out << k << ' ' << to_string(a) << ' ' << buf << '\n';
        }
}

inline std::vector<double> read_rows(std::istream& in, const std::string& kind) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty " + kind + " file");
    const std::string prefix = "# " + kind + " states=";
    if (line.rfind(prefix, 0) != 0) throw std::runtime_error("expected header '" + prefix + "<n>'");
    const std::size_t states = std::stoul(line.substr(prefix.size()));
    std::vector<double> values(states * kActionCount, NAN);
    std::vector<bool> seen(values.size(), false);
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t k;
        std::string action;
        double v;
        if (!(ls >> k >> action >> v) || k >= states || (action != "off" && action != "on"))
            throw std::runtime_error(kind + " line " + std::to_string(lineno) + ": malformed record");
        const std::size_t slot = k * kActionCount + (action == "on" ? 1 : 0);
        values[slot] = v;
        seen[slot] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) throw std::runtime_error(kind + ": missing record for state " + std::to_string(i / kActionCount));
    return values;
}

} // namespace detail

inline void write_qtable(std::ostream& out, const QTable& q) {
    detail::write_rows(out, "qtable", q.state_count(), q.values());
}

inline void write_policy(std::ostream& out, const Policy& mu) {
    detail::write_rows(out, "policy", mu.state_count(), mu.values());
}

inline QTable read_qtable(std::istream& in) {
    auto values = detail::read_rows(in, "qtable");
    QTable q(values.size() / kActionCount);
    q.values() = std::move(values);
    return q;
}

inline Policy read_policy(std::istream& in) {
    const auto values = detail::read_rows(in, "policy");
    Policy mu(values.size() / kActionCount);
    for (std::size_t k = 0; k < mu.state_count(); ++k) mu.set_probs(k, values[2 * k], values[2 * k + 1]);
    return mu;
}

} // namespace drmdp
