#pragma once

// JSON serialization of problem instances. Table layouts (outermost index
// first):
//   dissatisfaction.u_r, u_c, requests.continuation : [s + W][g - 1]
//   dissatisfaction.u_e                              : [s], s = 0..W_hat
//   requests.arrival                                 : [s][d + W][g - 1]
//   requests.regen                                   : [{"s": .., "g": .., "p": ..}]
// See docs/config-format.md.

#include "drmdp/error.hpp"
#include "drmdp/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace drmdp {

using Json = nlohmann::json;

namespace detail {

inline const Json& member(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ModelError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ModelError(path.empty() ? key : path + "." + key, "missing key");
    return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ModelError(path, "expected a number");
    return j.get<double>();
}

inline int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ModelError(path, "expected an integer");
    return j.get<int>();
}

inline const Json& array(const Json& j, std::size_t size, const std::string& path) {
    if (!j.is_array()) throw ModelError(path, "expected an array");
    if (j.size() != size)
        throw ModelError(path, "expected " + std::to_string(size) + " entries, found " + std::to_string(j.size()));
    return j;
}

inline RequestTable request_table(const Json& j, const DeviceParams& p, const std::string& path) {
    RequestTable t(p.W, p.g_max);
    array(j, static_cast<std::size_t>(2 * p.W + 1), path);
    for (int s = -p.W; s <= p.W; ++s) {
        const auto row_path = idx(path, static_cast<std::size_t>(s + p.W));
        const auto& row = array(j[static_cast<std::size_t>(s + p.W)], static_cast<std::size_t>(p.g_max), row_path);
        for (int g = 1; g <= p.g_max; ++g)
            t.at(s, g) = number(row[static_cast<std::size_t>(g - 1)], idx(row_path, static_cast<std::size_t>(g - 1)));
    }
    return t;
}

inline Json request_table_json(const RequestTable& t) {
    Json out = Json::array();
    for (int s = -t.W(); s <= t.W(); ++s) {
        Json row = Json::array();
        for (int g = 1; g <= t.g_max(); ++g) row.push_back(t(s, g));
        out.push_back(row);
    }
    return out;
}

} // namespace detail

/// Parses and validates an instance. Errors carry the path of the offending
/// entry, e.g. "requests.arrival[3][1][0]".
inline DeviceModel model_from_json(const Json& j) {
    using namespace detail;
    DeviceModel m;

    const auto& prices = member(j, "prices", "");
    if (!prices.is_array()) throw ModelError("prices", "expected an array");
    for (std::size_t i = 0; i < prices.size(); ++i) m.price_chain.prices.push_back(number(prices[i], idx("prices", i)));
    const std::size_t n = m.price_chain.prices.size();
    const auto& trans = array(member(j, "price_transition", ""), n, "price_transition");
    for (std::size_t i = 0; i < n; ++i) {
        const auto path = idx("price_transition", i);
        const auto& row = array(trans[i], n, path);
        std::vector<double> r(n);
        for (std::size_t c = 0; c < n; ++c) r[c] = number(row[c], idx(path, c));
        m.price_chain.transition.push_back(std::move(r));
    }

    auto& p = m.params;
    p.W = integer(member(j, "W", ""), "W");
    p.W_hat = integer(member(j, "W_hat", ""), "W_hat");
    p.g_max = integer(member(j, "g_max", ""), "g_max");
    p.C = number(member(j, "C", ""), "C");
    p.alpha = number(member(j, "alpha", ""), "alpha");
    p.gamma = number(member(j, "gamma", ""), "gamma");
    validate(p); // table shapes below depend on these
    if (auto it = j.find("theorem1_compliant"); it != j.end()) {
        if (!it->is_boolean()) throw ModelError("theorem1_compliant", "expected a boolean");
        m.theorem1_compliant = it->get<bool>();
    }

    const auto& dis = member(j, "dissatisfaction", "");
    m.dissatisfaction.u_r = request_table(member(dis, "u_r", "dissatisfaction"), p, "dissatisfaction.u_r");
    m.dissatisfaction.u_c = request_table(member(dis, "u_c", "dissatisfaction"), p, "dissatisfaction.u_c");
    const auto& ue = array(member(dis, "u_e", "dissatisfaction"), static_cast<std::size_t>(p.W_hat + 1),
                           "dissatisfaction.u_e");
    for (std::size_t s = 0; s < ue.size(); ++s)
        m.dissatisfaction.u_e.push_back(number(ue[s], idx("dissatisfaction.u_e", s)));

    const auto& req = member(j, "requests", "");
    m.requests.arrival = ArrivalTable(p.W, p.W_hat, p.g_max);
    const auto& arr = array(member(req, "arrival", "requests"), static_cast<std::size_t>(p.W_hat + 1), "requests.arrival");
    for (int s = 0; s <= p.W_hat; ++s) {
        const auto sp = idx("requests.arrival", static_cast<std::size_t>(s));
        const auto& by_d = array(arr[static_cast<std::size_t>(s)], static_cast<std::size_t>(p.W + 1), sp);
        for (int d = -p.W; d <= 0; ++d) {
            const auto dp = idx(sp, static_cast<std::size_t>(d + p.W));
            const auto& by_g = array(by_d[static_cast<std::size_t>(d + p.W)], static_cast<std::size_t>(p.g_max), dp);
            for (int g = 1; g <= p.g_max; ++g)
                m.requests.arrival.at(s, d, g) =
                    number(by_g[static_cast<std::size_t>(g - 1)], idx(dp, static_cast<std::size_t>(g - 1)));
        }
    }
    m.requests.continuation = request_table(member(req, "continuation", "requests"), p, "requests.continuation");
    const auto& regen = member(req, "regen", "requests");
    if (!regen.is_array()) throw ModelError("requests.regen", "expected an array");
    for (std::size_t i = 0; i < regen.size(); ++i) {
        const auto path = idx("requests.regen", i);
        m.requests.regen.push_back({integer(member(regen[i], "s", path), path + ".s"),
                                    integer(member(regen[i], "g", path), path + ".g"),
                                    number(member(regen[i], "p", path), path + ".p")});
    }

    validate(m);
    return m;
}

inline Json to_json(const DeviceModel& m) {
    const auto& p = m.params;
    Json j;
    j["prices"] = m.price_chain.prices;
    j["price_transition"] = m.price_chain.transition;
    j["W"] = p.W;
    j["W_hat"] = p.W_hat;
    j["g_max"] = p.g_max;
    j["C"] = p.C;
    j["alpha"] = p.alpha;
    j["gamma"] = p.gamma;
    j["theorem1_compliant"] = m.theorem1_compliant;
    j["dissatisfaction"] = {{"u_r", detail::request_table_json(m.dissatisfaction.u_r)},
                            {"u_c", detail::request_table_json(m.dissatisfaction.u_c)},
                            {"u_e", m.dissatisfaction.u_e}};
    Json arrival = Json::array();
    for (int s = 0; s <= p.W_hat; ++s) {
        Json by_d = Json::array();
        for (int d = -p.W; d <= 0; ++d) {
            Json by_g = Json::array();
            for (int g = 1; g <= p.g_max; ++g) by_g.push_back(m.requests.arrival(s, d, g));
            by_d.push_back(by_g);
        }
        arrival.push_back(by_d);
    }
    Json regen = Json::array();
    for (const auto& e : m.requests.regen) regen.push_back({{"s", e.s}, {"g", e.g}, {"p", e.prob}});
    j["requests"] = {{"arrival", arrival},
                     {"continuation", detail::request_table_json(m.requests.continuation)},
                     {"regen", regen}};
    return j;
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

inline DeviceModel load_model(const std::filesystem::path& path) {
    const Json j = read_json_file(path);
    try {
        return model_from_json(j);
    } catch (const ModelError& e) {
        throw ModelError(e.path(), std::string(e.what()).substr(e.path().empty() ? 0 : e.path().size() + 2) +
                                       " (in " + path.string() + ")");
    }
}

} // namespace drmdp
