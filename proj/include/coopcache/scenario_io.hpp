#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopcache/scenario.hpp"
#include "coopcache/sim.hpp"

namespace coopcache {

using json = nlohmann::json;

class ScenarioError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedScenario {
    Scenario scenario;
    std::optional<sim::SimConfig> sim_config;
};

namespace io_detail {

inline std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " +
           std::to_string(column);
}

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) {
            throw ScenarioError(path + ": unknown key \"" + key + "\"");
        }
    }
}

inline const json& require(const json& obj, const std::string& path,
                           const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ScenarioError(path + ": missing required key \"" + key + "\"");
    }
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ScenarioError(path + ": expected a number");
    return v.get<double>();
}

inline std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        throw ScenarioError(path + ": expected an integer");
    }
    return v.get<std::int64_t>();
}

inline Pmf parse_request(const json& v, const std::string& path) {
    if (v.is_array()) {
        std::vector<double> probs;
        probs.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            probs.push_back(
                as_number(v[i], path + "[" + std::to_string(i) + "]"));
        }
        try {
            return Pmf(std::move(probs));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(path + ": " + e.what());
        }
    }
    if (v.is_object()) {
        reject_unknown_keys(v, path, {"zipf"});
        const json& z = require(v, path, "zipf");
        if (!z.is_object()) {
            throw ScenarioError(path + ".zipf: expected an object");
        }
        reject_unknown_keys(z, path + ".zipf", {"F", "gamma_r", "permute_seed"});
        const std::int64_t files =
            as_integer(require(z, path + ".zipf", "F"), path + ".zipf.F");
        if (files < 1) {
            throw ScenarioError(path + ".zipf.F: must be >= 1");
        }
        const double gamma_r = as_number(require(z, path + ".zipf", "gamma_r"),
                                         path + ".zipf.gamma_r");
        if (!(gamma_r >= 0.0)) {
            throw ScenarioError(path + ".zipf.gamma_r: must be >= 0");
        }
        Pmf pmf = make_zipf(static_cast<std::size_t>(files), gamma_r);
        if (z.contains("permute_seed")) {
            pmf = permute_pmf(
                pmf, static_cast<std::uint64_t>(as_integer(
                         z["permute_seed"], path + ".zipf.permute_seed")));
        }
        return pmf;
    }
    throw ScenarioError(path + ": expected a probability array or {\"zipf\": ...}");
}

}  // namespace io_detail

/// Parses and fully validates a scenario document. Parse errors report
/// line/column; invariant violations report the offending field.
inline LoadedScenario parse_scenario_text(const std::string& text,
                                          const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(origin + ": parse error at " +
                            io_detail::locate(text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ScenarioError(origin + ": top level must be an object");
    }
    io_detail::reject_unknown_keys(
        doc, origin,
        {"version", "range_d", "groups", "weights", "tol_dual", "tol_utility",
         "max_sweeps", "seed", "simulation"});
    const std::int64_t version = io_detail::as_integer(
        io_detail::require(doc, origin, "version"), origin + ".version");
    if (version != 1) {
        throw ScenarioError(origin + ".version: unsupported version " +
                            std::to_string(version));
    }

    LoadedScenario loaded;
    Scenario& s = loaded.scenario;
    s.range_d = io_detail::as_number(
        io_detail::require(doc, origin, "range_d"), origin + ".range_d");
    if (doc.contains("tol_dual")) {
        s.tol_dual = io_detail::as_number(doc["tol_dual"], origin + ".tol_dual");
    }
    if (doc.contains("tol_utility")) {
        s.tol_utility =
            io_detail::as_number(doc["tol_utility"], origin + ".tol_utility");
    }
    if (doc.contains("max_sweeps")) {
        s.max_sweeps = static_cast<int>(io_detail::as_integer(
            doc["max_sweeps"], origin + ".max_sweeps"));
    }
    if (doc.contains("seed")) {
        s.seed = static_cast<std::uint64_t>(
            io_detail::as_integer(doc["seed"], origin + ".seed"));
    }

    const json& groups = io_detail::require(doc, origin, "groups");
    if (!groups.is_array() || groups.empty()) {
        throw ScenarioError(origin + ".groups: expected a nonempty array");
    }

    // Simulation block first: fixed_count-only groups derive density from it.
    std::optional<double> sim_area;
    if (doc.contains("simulation")) {
        const json& sb = doc["simulation"];
        const std::string path = origin + ".simulation";
        if (!sb.is_object()) throw ScenarioError(path + ": expected an object");
        io_detail::reject_unknown_keys(
            sb, path, {"area_side", "slots", "step_len", "placement"});
        sim::SimConfig config;
        config.area_side = io_detail::as_number(
            io_detail::require(sb, path, "area_side"), path + ".area_side");
        config.slots = static_cast<int>(io_detail::as_integer(
            io_detail::require(sb, path, "slots"), path + ".slots"));
        if (sb.contains("step_len")) {
            config.step_len =
                io_detail::as_number(sb["step_len"], path + ".step_len");
        }
        if (sb.contains("placement")) {
            const json& p = sb["placement"];
            if (!p.is_string()) {
                throw ScenarioError(path + ".placement: expected a string");
            }
            const std::string name = p.get<std::string>();
            if (name == "poisson") {
                config.placement = sim::Placement::poisson;
            } else if (name == "fixed_counts") {
                config.placement = sim::Placement::fixed_counts;
            } else {
                throw ScenarioError(path +
                                    ".placement: expected \"poisson\" or "
                                    "\"fixed_counts\", got \"" +
                                    name + "\"");
            }
        }
        sim_area = config.area_side;
        loaded.sim_config = std::move(config);
    }

    for (std::size_t k = 0; k < groups.size(); ++k) {
        const std::string path = origin + ".groups[" + std::to_string(k) + "]";
        const json& g = groups[k];
        if (!g.is_object()) throw ScenarioError(path + ": expected an object");
        io_detail::reject_unknown_keys(g, path,
                                       {"density", "request", "fixed_count"});
        GroupProfile profile;
        profile.request =
            io_detail::parse_request(io_detail::require(g, path, "request"),
                                     path + ".request");
        if (g.contains("fixed_count")) {
            const std::int64_t n =
                io_detail::as_integer(g["fixed_count"], path + ".fixed_count");
            if (n < 0) throw ScenarioError(path + ".fixed_count: must be >= 0");
            profile.fixed_count = static_cast<std::size_t>(n);
        }
        if (g.contains("density")) {
            profile.density = io_detail::as_number(g["density"], path + ".density");
        } else if (profile.fixed_count && sim_area) {
            profile.density = static_cast<double>(*profile.fixed_count) /
                              (*sim_area * *sim_area);
        } else {
            throw ScenarioError(
                path + ": needs density (or fixed_count with a simulation block)");
        }
        s.groups.push_back(std::move(profile));
    }

    if (!doc.contains("weights") ||
        (doc["weights"].is_string() &&
         doc["weights"].get<std::string>() == "social")) {
        s.weights = s.social_weights();
    } else {
        const json& w = doc["weights"];
        if (!w.is_array()) {
            throw ScenarioError(origin +
                                ".weights: expected \"social\" or an array");
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            s.weights.push_back(io_detail::as_number(
                w[i], origin + ".weights[" + std::to_string(i) + "]"));
        }
    }

    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(origin + ": " + e.what());
    }
    if (loaded.sim_config) {
        loaded.sim_config->scenario = s;
        loaded.sim_config->seed = s.seed;
        try {
            loaded.sim_config->validate();
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(origin + ": " + e.what());
        }
    }
    return loaded;
}

inline LoadedScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError(path + ": cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

// ---------------------------------------------------------------------------
// Result serialization
// ---------------------------------------------------------------------------

/// 10-significant-digit decimal formatting for CSV output.
inline std::string format_csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline json caching_to_json(const CachingProfile& caching) {
    json arr = json::array();
    for (const Pmf& c : caching.per_group) arr.push_back(c.probs());
    return arr;
}

inline CachingProfile caching_from_json(const json& doc) {
    const json* arr = &doc;
    if (doc.is_object()) {
        if (!doc.contains("caching")) {
            throw ScenarioError("caching document: missing \"caching\" key");
        }
        arr = &doc["caching"];
    }
    if (!arr->is_array() || arr->empty()) {
        throw ScenarioError("caching document: expected a nonempty array");
    }
    CachingProfile profile;
    for (std::size_t k = 0; k < arr->size(); ++k) {
        const json& row = (*arr)[k];
        if (!row.is_array()) {
            throw ScenarioError("caching[" + std::to_string(k) +
                                "]: expected an array");
        }
        std::vector<double> probs;
        probs.reserve(row.size());
        for (const auto& v : row) probs.push_back(v.get<double>());
        try {
            profile.per_group.emplace_back(std::move(probs));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError("caching[" + std::to_string(k) + "]: " +
                                e.what());
        }
    }
    return profile;
}

inline CachingProfile load_caching_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path + ": cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path + ": parse error: " + e.what());
    }
    return caching_from_json(doc);
}

inline json report_to_json(const UtilityReport& report) {
    return json{{"group_utilities", report.group_utilities},
                {"social_utility", report.social_utility},
                {"weighted_utility", report.weighted_utility},
                {"duals", report.duals},
                {"kkt_residual", report.kkt_residual},
                {"iterations", report.iterations}};
}

inline std::string trace_to_csv(const sim::UtilityTrace& trace) {
    std::ostringstream out;
    if (trace.per_slot.empty()) return "";
    out << "slot";
    for (std::size_t k = 0; k < trace.per_slot.front().size(); ++k) {
        out << ",group" << (k + 1);
    }
    out << "\n";
    for (std::size_t n = 0; n < trace.per_slot.size(); ++n) {
        out << (n + 1);
        for (double u : trace.per_slot[n]) {
            out << "," << format_csv_number(u);
        }
        out << "\n";
    }
    return out.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << content;
}

}  // namespace coopcache
