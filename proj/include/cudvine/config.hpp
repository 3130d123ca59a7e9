#pragma once

// Run configuration: a line-oriented "key = value" file with dotted section
// names. The schema is strict — unknown keys are rejected so that a run is
// fully described by its config text; the canonical text is hashed into
// every output for reproducibility.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "copulas.hpp"
#include "crosscopula.hpp"
#include "udvine.hpp"

namespace cudvine {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    }
}

inline long to_long(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    }
}

// "gaussian(0.7)" or "independence" -> copula; "auto" handled by caller.
inline BivariateCopula parse_tree(const std::string& text) {
    const auto open = text.find('(');
    if (open == std::string::npos) {
        return BivariateCopula(family_from_name(trim(text)), {});
    }
    if (text.back() != ')') throw ConfigError("malformed copula spec: " + text);
    const std::string fam = trim(text.substr(0, open));
    const std::string args = text.substr(open + 1, text.size() - open - 2);
    std::vector<double> params;
    for (const auto& item : split_list(args)) params.push_back(to_double(item, fam));
    try {
        return BivariateCopula(family_from_name(fam), params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("copula spec '") + text + "': " + e.what());
    }
}

}  // namespace config_detail

struct SeriesModelConfig {
    bool auto_select = true;
    UDvineSpec trees;  // used when not auto
};

struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 0;

    // model section
    CrossKind cross_kind = CrossKind::gaussian_full;
    std::optional<double> cross_nu;
    std::vector<double> cross_rho;  // upper triangle, row-major (simulate)
    std::optional<double> cross_range, cross_smoothness;
    std::optional<double> cross_a, cross_b;
    std::string distances_path;
    SeriesModelConfig series_default;
    std::map<int, SeriesModelConfig> series_overrides;  // 1-based index

    // estimation section
    std::vector<Family> pool = {Family::gaussian, Family::student_t, Family::clayton,
                                Family::gumbel,   Family::frank,     Family::joe};
    int max_order = 3;
    double tol = 1e-8;
    int bootstrap = 0;  // replications for standard errors; 0 = off

    // simulate section
    int simulate_length = 2000;
    int simulate_burn_in = 500;
    int simulate_series = 0;  // 0 = derive from per-series model keys

    // forecast section
    int forecast_draws = 1000;
    std::vector<double> forecast_levels = {0.9, 0.95};
    std::vector<double> weights;

    // backtest section
    int backtest_days = 365;
    double var_level = 0.95;
    double qrps_level = 0.95;
    double pi_level = 0.95;

    // experiment section
    std::string experiment_kind;
    int replications = 100;
    int t_train = 2000;
    int t_test = 100;
    int t_length = 2000;
    std::vector<double> q_levels = {0.10, 0.05};
    std::vector<double> garch_params = {0.05, 0.85, 0.1, 0.0};
    int experiment_max_order = 2;
    int experiment_draws = 1000;

    std::string canonical_text;  // for hashing

    SeriesModelConfig series_model(int index_1based) const {
        const auto it = series_overrides.find(index_1based);
        return it == series_overrides.end() ? series_default : it->second;
    }
};

inline std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline RunConfig parse_config_text(const std::string& text) {
    using namespace config_detail;
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        if (kv.count(key)) throw ConfigError("duplicate key: " + key);
        kv[key] = value;
        order.push_back(key);
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        const std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(to_long(*v, "seed"));
    if (auto v = take("threads")) cfg.threads = static_cast<int>(to_long(*v, "threads"));

    if (auto v = take("model.cross.kind")) cfg.cross_kind = cross_kind_from_name(*v);
    if (auto v = take("model.cross.nu")) cfg.cross_nu = to_double(*v, "model.cross.nu");
    if (auto v = take("model.cross.rho"))
        for (const auto& item : split_list(*v)) cfg.cross_rho.push_back(to_double(item, "model.cross.rho"));
    if (auto v = take("model.cross.range")) cfg.cross_range = to_double(*v, "model.cross.range");
    if (auto v = take("model.cross.smoothness"))
        cfg.cross_smoothness = to_double(*v, "model.cross.smoothness");
    if (auto v = take("model.cross.a")) cfg.cross_a = to_double(*v, "model.cross.a");
    if (auto v = take("model.cross.b")) cfg.cross_b = to_double(*v, "model.cross.b");
    if (auto v = take("model.cross.distances")) cfg.distances_path = *v;

    auto parse_series = [&](const std::string& value) {
        SeriesModelConfig sc;
        if (trim(value) == "auto") {
            sc.auto_select = true;
            return sc;
        }
        sc.auto_select = false;
        for (const auto& item : [&] {
                 // split on commas that are outside parentheses
                 std::vector<std::string> parts;
                 std::string cur;
                 int depth = 0;
                 for (char c : value) {
                     if (c == '(') ++depth;
                     if (c == ')') --depth;
                     if (c == ',' && depth == 0) {
                         parts.push_back(trim(cur));
                         cur.clear();
                     } else {
                         cur += c;
                     }
                 }
                 if (!trim(cur).empty()) parts.push_back(trim(cur));
                 return parts;
             }()) {
            sc.trees.trees.push_back(parse_tree(item));
        }
        return sc;
    };

    if (auto v = take("model.series.default.trees")) cfg.series_default = parse_series(*v);
    for (const auto& key : order) {
        if (key.rfind("model.series.", 0) != 0 || key == "model.series.default.trees") continue;
        const std::string rest = key.substr(13);
        const auto dot = rest.find('.');
        if (dot == std::string::npos || rest.substr(dot + 1) != "trees")
            throw ConfigError("unknown key: " + key);
        const long idx = to_long(rest.substr(0, dot), key);
        if (idx < 1) throw ConfigError("series index must be >= 1 in key: " + key);
        const auto v = take(key);
        if (v) cfg.series_overrides[static_cast<int>(idx)] = parse_series(*v);
    }

    if (auto v = take("estimation.pool")) {
        cfg.pool.clear();
        for (const auto& item : split_list(*v)) cfg.pool.push_back(family_from_name(item));
        if (cfg.pool.empty()) throw ConfigError("estimation.pool must not be empty");
    }
    if (auto v = take("estimation.max_order")) {
        cfg.max_order = static_cast<int>(to_long(*v, "estimation.max_order"));
        if (cfg.max_order < 1 || cfg.max_order > 5)
            throw ConfigError("estimation.max_order must lie in [1, 5]");
    }
    if (auto v = take("estimation.tol")) cfg.tol = to_double(*v, "estimation.tol");
    if (auto v = take("estimation.bootstrap")) {
        cfg.bootstrap = static_cast<int>(to_long(*v, "estimation.bootstrap"));
        if (cfg.bootstrap != 0 && cfg.bootstrap < 50)
            throw ConfigError("estimation.bootstrap needs at least 50 replications (or 0)");
    }

    if (auto v = take("simulate.length"))
        cfg.simulate_length = static_cast<int>(to_long(*v, "simulate.length"));
    if (auto v = take("simulate.burn_in"))
        cfg.simulate_burn_in = static_cast<int>(to_long(*v, "simulate.burn_in"));
    if (auto v = take("simulate.series"))
        cfg.simulate_series = static_cast<int>(to_long(*v, "simulate.series"));

    if (auto v = take("forecast.draws"))
        cfg.forecast_draws = static_cast<int>(to_long(*v, "forecast.draws"));
    if (auto v = take("forecast.levels")) {
        cfg.forecast_levels.clear();
        for (const auto& item : split_list(*v))
            cfg.forecast_levels.push_back(to_double(item, "forecast.levels"));
    }
    if (auto v = take("forecast.weights")) {
        for (const auto& item : split_list(*v))
            cfg.weights.push_back(to_double(item, "forecast.weights"));
    }

    if (auto v = take("backtest.test_days"))
        cfg.backtest_days = static_cast<int>(to_long(*v, "backtest.test_days"));
    if (auto v = take("backtest.var_level")) cfg.var_level = to_double(*v, "backtest.var_level");
    if (auto v = take("backtest.qrps_level")) cfg.qrps_level = to_double(*v, "backtest.qrps_level");
    if (auto v = take("backtest.pi_level")) cfg.pi_level = to_double(*v, "backtest.pi_level");

    if (auto v = take("experiment.kind")) {
        cfg.experiment_kind = *v;
        if (cfg.experiment_kind != "var" && cfg.experiment_kind != "selection" &&
            cfg.experiment_kind != "mle")
            throw ConfigError("experiment.kind must be var, selection, or mle");
    }
    if (auto v = take("experiment.replications"))
        cfg.replications = static_cast<int>(to_long(*v, "experiment.replications"));
    if (auto v = take("experiment.t_train"))
        cfg.t_train = static_cast<int>(to_long(*v, "experiment.t_train"));
    if (auto v = take("experiment.t_test"))
        cfg.t_test = static_cast<int>(to_long(*v, "experiment.t_test"));
    if (auto v = take("experiment.t")) cfg.t_length = static_cast<int>(to_long(*v, "experiment.t"));
    if (auto v = take("experiment.q_levels")) {
        cfg.q_levels.clear();
        for (const auto& item : split_list(*v))
            cfg.q_levels.push_back(to_double(item, "experiment.q_levels"));
    }
    if (auto v = take("experiment.garch")) {
        cfg.garch_params.clear();
        for (const auto& item : split_list(*v))
            cfg.garch_params.push_back(to_double(item, "experiment.garch"));
        if (cfg.garch_params.size() != 4)
            throw ConfigError("experiment.garch needs four coefficients");
    }
    if (auto v = take("experiment.max_order"))
        cfg.experiment_max_order = static_cast<int>(to_long(*v, "experiment.max_order"));
    if (auto v = take("experiment.draws"))
        cfg.experiment_draws = static_cast<int>(to_long(*v, "experiment.draws"));

    if (!kv.empty()) throw ConfigError("unknown key: " + kv.begin()->first);

    // canonical text: sorted key=value lines of the original content
    std::map<std::string, std::string> all;
    {
        std::istringstream in2(text);
        while (std::getline(in2, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            all[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }
    std::ostringstream canon;
    for (const auto& [k, v] : all) canon << k << "=" << v << "\n";
    cfg.canonical_text = canon.str();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

}  // namespace cudvine
