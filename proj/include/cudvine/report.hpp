#pragma once

// Fit report serialization. Reports are ordered JSON so identical inputs
// produce byte-identical files; wall-clock information lives in a separate
// metadata object that callers may strip before comparing.

#include <fstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "estimation.hpp"
#include "panel.hpp"

namespace cudvine {

using ordered_json = nlohmann::ordered_json;

inline ordered_json copula_to_json(const BivariateCopula& c) {
    return ordered_json{{"family", family_name(c.family)}, {"params", c.params}};
}

inline BivariateCopula copula_from_json(const ordered_json& j) {
    return BivariateCopula(family_from_name(j.at("family").get<std::string>()),
                           j.at("params").get<std::vector<double>>());
}

inline ordered_json matrix_to_json(const math::Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ordered_json cross_to_json(const CrossCopulaSpec& s) {
    ordered_json j;
    j["kind"] = cross_kind_name(s.kind);
    if (s.kind != CrossKind::time_varying_t) j["correlation"] = matrix_to_json(s.correlation);
    if (s.is_student()) j["nu"] = s.nu;
    if (s.matern) {
        j["matern"] = ordered_json{{"range", s.matern->range},
                                   {"smoothness", s.matern->smoothness}};
    }
    if (s.dcc) {
        j["dcc"] = ordered_json{{"a", s.dcc->a},
                                {"b", s.dcc->b},
                                {"qbar", matrix_to_json(s.dcc->qbar)}};
    }
    return j;
}

inline ordered_json report_to_json(const FitReport& report, const std::string& config_hash,
                                   const std::string& timestamp) {
    ordered_json j;
    j["metadata"] = ordered_json{{"tool", "cudvine"}, {"created", timestamp}};
    j["config_hash"] = config_hash;
    j["seed"] = report.seed;

    ordered_json series = ordered_json::array();
    for (std::size_t i = 0; i < report.model.series.size(); ++i) {
        const auto& m = report.model.series[i];
        ordered_json js;
        js["name"] = (i < report.series.size() && !report.series[i].name.empty())
                         ? report.series[i].name
                         : "s" + std::to_string(i + 1);
        js["order"] = m.spec.order();
        ordered_json trees = ordered_json::array();
        for (const auto& tree : m.spec.trees) trees.push_back(copula_to_json(tree));
        js["trees"] = std::move(trees);
        if (i < report.series.size()) {
            js["loglik"] = report.series[i].loglik;
            js["optimizer_evaluations"] = report.series[i].evaluations;
            if (!report.series[i].selection_trail.empty()) {
                ordered_json trail = ordered_json::array();
                for (const auto& level : report.series[i].selection_trail) {
                    ordered_json jl;
                    jl["tree"] = level.tree;
                    jl["chosen"] = level.chosen;
                    ordered_json cands = ordered_json::array();
                    for (const auto& c : level.candidates)
                        cands.push_back(ordered_json{{"family", c.family},
                                                     {"loglik", c.loglik},
                                                     {"bic", c.bic}});
                    jl["candidates"] = std::move(cands);
                    trail.push_back(std::move(jl));
                }
                js["selection"] = std::move(trail);
            }
        }
        series.push_back(std::move(js));
    }
    j["series"] = std::move(series);

    if (report.cross) {
        j["cross"] = cross_to_json(report.cross->spec);
        j["cross"]["loglik"] = report.cross->loglik;
        j["cross"]["optimizer_evaluations"] = report.cross->evaluations;
    }

    ordered_json params;
    for (const auto& [name, value] : report.parameters()) params[name] = value;
    j["parameters"] = std::move(params);

    if (!report.bootstrap_se.empty()) {
        ordered_json se;
        for (const auto& [name, value] : report.bootstrap_se) se[name] = value;
        j["bootstrap_se"] = std::move(se);
    }
    return j;
}

inline void write_json(const ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace cudvine
