#pragma once

// Panel file handling. A panel CSV has a header row, a first column of
// time labels, and one numeric column per series; it must be rectangular
// with no missing cells.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "math/matrix.hpp"

namespace cudvine {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TimeSeriesPanel {
    std::vector<std::string> time_labels;   // length T
    std::vector<std::string> series_names;  // length d
    math::Matrix values;                    // T x d

    int rows() const { return values.rows(); }
    int cols() const { return values.cols(); }
};

namespace panel_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline double parse_cell(const std::string& cell, int line_no, const std::string& col) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ", column '" + col +
                        "': cell '" + cell + "' is not a finite number");
    }
}

}  // namespace panel_detail

inline TimeSeriesPanel ingest_panel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open panel file: " + path);

    TimeSeriesPanel panel;
    std::string line;
    int line_no = 0;
    std::vector<std::vector<double>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = panel_detail::split_csv_line(line);
        if (line_no == 1) {
            if (cells.size() < 2)
                throw DataError("header must name a time column and at least one series");
            panel.series_names.assign(cells.begin() + 1, cells.end());
            continue;
        }
        if (cells.size() != panel.series_names.size() + 1)
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(panel.series_names.size() + 1) + " cells, found " +
                            std::to_string(cells.size()));
        panel.time_labels.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j)
            row.push_back(panel_detail::parse_cell(cells[j], line_no, panel.series_names[j - 1]));
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw DataError("panel needs at least two data rows: " + path);

    const int t = static_cast<int>(rows.size());
    const int d = static_cast<int>(panel.series_names.size());
    panel.values = math::Matrix(t, d);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < d; ++j) panel.values(i, j) = rows[i][j];

    for (int j = 0; j < d; ++j) {
        const double first = panel.values(0, j);
        bool constant = true;
        for (int i = 1; i < t && constant; ++i) constant = (panel.values(i, j) == first);
        if (constant)
            throw DataError("series '" + panel.series_names[j] + "' is constant (degenerate)");
    }
    return panel;
}

inline void write_panel(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write panel file: " + path);
    out << "time";
    for (const auto& name : panel.series_names) out << "," << name;
    out << "\n";
    out.precision(17);
    for (int i = 0; i < panel.rows(); ++i) {
        out << panel.time_labels[i];
        for (int j = 0; j < panel.cols(); ++j) out << "," << panel.values(i, j);
        out << "\n";
    }
}

// Square labeled distance matrix: header row of site names, each data row
// is "name, d1, d2, ...".
inline math::Matrix ingest_distances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open distance file: " + path);
    std::string line;
    int line_no = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = panel_detail::split_csv_line(line);
        if (line_no == 1) {
            if (cells.size() < 3) throw DataError("distance matrix needs at least two sites");
            names.assign(cells.begin() + 1, cells.end());
            continue;
        }
        if (cells.size() != names.size() + 1)
            throw DataError("distances line " + std::to_string(line_no) + ": ragged row");
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j)
            row.push_back(panel_detail::parse_cell(cells[j], line_no, names[j - 1]));
        rows.push_back(std::move(row));
    }
    if (rows.size() != names.size()) throw DataError("distance matrix is not square");
    math::Matrix m(static_cast<int>(names.size()), static_cast<int>(names.size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace cudvine
