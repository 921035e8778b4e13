#pragma once
// Delimited-text ingestion and emission.
//
// All floating-point output uses %.17g so that written values parse back to
// the identical double. Readers are strict: a cell that does not parse as a
// number is an error naming the file line and column.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "varnet/dataset.hpp"
#include "varnet/matrix.hpp"

namespace varnet {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw CsvError(path + ": empty file");
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_csv_line(line));
    }
    return table;
}

inline double parse_cell(const std::string& cell, std::size_t file_line,
                         const std::string& column) {
    errno = 0;
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE)
        throw CsvError("line " + std::to_string(file_line) + ", column '" + column +
                       "': cannot parse '" + cell + "' as a number");
    return v;
}

struct TabularDataset {
    std::vector<std::string> feature_names;
    std::string target_name;
    Matrix features;              // n x d, raw units until minmax_scale
    std::vector<double> target;
    std::string source;           // provenance: originating path
    bool target_logged = false;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

// Reads the named feature and target columns. Header row required; every
// data cell of a used column must parse as a number.
inline TabularDataset load_csv(const std::string& path,
                               const std::vector<std::string>& feature_cols,
                               const std::string& target_col) {
    const CsvTable table = read_csv(path);
    auto column_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t j = 0; j < table.header.size(); ++j)
            if (table.header[j] == name) return j;
        throw CsvError(path + ": unknown column '" + name + "'");
    };
    std::vector<std::size_t> fidx;
    for (const auto& name : feature_cols) fidx.push_back(column_index(name));
    const std::size_t tidx = column_index(target_col);

    TabularDataset out;
    out.feature_names = feature_cols;
    out.target_name = target_col;
    out.source = path;
    out.features = Matrix(table.rows.size(), feature_cols.size());
    out.target.resize(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t file_line = i + 2;  // 1-based, after the header
        if (row.size() != table.header.size())
            throw CsvError("line " + std::to_string(file_line) + ": expected " +
                           std::to_string(table.header.size()) + " cells, got " +
                           std::to_string(row.size()));
        for (std::size_t j = 0; j < fidx.size(); ++j)
            out.features(i, j) = parse_cell(row[fidx[j]], file_line, feature_cols[j]);
        out.target[i] = parse_cell(row[tidx], file_line, target_col);
    }
    return out;
}

struct ScalingParams {
    std::vector<double> col_min;
    std::vector<double> col_max;
    std::vector<bool> degenerate;   // constant columns, mapped to zero

    double inverse(std::size_t col, double scaled) const {
        if (degenerate[col]) return col_min[col];
        return col_min[col] + scaled * (col_max[col] - col_min[col]);
    }
};

// Maps every feature column onto [0,1]; constant columns become zero and are
// flagged. Returns the scaled copy with the parameters for inversion.
inline std::pair<TabularDataset, ScalingParams> minmax_scale(const TabularDataset& raw) {
    if (raw.size() == 0) throw std::invalid_argument("minmax_scale: empty dataset");
    TabularDataset out = raw;
    ScalingParams params;
    const std::size_t d = raw.dim();
    params.col_min.resize(d);
    params.col_max.resize(d);
    params.degenerate.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = raw.features(0, j), hi = raw.features(0, j);
        for (std::size_t i = 1; i < raw.size(); ++i) {
            lo = std::min(lo, raw.features(i, j));
            hi = std::max(hi, raw.features(i, j));
        }
        params.col_min[j] = lo;
        params.col_max[j] = hi;
        params.degenerate[j] = (lo == hi);
        for (std::size_t i = 0; i < raw.size(); ++i)
            out.features(i, j) = params.degenerate[j]
                                     ? 0.0
                                     : (raw.features(i, j) - lo) / (hi - lo);
    }
    return {std::move(out), std::move(params)};
}

// Replaces the target with its natural log; every value must be positive.
inline void apply_log_target(TabularDataset& data) {
    for (std::size_t i = 0; i < data.target.size(); ++i) {
        if (data.target[i] <= 0.0)
            throw std::invalid_argument("log target: non-positive value at row " +
                                        std::to_string(i + 1));
        data.target[i] = std::log(data.target[i]);
    }
    data.target_logged = true;
}

inline Dataset to_dataset(const TabularDataset& scaled) {
    Dataset out;
    out.xs = scaled.features;
    out.ys = scaled.target;
    out.validate();
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

}  // namespace varnet
