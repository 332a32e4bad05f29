#include "gml/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace gml {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out = s.substr(first, last - first + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, delimiter)) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == delimiter) {
        cells.emplace_back();
    }
    return cells;
}

std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) {
        return std::nullopt;
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::size_t> resolve_label_column(const std::string& spec, std::size_t columns,
                                                const std::vector<std::string>* header, const std::string& name) {
    if (spec == "none") {
        return std::nullopt;
    }
    if (spec == "last") {
        return columns - 1;
    }
    if (spec == "first") {
        return 0;
    }
    char* end = nullptr;
    const long idx = std::strtol(spec.c_str(), &end, 10);
    if (!spec.empty() && end == spec.c_str() + spec.size()) {
        const long resolved = idx < 0 ? static_cast<long>(columns) + idx : idx;
        if (resolved < 0 || resolved >= static_cast<long>(columns)) {
            throw DataError(name + ": label column " + spec + " is out of range for " + std::to_string(columns) +
                            " columns");
        }
        return static_cast<std::size_t>(resolved);
    }
    if (header) {
        const auto it = std::find(header->begin(), header->end(), spec);
        if (it != header->end()) {
            return static_cast<std::size_t>(it - header->begin());
        }
        throw DataError(name + ": no column named '" + spec + "' in the header");
    }
    throw DataError(name + ": label column '" + spec + "' given by name but the file has no header row");
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int l : labels) {
        ++counts[static_cast<std::size_t>(l)];
    }
    return counts;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.name = name;
    out.num_classes = num_classes;
    out.class_names = class_names;
    out.feature_names = feature_names;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
        if (!labels.empty()) {
            out.labels.push_back(labels[rows[i]]);
        }
    }
    return out;
}

Dataset parse_csv(const std::string& text, const std::string& name, const std::string& label_column, char delimiter) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        rows.emplace_back(line_no, split(line, delimiter));
    }
    if (rows.empty()) {
        throw DataError(name + ": no data rows");
    }
    const std::size_t columns = rows.front().second.size();

    // Header detection needs the label column position, which may itself
    // depend on the header; resolve it positionally first.
    const std::vector<std::string>& first = rows.front().second;
    std::optional<std::size_t> positional;
    try {
        positional = resolve_label_column(label_column, columns, nullptr, name);
    } catch (const DataError&) {
        positional = std::nullopt;  // named column: the first row must be a header
    }
    bool has_header = true;
    for (std::size_t c = 0; c < columns; ++c) {
        if ((!positional || c != *positional) && parse_number(first[c])) {
            has_header = false;
        }
    }
    std::vector<std::string> header;
    if (has_header) {
        header = first;
        rows.erase(rows.begin());
    }
    const std::optional<std::size_t> label_col =
        resolve_label_column(label_column, columns, has_header ? &header : nullptr, name);
    if (rows.empty()) {
        throw DataError(name + ": header but no data rows");
    }

    const std::size_t k = columns - (label_col ? 1 : 0);
    if (k == 0) {
        throw DataError(name + ": no feature columns");
    }
    Dataset ds;
    ds.name = name;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < columns; ++c) {
        if (!label_col || c != *label_col) {
            ds.feature_names.push_back(has_header ? header[c] : "f" + std::to_string(ds.feature_names.size()));
        }
    }
    std::map<std::string, int> encoding;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& [at_line, cells] = rows[r];
        if (cells.size() != columns) {
            throw DataError(name + ": line " + std::to_string(at_line) + " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(columns));
        }
        std::size_t f = 0;
        for (std::size_t c = 0; c < columns; ++c) {
            const std::string where =
                name + ": line " + std::to_string(at_line) + ", column " + std::to_string(c + 1);
            if (label_col && c == *label_col) {
                if (cells[c].empty()) {
                    throw DataError(where + ": missing label");
                }
                auto [it, inserted] = encoding.emplace(cells[c], static_cast<int>(encoding.size()));
                if (inserted) {
                    ds.class_names.push_back(cells[c]);
                }
                ds.labels.push_back(it->second);
                continue;
            }
            if (cells[c].empty()) {
                throw DataError(where + ": missing value");
            }
            const auto v = parse_number(cells[c]);
            if (!v) {
                throw DataError(where + ": non-numeric feature '" + cells[c] + "'");
            }
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f++)) = *v;
        }
    }
    ds.num_classes = static_cast<int>(encoding.size());
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column, char delimiter) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), path.stem().string(), label_column, delimiter);
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = x;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        out.col(c) = (out.col(c).array() - mean[k]) / scale[k];
    }
    return out;
}

Scaler fit_scaler(const Eigen::MatrixXd& train) {
    if (train.rows() == 0) {
        throw std::invalid_argument("fit_scaler: empty training split");
    }
    Scaler s;
    const double n = static_cast<double>(train.rows());
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        const double mean = train.col(c).sum() / n;
        const double var = (train.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        s.mean.push_back(mean);
        s.scale.push_back(sd > 0.0 ? sd : 1.0);
    }
    return s;
}

Standardized standardize(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test) {
    Scaler scaler = fit_scaler(train);
    return Standardized{scaler.apply(train), scaler.apply(test), std::move(scaler)};
}

}  // namespace gml
