#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gml {

struct Dataset {
    std::string name;
    Eigen::MatrixXd features;          // N x K
    std::vector<int> labels;           // 0..num_classes-1, empty when unlabeled
    int num_classes = 0;
    std::vector<std::string> class_names;    // in encoding order
    std::vector<std::string> feature_names;  // from the header, else "f0", "f1", ...

    std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
    std::vector<std::size_t> class_counts() const;

    /// Rows `rows` of this dataset (labels and class encoding preserved).
    Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Malformed input, with the offending location in the message.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Loads a delimited text file. `label_column` is "last" (default), "first",
/// "none" (no label column), a zero-based index (negative counts from the
/// end), or a header name. A header row is recognized when none of its
/// feature cells parse as numbers. Class labels are encoded 0, 1, ... in
/// order of first appearance. Blank lines are skipped.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column = "last",
                 char delimiter = ',');

/// Same as load_csv on in-memory text; `name` labels errors and the dataset.
Dataset parse_csv(const std::string& text, const std::string& name, const std::string& label_column = "last",
                  char delimiter = ',');

/// Per-feature z-score parameters estimated on a training split.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;  // population std, or 1 for constant features

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct Standardized {
    Eigen::MatrixXd train;
    Eigen::MatrixXd test;
    Scaler scaler;
};

Scaler fit_scaler(const Eigen::MatrixXd& train);

/// Fits the scaler on `train` only and applies it to both splits.
Standardized standardize(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test);

}  // namespace gml
