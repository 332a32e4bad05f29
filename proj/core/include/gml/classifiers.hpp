#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gml/graph_metric.hpp"
#include "gml/symmetric_matrix.hpp"

namespace gml {

/// Indices of the k training rows closest to `point` under `metric`
/// (ascending distance, training index breaks ties).
std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& train, std::span<const double> point,
                                           const SymmetricMatrix& metric, std::size_t k);

/// Majority vote among the k nearest training rows; vote ties go to the
/// smallest label. Throws std::invalid_argument on an empty training set or
/// k outside [1, N].
int knn_classify(const Eigen::MatrixXd& train, std::span<const int> labels, std::span<const double> point,
                 const SymmetricMatrix& metric, std::size_t k);
int knn_classify(const Eigen::MatrixXd& train, std::span<const int> labels, std::span<const double> point,
                 const GraphMetric& metric, std::size_t k);

/// Fraction of the k nearest training rows carrying `label`.
double knn_vote_share(const Eigen::MatrixXd& train, std::span<const int> labels, std::span<const double> point,
                      const SymmetricMatrix& metric, std::size_t k, int label);

struct KnownLabel {
    std::size_t index;
    double label;  // +1 or -1
};

/// Similarity graph over all samples with its combinatorial Laplacian.
struct LabeledGraph {
    Eigen::MatrixXd weights;    // w_ij = exp(-delta_ij(M)), zero diagonal
    Eigen::MatrixXd laplacian;  // D - W
    std::vector<KnownLabel> known;
};

LabeledGraph build_labeled_graph(const Eigen::MatrixXd& features, const SymmetricMatrix& metric,
                                 std::vector<KnownLabel> known);

struct GraphScores {
    std::vector<double> scores;  // known entries pass through unchanged
    bool regularized = false;    // L_UU needed a 1e-10 diagonal shift
    std::string warning;
};

/// Minimizes zᵀ L z with the known entries fixed by solving
/// L_UU z_U = -L_UL z_L with a Cholesky factorization.
GraphScores propagate_labels(const Eigen::MatrixXd& weights, const std::vector<KnownLabel>& known);

/// build_labeled_graph followed by propagate_labels.
GraphScores graph_classify(const Eigen::MatrixXd& features, const std::vector<KnownLabel>& known,
                           const SymmetricMatrix& metric);
GraphScores graph_classify(const Eigen::MatrixXd& features, const std::vector<KnownLabel>& known,
                           const GraphMetric& metric);

/// Index of the largest score (lowest index on ties).
std::size_t argmax(std::span<const double> scores);

}  // namespace gml
