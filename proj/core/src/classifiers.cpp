#include "gml/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>

namespace gml {
namespace {

constexpr double kRegularization = 1e-10;

std::span<const double> row_span(const Eigen::MatrixXd& m, Eigen::Index row, std::vector<double>& buffer) {
    buffer.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        buffer[static_cast<std::size_t>(k)] = m(row, k);
    }
    return buffer;
}

void check_knn_args(const Eigen::MatrixXd& train, std::size_t labels, std::span<const double> point,
                    const SymmetricMatrix& metric, std::size_t k) {
    if (train.rows() == 0) {
        throw std::invalid_argument("knn: empty training set");
    }
    if (labels != static_cast<std::size_t>(train.rows())) {
        throw std::invalid_argument("knn: label count does not match training rows");
    }
    if (k == 0 || k > static_cast<std::size_t>(train.rows())) {
        throw std::invalid_argument("knn: k must lie in [1, training size]");
    }
    if (point.size() != static_cast<std::size_t>(train.cols()) || metric.dim() != point.size()) {
        throw std::invalid_argument("knn: dimension mismatch");
    }
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& train, std::span<const double> point,
                                           const SymmetricMatrix& metric, std::size_t k) {
    if (train.rows() == 0) {
        throw std::invalid_argument("knn: empty training set");
    }
    if (k == 0 || k > static_cast<std::size_t>(train.rows())) {
        throw std::invalid_argument("knn: k must lie in [1, training size]");
    }
    std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(train.rows()));
    std::vector<double> buffer;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
        dist[static_cast<std::size_t>(i)] = {mahalanobis(row_span(train, i, buffer), point, metric),
                                             static_cast<std::size_t>(i)};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = dist[i].second;
    }
    return out;
}

int knn_classify(const Eigen::MatrixXd& train, std::span<const int> labels, std::span<const double> point,
                 const SymmetricMatrix& metric, std::size_t k) {
    check_knn_args(train, labels.size(), point, metric, k);
    std::map<int, std::size_t> votes;
    for (std::size_t idx : nearest_neighbors(train, point, metric, k)) {
        ++votes[labels[idx]];
    }
    int winner = votes.begin()->first;
    std::size_t most = 0;
    for (const auto& [label, count] : votes) {  // ascending label order
        if (count > most) {
            most = count;
            winner = label;
        }
    }
    return winner;
}

int knn_classify(const Eigen::MatrixXd& train, std::span<const int> labels, std::span<const double> point,
                 const GraphMetric& metric, std::size_t k) {
    return knn_classify(train, labels, point, metric.matrix(), k);
}

double knn_vote_share(const Eigen::MatrixXd& train, std::span<const int> labels, std::span<const double> point,
                      const SymmetricMatrix& metric, std::size_t k, int label) {
    check_knn_args(train, labels.size(), point, metric, k);
    std::size_t hits = 0;
    for (std::size_t idx : nearest_neighbors(train, point, metric, k)) {
        hits += labels[idx] == label;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

LabeledGraph build_labeled_graph(const Eigen::MatrixXd& features, const SymmetricMatrix& metric,
                                 std::vector<KnownLabel> known) {
    if (static_cast<std::size_t>(features.cols()) != metric.dim()) {
        throw std::invalid_argument("build_labeled_graph: metric dimension does not match features");
    }
    const Eigen::Index n = features.rows();
    LabeledGraph g;
    g.weights = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> a;
    std::vector<double> b;
    for (Eigen::Index i = 0; i < n; ++i) {
        row_span(features, i, a);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            row_span(features, j, b);
            // Clamp tiny negative round-off from a PD quadratic form.
            const double w = edge_weight(std::max(0.0, mahalanobis(a, b, metric)));
            g.weights(i, j) = w;
            g.weights(j, i) = w;
        }
    }
    g.laplacian = -g.weights;
    g.laplacian.diagonal() = g.weights.rowwise().sum();
    g.known = std::move(known);
    return g;
}

GraphScores propagate_labels(const Eigen::MatrixXd& weights, const std::vector<KnownLabel>& known) {
    const auto n = static_cast<std::size_t>(weights.rows());
    if (weights.cols() != weights.rows()) {
        throw std::invalid_argument("propagate_labels: weight matrix must be square");
    }
    if (known.empty()) {
        throw std::invalid_argument("propagate_labels: at least one known label is required");
    }
    GraphScores out;
    out.scores.assign(n, 0.0);
    std::vector<char> is_known(n, 0);
    for (const auto& kl : known) {
        if (kl.index >= n) {
            throw std::out_of_range("propagate_labels: known index out of range");
        }
        if (kl.label != 1.0 && kl.label != -1.0) {
            throw std::invalid_argument("propagate_labels: known labels must be +1 or -1");
        }
        is_known[kl.index] = 1;
        out.scores[kl.index] = kl.label;
    }
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_known[i]) {
            unknown.push_back(i);
        }
    }
    if (unknown.empty()) {
        return out;
    }

    // Unlabeled nodes with no weighted path to a labeled node make L_UU singular.
    std::vector<char> reached(is_known);
    std::queue<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_known[i]) {
            frontier.push(i);
        }
    }
    while (!frontier.empty()) {
        const std::size_t i = frontier.front();
        frontier.pop();
        for (std::size_t j = 0; j < n; ++j) {
            if (!reached[j] && weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
                reached[j] = 1;
                frontier.push(j);
            }
        }
    }
    const bool isolated = std::any_of(unknown.begin(), unknown.end(), [&](std::size_t i) { return !reached[i]; });

    const auto u = static_cast<Eigen::Index>(unknown.size());
    Eigen::MatrixXd luu(u, u);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(u);
    for (Eigen::Index a = 0; a < u; ++a) {
        const auto i = static_cast<Eigen::Index>(unknown[static_cast<std::size_t>(a)]);
        const double degree = weights.row(i).sum() - weights(i, i);
        for (Eigen::Index b = 0; b < u; ++b) {
            const auto j = static_cast<Eigen::Index>(unknown[static_cast<std::size_t>(b)]);
            luu(a, b) = (a == b) ? degree : -weights(i, j);
        }
        for (const auto& kl : known) {
            rhs(a) += weights(i, static_cast<Eigen::Index>(kl.index)) * kl.label;
        }
    }

    auto solve = [&](bool regularize) -> std::optional<Eigen::VectorXd> {
        Eigen::MatrixXd system = luu;
        if (regularize) {
            system.diagonal().array() += kRegularization;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(system);
        if (llt.info() != Eigen::Success) {
            return std::nullopt;
        }
        Eigen::VectorXd z = llt.solve(rhs);
        // Discrete maximum principle: scores must stay within [-1, 1].
        if (!z.allFinite() || z.cwiseAbs().maxCoeff() > 1.0 + 1e-6) {
            return std::nullopt;
        }
        return z;
    };

    std::optional<Eigen::VectorXd> z;
    if (!isolated) {
        z = solve(false);
    }
    if (!z) {
        out.regularized = true;
        out.warning = "propagate_labels: L_UU is singular (unlabeled component without labeled nodes); "
                      "added 1e-10 to its diagonal";
        z = solve(true);
        if (!z) {
            throw std::runtime_error("propagate_labels: regularized system could not be solved");
        }
    }
    for (Eigen::Index a = 0; a < u; ++a) {
        out.scores[unknown[static_cast<std::size_t>(a)]] = (*z)(a);
    }
    return out;
}

GraphScores graph_classify(const Eigen::MatrixXd& features, const std::vector<KnownLabel>& known,
                           const SymmetricMatrix& metric) {
    const LabeledGraph g = build_labeled_graph(features, metric, known);
    return propagate_labels(g.weights, g.known);
}

GraphScores graph_classify(const Eigen::MatrixXd& features, const std::vector<KnownLabel>& known,
                           const GraphMetric& metric) {
    return graph_classify(features, known, metric.matrix());
}

std::size_t argmax(std::span<const double> scores) {
    if (scores.empty()) {
        throw std::invalid_argument("argmax: empty input");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return best;
}

}  // namespace gml
