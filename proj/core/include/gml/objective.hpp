#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <vector>

#include "gml/symmetric_matrix.hpp"

namespace gml {

/// Restriction of an objective to the segment t -> Q(M + t D).
class LineRestriction {
public:
    virtual ~LineRestriction() = default;
    virtual double value(double t) const = 0;
    /// d/dt Q(M + t D). The default is a central difference.
    virtual double slope(double t) const;
};

/// A convex differentiable objective over metric matrices.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::size_t dim() const = 0;
    virtual double value(const SymmetricMatrix& m) const = 0;
    /// dQ/dm_kk for k = 0..K-1.
    virtual std::vector<double> grad_diag(const SymmetricMatrix& m) const = 0;
    /// dQ/dm_{r,col} for every r != col (in increasing r), with m_{r,col}
    /// and m_{col,r} moving together.
    virtual std::vector<double> grad_offdiag_col(const SymmetricMatrix& m, std::size_t col) const = 0;

    /// The default evaluates value(m + t * direction) from scratch.
    virtual std::unique_ptr<LineRestriction> along(const SymmetricMatrix& m, const SymmetricMatrix& direction) const;
};

/// Samples and labels for the graph Laplacian regularizer, with the label
/// differing pairs cached.
struct ObjectiveContext {
    /// features: N x K (one row per sample); labels: length N.
    ObjectiveContext(Eigen::MatrixXd features, std::vector<double> labels);

    std::size_t num_samples() const noexcept { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

    Eigen::MatrixXd features;
    std::vector<double> labels;

    // One row per unordered pair i < j with z_i != z_j; pairs with equal
    // labels contribute nothing and are skipped.
    Eigen::MatrixXd pair_diffs;
    // 2 (z_i - z_j)^2: both ordered pairs (i, j) and (j, i) are summed.
    Eigen::VectorXd pair_weights;
};

/// Per-pair Mahalanobis distances (f_i - f_j)ᵀ M (f_i - f_j) over the cached pairs.
Eigen::VectorXd pair_distances(const ObjectiveContext& ctx, const SymmetricMatrix& m);

/// Q(M) = sum_{i,j} exp(-(f_i - f_j)ᵀ M (f_i - f_j)) (z_i - z_j)^2 over ordered pairs.
double glr_value(const ObjectiveContext& ctx, const SymmetricMatrix& m);
std::vector<double> glr_grad_diag(const ObjectiveContext& ctx, const SymmetricMatrix& m);
std::vector<double> glr_grad_offdiag_col(const ObjectiveContext& ctx, const SymmetricMatrix& m, std::size_t col);

/// Objective adapter over an ObjectiveContext. Line restrictions reuse the
/// per-pair distances, so each evaluation along a segment costs O(pairs).
class GlrObjective final : public Objective {
public:
    explicit GlrObjective(ObjectiveContext ctx) : ctx_(std::move(ctx)) {}

    const ObjectiveContext& context() const noexcept { return ctx_; }

    std::size_t dim() const override { return ctx_.dim(); }
    double value(const SymmetricMatrix& m) const override { return glr_value(ctx_, m); }
    std::vector<double> grad_diag(const SymmetricMatrix& m) const override { return glr_grad_diag(ctx_, m); }
    std::vector<double> grad_offdiag_col(const SymmetricMatrix& m, std::size_t col) const override {
        return glr_grad_offdiag_col(ctx_, m, col);
    }
    std::unique_ptr<LineRestriction> along(const SymmetricMatrix& m, const SymmetricMatrix& direction) const override;

private:
    ObjectiveContext ctx_;
};

}  // namespace gml
