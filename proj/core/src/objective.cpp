#include "gml/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace gml {
namespace {

void check_dim(const ObjectiveContext& ctx, const SymmetricMatrix& m) {
    if (m.dim() != ctx.dim()) {
        throw std::invalid_argument("objective: metric dimension " + std::to_string(m.dim()) +
                                    " does not match feature dimension " + std::to_string(ctx.dim()));
    }
}

// exp(-delta_p) scaled by the pair weight.
Eigen::VectorXd weighted_kernel(const ObjectiveContext& ctx, const SymmetricMatrix& m) {
    return ctx.pair_weights.cwiseProduct((-pair_distances(ctx, m)).array().exp().matrix());
}

class DefaultLine final : public LineRestriction {
public:
    DefaultLine(const Objective& objective, SymmetricMatrix m, SymmetricMatrix direction)
        : objective_(objective), m_(std::move(m)), direction_(std::move(direction)) {}

    double value(double t) const override { return objective_.value(m_.axpy(t, direction_)); }

private:
    const Objective& objective_;
    SymmetricMatrix m_;
    SymmetricMatrix direction_;
};

class GlrLine final : public LineRestriction {
public:
    GlrLine(Eigen::VectorXd base, Eigen::VectorXd delta, Eigen::VectorXd weights)
        : base_(std::move(base)), delta_(std::move(delta)), weights_(std::move(weights)) {}

    double value(double t) const override {
        return weights_.dot((-(base_ + t * delta_)).array().exp().matrix());
    }
    double slope(double t) const override {
        return -weights_.dot(delta_.cwiseProduct((-(base_ + t * delta_)).array().exp().matrix()));
    }

private:
    Eigen::VectorXd base_;
    Eigen::VectorXd delta_;
    Eigen::VectorXd weights_;
};

}  // namespace

double LineRestriction::slope(double t) const {
    const double h = 1e-6;
    return (value(t + h) - value(t - h)) / (2.0 * h);
}

std::unique_ptr<LineRestriction> Objective::along(const SymmetricMatrix& m, const SymmetricMatrix& direction) const {
    return std::make_unique<DefaultLine>(*this, m, direction);
}

ObjectiveContext::ObjectiveContext(Eigen::MatrixXd f, std::vector<double> z)
    : features(std::move(f)), labels(std::move(z)) {
    const auto n = features.rows();
    if (n < 2) {
        throw std::invalid_argument("ObjectiveContext: at least two samples are required");
    }
    if (features.cols() < 1) {
        throw std::invalid_argument("ObjectiveContext: at least one feature is required");
    }
    if (static_cast<Eigen::Index>(labels.size()) != n) {
        throw std::invalid_argument("ObjectiveContext: label count does not match sample count");
    }
    for (double z_i : labels) {
        if (!std::isfinite(z_i)) {
            throw std::invalid_argument("ObjectiveContext: labels must be finite");
        }
    }
    if (!features.allFinite()) {
        throw std::invalid_argument("ObjectiveContext: features must be finite");
    }

    Eigen::Index pairs = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            pairs += labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)];
        }
    }
    pair_diffs.resize(pairs, features.cols());
    pair_weights.resize(pairs);
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dz = labels[static_cast<std::size_t>(i)] - labels[static_cast<std::size_t>(j)];
            if (dz == 0.0) {
                continue;
            }
            pair_diffs.row(p) = features.row(i) - features.row(j);
            pair_weights(p) = 2.0 * dz * dz;
            ++p;
        }
    }
}

Eigen::VectorXd pair_distances(const ObjectiveContext& ctx, const SymmetricMatrix& m) {
    check_dim(ctx, m);
    // Sum of m_kl d_k d_l over the nonzero entries; graph metrics are sparse
    // and this avoids a pairs x K temporary.
    const auto& d = ctx.pair_diffs;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d.rows());
    for (Eigen::Index k = 0; k < d.cols(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        out.array() += m(ku, ku) * d.col(k).array().square();
        for (Eigen::Index l = k + 1; l < d.cols(); ++l) {
            const double w = m(ku, static_cast<std::size_t>(l));
            if (w != 0.0) {
                out.array() += 2.0 * w * d.col(k).array() * d.col(l).array();
            }
        }
    }
    return out;
}

double glr_value(const ObjectiveContext& ctx, const SymmetricMatrix& m) {
    if (ctx.pair_weights.size() == 0) {
        check_dim(ctx, m);
        return 0.0;
    }
    return weighted_kernel(ctx, m).sum();
}

std::vector<double> glr_grad_diag(const ObjectiveContext& ctx, const SymmetricMatrix& m) {
    check_dim(ctx, m);
    std::vector<double> grad(ctx.dim(), 0.0);
    if (ctx.pair_weights.size() == 0) {
        return grad;
    }
    const Eigen::VectorXd kernel = weighted_kernel(ctx, m);
    for (std::size_t k = 0; k < grad.size(); ++k) {
        grad[k] = -(ctx.pair_diffs.col(static_cast<Eigen::Index>(k)).array().square() * kernel.array()).sum();
    }
    return grad;
}

std::vector<double> glr_grad_offdiag_col(const ObjectiveContext& ctx, const SymmetricMatrix& m, std::size_t col) {
    check_dim(ctx, m);
    if (col >= ctx.dim()) {
        throw std::out_of_range("glr_grad_offdiag_col: column index out of range");
    }
    std::vector<double> grad;
    grad.reserve(ctx.dim() - 1);
    if (ctx.pair_weights.size() == 0) {
        grad.assign(ctx.dim() - 1, 0.0);
        return grad;
    }
    const Eigen::VectorXd kernel = weighted_kernel(ctx, m);
    const Eigen::VectorXd scaled = kernel.cwiseProduct(ctx.pair_diffs.col(static_cast<Eigen::Index>(col)));
    const Eigen::VectorXd g = -2.0 * (ctx.pair_diffs.transpose() * scaled);
    for (std::size_t r = 0; r < ctx.dim(); ++r) {
        if (r != col) {
            grad.push_back(g(static_cast<Eigen::Index>(r)));
        }
    }
    return grad;
}

std::unique_ptr<LineRestriction> GlrObjective::along(const SymmetricMatrix& m, const SymmetricMatrix& direction) const {
    return std::make_unique<GlrLine>(pair_distances(ctx_, m), pair_distances(ctx_, direction), ctx_.pair_weights);
}

}  // namespace gml
