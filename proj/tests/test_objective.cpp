#include <gtest/gtest.h>

#include <cmath>

#include "gml/objective.hpp"
#include "gml/rng.hpp"

using namespace gml;

namespace {

// Direct double loop over ordered pairs.
double brute_force_glr(const Eigen::MatrixXd& f, const std::vector<double>& z, const SymmetricMatrix& m) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        for (Eigen::Index j = 0; j < f.rows(); ++j) {
            const Eigen::VectorXd d = f.row(i) - f.row(j);
            double delta = 0.0;
            for (Eigen::Index a = 0; a < d.size(); ++a) {
                for (Eigen::Index b = 0; b < d.size(); ++b) {
                    delta += d(a) * m(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) * d(b);
                }
            }
            const double dz = z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)];
            total += std::exp(-delta) * dz * dz;
        }
    }
    return total;
}

ObjectiveContext two_points() {
    Eigen::MatrixXd f(2, 2);
    f << 0, 0, 1, 0;
    return ObjectiveContext(f, {1.0, -1.0});
}

}  // namespace

TEST(Glr, TwoPointExample) {
    const auto ctx = two_points();
    const auto m = SymmetricMatrix::identity(2);
    EXPECT_NEAR(glr_value(ctx, m), 8.0 * std::exp(-1.0), 1e-14);
    EXPECT_NEAR(glr_value(ctx, m), 2.9430, 1e-4);
    const auto g = glr_grad_diag(ctx, m);
    EXPECT_NEAR(g[0], -8.0 * std::exp(-1.0), 1e-14);
    EXPECT_EQ(g[1], 0.0);
    EXPECT_EQ(glr_grad_offdiag_col(ctx, m, 0), (std::vector<double>{0.0}));
}

TEST(Glr, EqualLabelsContributeNothing) {
    Eigen::MatrixXd f(3, 2);
    f << 0, 0, 1, 0, 0, 1;
    const ObjectiveContext ctx(f, {1.0, 1.0, 1.0});
    EXPECT_EQ(ctx.pair_diffs.rows(), 0);
    EXPECT_EQ(glr_value(ctx, SymmetricMatrix::identity(2)), 0.0);
}

TEST(Glr, RejectsMismatchedLabels) {
    Eigen::MatrixXd f(3, 2);
    f.setZero();
    EXPECT_THROW(ObjectiveContext(f, {1.0, -1.0}), std::invalid_argument);
}

TEST(Glr, MatchesBruteForce) {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const auto dim = static_cast<std::size_t>(2 + uniform_index(rng, 5));
        const auto s = random_binary_samples(rng, 15, dim);
        const ObjectiveContext ctx(s.features, s.labels);
        SymmetricMatrix m = random_graph_metric(rng, dim);
        m *= 0.2;
        const double expected = brute_force_glr(s.features, s.labels, m);
        EXPECT_NEAR(glr_value(ctx, m), expected, 1e-12 * std::max(1.0, expected));
    }
}

TEST(Glr, ConstantColumnHasZeroGradient) {
    Rng rng(6);
    auto s = random_binary_samples(rng, 20, 3);
    s.features.col(1).setConstant(0.7);
    const ObjectiveContext ctx(s.features, s.labels);
    const auto m = SymmetricMatrix::identity(3);
    EXPECT_EQ(glr_grad_diag(ctx, m)[1], 0.0);
    const auto off = glr_grad_offdiag_col(ctx, m, 1);
    EXPECT_EQ(off, (std::vector<double>{0.0, 0.0}));
}

TEST(Glr, GradientsMatchCentralDifferences) {
    Rng rng(7);
    const double h = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const auto dim = static_cast<std::size_t>(2 + uniform_index(rng, 5));
        const auto s = random_binary_samples(rng, 12, dim);
        const ObjectiveContext ctx(s.features, s.labels);
        SymmetricMatrix m = random_graph_metric(rng, dim);
        m *= 0.3;
        const auto diag = glr_grad_diag(ctx, m);
        for (std::size_t k = 0; k < dim; ++k) {
            SymmetricMatrix up = m;
            SymmetricMatrix down = m;
            up.at(k, k) += h;
            down.at(k, k) -= h;
            const double fd = (glr_value(ctx, up) - glr_value(ctx, down)) / (2 * h);
            EXPECT_NEAR(diag[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
        }
        const auto col = static_cast<std::size_t>(uniform_index(rng, dim));
        const auto off = glr_grad_offdiag_col(ctx, m, col);
        ASSERT_EQ(off.size(), dim - 1);
        std::size_t idx = 0;
        for (std::size_t r = 0; r < dim; ++r) {
            if (r == col) {
                continue;
            }
            SymmetricMatrix up = m;
            SymmetricMatrix down = m;
            up.at(r, col) += h;
            down.at(r, col) -= h;
            const double fd = (glr_value(ctx, up) - glr_value(ctx, down)) / (2 * h);
            EXPECT_NEAR(off[idx++], fd, 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Glr, ConvexAlongSegmentsOfPdMatrices) {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const auto dim = static_cast<std::size_t>(2 + uniform_index(rng, 4));
        const auto s = random_binary_samples(rng, 10, dim);
        const ObjectiveContext ctx(s.features, s.labels);
        const auto a = random_graph_metric(rng, dim);
        const auto b = random_graph_metric(rng, dim);
        const double w = uniform_unit(rng);
        const double mid = glr_value(ctx, w * a + (1 - w) * b);
        const double chord = w * glr_value(ctx, a) + (1 - w) * glr_value(ctx, b);
        EXPECT_LE(mid, chord + 1e-12 * std::max(1.0, chord));
    }
}

TEST(Glr, LineRestrictionAgreesWithValue) {
    Rng rng(9);
    const auto s = random_binary_samples(rng, 25, 4);
    const GlrObjective obj(ObjectiveContext(s.features, s.labels));
    const auto m = random_graph_metric(rng, 4);
    const auto target = random_graph_metric(rng, 4);
    const SymmetricMatrix dir = target + (-1.0) * m;
    const auto line = obj.along(m, dir);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        const double expected = obj.value(m + t * dir);
        EXPECT_NEAR(line->value(t), expected, 1e-12 * std::max(1.0, expected));
    }
    const double h = 1e-6;
    const double fd = (line->value(0.5 + h) - line->value(0.5 - h)) / (2 * h);
    EXPECT_NEAR(line->slope(0.5), fd, 1e-5 * std::max(1.0, std::abs(fd)));
}
