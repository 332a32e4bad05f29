#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gml/dataset.hpp"
#include "gml/eigensolver.hpp"
#include "gml/lp.hpp"
#include "gml/optimizer.hpp"
#include "gml/rng.hpp"

using namespace gml;

namespace {

SymmetricMatrix worked_example() { return SymmetricMatrix::from_rows({{2, -2, -1}, {-2, 5, -2}, {-1, -2, 4}}); }

// Objective that depends on nothing, so steps only exercise the plumbing.
class ZeroObjective final : public Objective {
public:
    explicit ZeroObjective(std::size_t dim) : dim_(dim) {}
    std::size_t dim() const override { return dim_; }
    double value(const SymmetricMatrix&) const override { return 0.0; }
    std::vector<double> grad_diag(const SymmetricMatrix&) const override { return std::vector<double>(dim_, 0.0); }
    std::vector<double> grad_offdiag_col(const SymmetricMatrix&, std::size_t) const override {
        return std::vector<double>(dim_ - 1, 0.0);
    }

private:
    std::size_t dim_;
};

GlrObjective binary_objective(std::uint64_t seed, std::size_t n, std::size_t dim) {
    Rng rng(seed);
    const auto s = random_binary_samples(rng, n, dim);
    return GlrObjective(ObjectiveContext(s.features, s.labels));
}

double golden_section(const std::function<double(double)>& f, double a, double b) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > 1e-10) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2;
}

}  // namespace

TEST(OptimizerConfig, Defaults) {
    const auto cfg = OptimizerConfig::defaults_for(4);
    EXPECT_EQ(cfg.trace_cap, 4.0);
    EXPECT_DOUBLE_EQ(cfg.rho, 1e-4);
    EXPECT_DOUBLE_EQ(cfg.epsilon, 1e-3);
    EXPECT_NO_THROW(cfg.check(4));
}

TEST(OptimizerConfig, RejectsInfeasibleSettings) {
    auto cfg = OptimizerConfig::defaults_for(3);
    cfg.rho = 1.5;
    EXPECT_THROW(cfg.check(3), std::invalid_argument);
    cfg = OptimizerConfig::defaults_for(3);
    cfg.epsilon = 0.5;
    EXPECT_THROW(cfg.check(3), std::invalid_argument);
    cfg = OptimizerConfig::defaults_for(3);
    EXPECT_THROW(cfg.check(1), std::invalid_argument);
    cfg.fw_max_iters = 0;
    EXPECT_THROW(cfg.check(3), std::invalid_argument);
    EXPECT_THROW(parse_step_rule("exact"), std::invalid_argument);
    EXPECT_EQ(parse_step_rule("diminishing"), StepRule::Diminishing);
}

TEST(InitMetric, PathGraph) {
    auto cfg = OptimizerConfig::defaults_for(4);
    const auto g = init_metric(cfg, 4);
    const auto& m = g.matrix();
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(m(i, i), 1.0);
        for (std::size_t j = 0; j < 4; ++j) {
            const bool adjacent = (i + 1 == j) || (j + 1 == i);
            if (i != j) {
                EXPECT_EQ(m(i, j), adjacent ? -1e-3 : 0.0);
            }
        }
    }
    EXPECT_DOUBLE_EQ(m.trace(), cfg.trace_cap);
    // Path Laplacian spectrum: 1 - 2 eps cos(pi j / 5).
    EXPECT_NEAR(g.lambda_min(), 1.0 - 2e-3 * std::cos(M_PI / 5.0), 1e-14);
}

TEST(UpdateScalars, WorkedExample) {
    const ZeroObjective obj(3);
    auto state = initial_state(certify(worked_example()), obj);
    state = update_scalars(std::move(state));
    const std::vector<double> expected{1.331409183516991, 2.046745685881018, 2.2521032462653396};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(state.scalars[i], expected[i], 1e-10);
    }
    for (double left : scaled_left_ends(state.metric.matrix(), state.scalars)) {
        EXPECT_NEAR(left, 0.10781412113677727, 1e-10);
    }
    // Warm-started from its own eigenvector, the solve is immediate.
    EXPECT_LE(state.last_lobpcg_iterations, 2);
}

TEST(UpdateScalars, TwoByTwo) {
    const ZeroObjective obj(2);
    auto state = update_scalars(initial_state(certify(SymmetricMatrix::from_rows({{2, -1}, {-1, 2}})), obj));
    EXPECT_NEAR(state.scalars[0], std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(state.scalars[1], std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(state.eigpair.value, 1.0, 1e-12);
}

TEST(UpdateScalars, Idempotent) {
    Rng rng(4);
    const auto m = random_graph_metric(rng, 12);
    const ZeroObjective obj(12);
    auto once = update_scalars(initial_state(certify(m), obj));
    auto twice = update_scalars(once);
    for (std::size_t i = 0; i < 12; ++i) {
        EXPECT_NEAR(twice.scalars[i], once.scalars[i], 1e-10 * once.scalars[i]);
    }
    EXPECT_EQ(twice.metric.matrix(), once.metric.matrix());
}

TEST(DiagonalStep, ZeroGradientIsAFixedPoint) {
    const ZeroObjective obj(3);
    const auto cfg = OptimizerConfig::defaults_for(3);
    auto state = update_scalars(initial_state(init_metric(cfg, 3), obj));
    const auto before = state.metric.matrix();
    state = diagonal_step(std::move(state), obj, cfg);
    EXPECT_EQ(state.metric.matrix(), before);
}

TEST(DiagonalStep, MatchesGridSearch) {
    const auto obj = binary_objective(11, 20, 3);
    auto cfg = OptimizerConfig::defaults_for(3);
    cfg.fw_max_iters = 5000;
    cfg.obj_rel_tol = 1e-13;
    auto state = update_scalars(initial_state(init_metric(cfg, 3), obj));
    const SymmetricMatrix start = state.metric.matrix();
    std::vector<double> lower(3);
    for (std::size_t i = 0; i < 3; ++i) {
        lower[i] = scaled_radius(start, state.scalars, i) + cfg.rho;
    }
    const double slack = cfg.trace_cap - (lower[0] + lower[1] + lower[2]);
    ASSERT_GT(slack, 0.0);

    // The objective decreases in every diagonal entry, so the optimum spends the whole slack.
    const double h = 1e-3;
    double best = kInfinity;
    std::vector<double> best_diag;
    SymmetricMatrix probe = start;
    for (double a = 0.0; a <= slack + 1e-12; a += h) {
        for (double b = 0.0; a + b <= slack + 1e-12; b += h) {
            const double c = std::max(0.0, slack - a - b);
            probe.set(0, 0, lower[0] + a);
            probe.set(1, 1, lower[1] + b);
            probe.set(2, 2, lower[2] + c);
            const double q = obj.value(probe);
            if (q < best) {
                best = q;
                best_diag = probe.diagonal_values();
            }
        }
    }

    state = diagonal_step(std::move(state), obj, cfg);
    const auto& m = state.metric.matrix();
    EXPECT_LE(obj.value(m), best + 1e-9);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(m(i, i), best_diag[i], 5e-3) << "entry " << i;
        EXPECT_GE(m(i, i), lower[i] - 1e-12);
    }
    EXPECT_LE(m.trace(), cfg.trace_cap + 1e-12);
}

TEST(OffDiagonalStep, MatchesGoldenSectionForTwoFeatures) {
    const auto obj = binary_objective(21, 30, 2);
    auto cfg = OptimizerConfig::defaults_for(2);
    cfg.fw_max_iters = 2000;
    cfg.obj_rel_tol = 1e-14;
    auto state = update_scalars(initial_state(init_metric(cfg, 2), obj));
    state = diagonal_step(std::move(state), obj, cfg);
    state = update_scalars(std::move(state));
    const SymmetricMatrix start = state.metric.matrix();
    const double s0 = state.scalars[0];
    const double s1 = state.scalars[1];

    // Both scaled discs keep their left end at rho or above; the lone edge keeps magnitude >= epsilon.
    const double lo = -std::min((start(1, 1) - cfg.rho) * s0 / s1, (start(0, 0) - cfg.rho) * s1 / s0);
    const double hi = std::max(start(0, 1), -cfg.epsilon);
    ASSERT_LT(lo, hi);
    SymmetricMatrix probe = start;
    const double expected = golden_section(
        [&](double x) {
            probe.set(0, 1, x);
            return obj.value(probe);
        },
        lo, hi);

    state = offdiag_step(std::move(state), obj, cfg, 0);
    EXPECT_NEAR(state.metric.matrix()(0, 1), expected, 1e-6);
    EXPECT_TRUE(state.diagnostics.empty());
}

TEST(OffDiagonalStep, KeepsGraphConnectedAndCertified) {
    const auto obj = binary_objective(31, 40, 5);
    const auto cfg = OptimizerConfig::defaults_for(5);
    auto state = update_scalars(initial_state(init_metric(cfg, 5), obj));
    for (std::size_t col = 0; col < 5; ++col) {
        state = update_scalars(std::move(state));
        state = offdiag_step(std::move(state), obj, cfg, col);
        const auto& m = state.metric.matrix();
        EXPECT_TRUE(is_connected(m));
        EXPECT_GE(state.metric.lambda_min(), cfg.rho - 1e-9);
        for (std::size_t r = 0; r < 5; ++r) {
            if (r != col) {
                EXPECT_LE(m(r, col), 0.0);
            }
        }
    }
    EXPECT_THROW(offdiag_step(state, obj, cfg, 5), std::out_of_range);
}

TEST(LearnMetric, WeightsTheInformativeFeature) {
    Rng rng(41);
    Eigen::MatrixXd f(60, 2);
    std::vector<double> z(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
        z[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1.0 : -1.0;
        f(i, 0) = 2.0 * z[static_cast<std::size_t>(i)] + 0.3 * standard_normal(rng);
        f(i, 1) = standard_normal(rng);
    }
    const GlrObjective obj(ObjectiveContext(f, z));
    const auto result = learn_metric(obj, OptimizerConfig::defaults_for(2));
    EXPECT_GT(result.metric.matrix()(0, 0), result.metric.matrix()(1, 1));
    EXPECT_LT(result.objective_trace.back(), result.objective_trace.front());
}

TEST(LearnMetric, ConstantLabelsStopAtTheStart) {
    Rng rng(42);
    Eigen::MatrixXd f(10, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        f.data()[i] = standard_normal(rng);
    }
    const GlrObjective obj(ObjectiveContext(f, std::vector<double>(10, 1.0)));
    const auto cfg = OptimizerConfig::defaults_for(3);
    const auto result = learn_metric(obj, cfg);
    EXPECT_TRUE(result.converged);
    EXPECT_EQ(result.outer_iterations, 1);
    EXPECT_EQ(result.metric.matrix(), init_metric(cfg, 3).matrix());
}

TEST(LearnMetric, IterateFeasibilityAndMonotoneObjective) {
    for (StepRule rule : {StepRule::LineSearch, StepRule::Diminishing}) {
        const auto obj = binary_objective(51, 40, 4);
        auto cfg = OptimizerConfig::defaults_for(4);
        cfg.fw_step_rule = rule;
        cfg.outer_max_iters = 10;
        int iterates = 0;
        const auto result = learn_metric(obj, cfg, [&](const OptimizerEvent& ev) {
            if (ev.kind == EventKind::FrankWolfeIterate) {
                ++iterates;
                EXPECT_GE(smallest_eigenpair_dense(*ev.iterate).value, cfg.rho - 1e-9);
                EXPECT_LE(ev.iterate->trace(), cfg.trace_cap + 1e-9);
            }
        });
        EXPECT_GT(iterates, 0);
        if (rule == StepRule::LineSearch) {
            for (std::size_t t = 1; t < result.objective_trace.size(); ++t) {
                EXPECT_LE(result.objective_trace[t], result.objective_trace[t - 1] + 1e-10);
            }
        }
        EXPECT_EQ(result.records.size(), static_cast<std::size_t>(result.outer_iterations));
    }
}

TEST(LearnMetric, IrisClassIsMonotoneAndFast) {
    const auto data = load_csv(std::string(GML_DATA_DIR) + "/iris.csv");
    const auto scaler = fit_scaler(data.features);
    const Eigen::MatrixXd f = scaler.apply(data.features);
    std::vector<double> z(data.labels.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = data.labels[i] == 0 ? 1.0 : -1.0;
    }
    const GlrObjective obj(ObjectiveContext(f, z));
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = learn_metric(obj, OptimizerConfig::defaults_for(4));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(seconds, 60.0);
    for (std::size_t t = 1; t < result.objective_trace.size(); ++t) {
        EXPECT_LE(result.objective_trace[t], result.objective_trace[t - 1] + 1e-10);
    }
    EXPECT_LE(result.metric.matrix().trace(), 4.0 + 1e-9);
}

TEST(SpanningTree, MaximumMagnitude) {
    const auto m = SymmetricMatrix::from_rows(
        {{3, -1, -0.2, 0}, {-1, 3, -0.5, -0.1}, {-0.2, -0.5, 3, -0.9}, {0, -0.1, -0.9, 3}});
    const auto tree = max_spanning_tree(m);
    const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 1}, {2, 3}, {1, 2}};
    ASSERT_EQ(tree.size(), 3u);
    for (const auto& e : expected) {
        EXPECT_NE(std::find(tree.begin(), tree.end(), e), tree.end());
    }
    EXPECT_EQ(strongest_neighbor(m, 2), 3u);
    EXPECT_EQ(strongest_neighbor(m, 0), 1u);
}
