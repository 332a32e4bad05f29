#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "gml/experiment.hpp"

using namespace gml;

namespace {

Dataset separable(std::size_t per_class) {
    Dataset d;
    d.name = "separable";
    d.num_classes = 2;
    d.class_names = {"a", "b"};
    d.feature_names = {"x", "y"};
    d.features.resize(static_cast<Eigen::Index>(2 * per_class), 2);
    Rng rng(1);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = static_cast<int>(i % 2);
        d.labels.push_back(label);
        d.features(static_cast<Eigen::Index>(i), 0) = (label == 0 ? -5.0 : 5.0) + 0.1 * standard_normal(rng);
        d.features(static_cast<Eigen::Index>(i), 1) = standard_normal(rng);
    }
    return d;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.seeds = SeedRange{0, 2};
    cfg.outer_max_iters = 5;
    return cfg;
}

}  // namespace

TEST(SeedRange, Parses) {
    const auto r = parse_seed_range("3..6");
    EXPECT_EQ(r.values(), (std::vector<std::uint64_t>{3, 4, 5, 6}));
    EXPECT_EQ(r.to_string(), "3..6");
    EXPECT_EQ(parse_seed_range("7").values(), (std::vector<std::uint64_t>{7}));
    EXPECT_EQ(SeedRange{}.values().size(), 50u);
    EXPECT_THROW(parse_seed_range("6..3"), std::invalid_argument);
    EXPECT_THROW(parse_seed_range("a..b"), std::invalid_argument);
}

TEST(Classifier, Parses) {
    EXPECT_EQ(parse_classifier("knn"), ClassifierChoice::Knn);
    EXPECT_EQ(parse_classifier("graph"), ClassifierChoice::Graph);
    EXPECT_THROW(parse_classifier("svm"), std::invalid_argument);
}

TEST(StratifiedFolds, PartitionAndBalance) {
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
        labels.push_back(i < 20 ? 0 : 1);
    }
    Rng rng(5);
    const auto folds = stratified_folds(labels, 2, rng);
    ASSERT_EQ(folds.size(), 2u);
    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
        EXPECT_EQ(fold.size(), 15u);
        int zeros = 0;
        for (std::size_t i : fold) {
            EXPECT_TRUE(seen.insert(i).second);
            zeros += labels[i] == 0;
        }
        EXPECT_EQ(zeros, 10);
    }
    EXPECT_EQ(seen.size(), 30u);
}

TEST(StratifiedFolds, DeterministicPerSeed) {
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 2, 2, 2, 2};
    Rng a(9);
    Rng b(9);
    Rng c(10);
    const auto fa = stratified_folds(labels, 2, a);
    EXPECT_EQ(fa, stratified_folds(labels, 2, b));
    EXPECT_NE(fa, stratified_folds(labels, 2, c));
}

TEST(Experiment, SeparableDataHasNoErrors) {
    const auto report = run_experiment(separable(20), small_config());
    ASSERT_EQ(report.runs.size(), 3u * 2u * 2u);
    for (const auto& run : report.runs) {
        EXPECT_EQ(run.errors, 0u) << run.classifier << " seed " << run.seed << " fold " << run.fold;
        EXPECT_EQ(run.test_size, 20u);
    }
    EXPECT_EQ(report.mean_error("graph"), 0.0);
    EXPECT_EQ(report.mean_error("knn"), 0.0);
    EXPECT_TRUE(std::isnan(report.mean_error("svm")));
}

TEST(Experiment, DeterministicReport) {
    const auto data = separable(15);
    const auto cfg = small_config();
    EXPECT_EQ(run_experiment(data, cfg).to_json(false), run_experiment(data, cfg).to_json(false));
}

TEST(Experiment, AggregatesMatchRuns) {
    auto data = separable(15);
    // Blur the classes so that some errors occur.
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
        data.features(i, 0) *= 0.05;
    }
    auto cfg = small_config();
    cfg.classifier = ClassifierChoice::Graph;
    const auto report = run_experiment(data, cfg);
    std::vector<double> errors;
    for (const auto& run : report.runs) {
        EXPECT_EQ(run.classifier, "graph");
        EXPECT_DOUBLE_EQ(run.error, static_cast<double>(run.errors) / static_cast<double>(run.test_size));
        errors.push_back(run.error);
    }
    const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    double var = 0.0;
    for (double e : errors) {
        var += (e - mean) * (e - mean);
    }
    EXPECT_NEAR(report.mean_error("graph"), mean, 1e-15);
    EXPECT_NEAR(report.stddev_error("graph"), std::sqrt(var / static_cast<double>(errors.size() - 1)), 1e-15);
    EXPECT_EQ(report.runtime.metrics_learned, 3u * 2u * 2u);
}

TEST(Experiment, RejectsClassSmallerThanFolds) {
    auto data = separable(5);
    data.labels[0] = 2;
    data.num_classes = 3;
    data.class_names.push_back("c");
    EXPECT_THROW(run_experiment(data, small_config()), DataError);
}

TEST(Experiment, OptimizerDefaultsFollowDimension) {
    ExperimentConfig cfg;
    const auto opt = cfg.optimizer_for(4);
    EXPECT_EQ(opt.trace_cap, 4.0);
    EXPECT_DOUBLE_EQ(opt.rho, 1e-4);
    cfg.trace_cap = 8.0;
    const auto scaled = cfg.optimizer_for(4);
    EXPECT_DOUBLE_EQ(scaled.rho, 2e-4);
    EXPECT_DOUBLE_EQ(scaled.epsilon, 2e-3);
    cfg.rho = 5e-3;
    EXPECT_EQ(cfg.optimizer_for(4).rho, 5e-3);
}
