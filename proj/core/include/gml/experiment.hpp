#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gml/dataset.hpp"
#include "gml/optimizer.hpp"
#include "gml/rng.hpp"

namespace gml {

enum class ClassifierChoice { Knn, Graph, Both };

std::string to_string(ClassifierChoice choice);
ClassifierChoice parse_classifier(const std::string& text);

/// Inclusive seed range parsed from "a..b" or a single integer "a".
struct SeedRange {
    std::uint64_t first = 0;
    std::uint64_t last = 49;

    std::vector<std::uint64_t> values() const;
    std::string to_string() const;
};

SeedRange parse_seed_range(const std::string& text);

struct ExperimentConfig {
    // Unset values fall back to OptimizerConfig::defaults_for(K).
    std::optional<double> trace_cap;
    std::optional<double> rho;
    std::optional<double> epsilon;
    int fw_max_iters = 100;
    int outer_max_iters = 50;
    int bcd_sweeps = 1;
    double obj_rel_tol = 1e-6;
    StepRule fw_step_rule = StepRule::LineSearch;

    ClassifierChoice classifier = ClassifierChoice::Both;
    std::size_t k = 5;
    SeedRange seeds;
    int folds = 2;
    bool standardize = true;

    OptimizerConfig optimizer_for(std::size_t dim) const;
};

/// Stratified assignment of sample indices to `folds` folds: the indices are
/// shuffled, grouped by class (stable), and dealt round-robin.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds, Rng& rng);

/// One (seed, fold, classifier) evaluation.
struct RunRecord {
    std::uint64_t seed = 0;
    int fold = 0;
    std::string classifier;  // "knn" or "graph"
    std::size_t test_size = 0;
    std::size_t errors = 0;
    double error = 0.0;      // errors / test_size
    int reshuffles = 0;      // split retries needed for this seed
};

struct RuntimeStats {
    double seconds = 0.0;
    std::size_t metrics_learned = 0;
    std::size_t outer_iterations = 0;
    std::size_t unconverged = 0;
};

struct ExperimentReport {
    std::string dataset;
    std::size_t samples = 0;
    std::size_t features = 0;
    int num_classes = 0;
    ExperimentConfig config;
    OptimizerConfig optimizer;  // resolved values actually used
    std::vector<RunRecord> runs;
    std::vector<std::string> diagnostics;
    RuntimeStats runtime;

    /// Mean error over the records of one classifier; NaN when there are none.
    double mean_error(const std::string& classifier) const;
    double stddev_error(const std::string& classifier) const;

    /// JSON report. The runtime section is the only non-deterministic part
    /// and can be left out to compare runs byte for byte.
    std::string to_json(bool include_runtime = true) const;
    std::string to_table() const;
};

/// Progress callback: (completed seeds, total seeds).
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

/// Cross-validation protocol: for every seed, a stratified split into
/// cfg.folds folds; each fold is held out once while one metric per class is
/// learned on the remaining samples (labels +1 for the class, -1 otherwise).
/// The graph classifier propagates over train and test jointly; kNN scores a
/// class by its vote share under that class's metric. Prediction is the
/// argmax over classes.
ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& cfg, const ProgressFn& progress = {});

}  // namespace gml
