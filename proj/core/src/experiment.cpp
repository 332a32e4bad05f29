#include "gml/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gml/classifiers.hpp"
#include "gml/metric_io.hpp"

namespace gml {
namespace {

constexpr int kMaxReshuffles = 100;

bool folds_cover_classes(const std::vector<std::vector<std::size_t>>& folds, const std::vector<int>& labels,
                         int num_classes) {
    for (std::size_t held = 0; held < folds.size(); ++held) {
        std::vector<char> seen(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (f == held) {
                continue;
            }
            for (std::size_t i : folds[f]) {
                seen[static_cast<std::size_t>(labels[i])] = 1;
            }
        }
        if (std::count(seen.begin(), seen.end(), 0) > 0 || folds[held].empty()) {
            return false;
        }
    }
    return true;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::size_t count_errors(const Eigen::MatrixXd& scores, const std::vector<int>& truth) {
    std::size_t errors = 0;
    std::vector<double> row(static_cast<std::size_t>(scores.cols()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        for (Eigen::Index c = 0; c < scores.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = scores(i, c);
        }
        errors += static_cast<int>(argmax(row)) != truth[static_cast<std::size_t>(i)];
    }
    return errors;
}

}  // namespace

std::string to_string(ClassifierChoice choice) {
    switch (choice) {
        case ClassifierChoice::Knn:
            return "knn";
        case ClassifierChoice::Graph:
            return "graph";
        case ClassifierChoice::Both:
            return "both";
    }
    return "unknown";
}

ClassifierChoice parse_classifier(const std::string& text) {
    if (text == "knn") {
        return ClassifierChoice::Knn;
    }
    if (text == "graph") {
        return ClassifierChoice::Graph;
    }
    if (text == "both") {
        return ClassifierChoice::Both;
    }
    throw std::invalid_argument("unknown classifier '" + text + "' (expected knn, graph or both)");
}

std::vector<std::uint64_t> SeedRange::values() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = first; s <= last; ++s) {
        out.push_back(s);
        if (s == std::numeric_limits<std::uint64_t>::max()) {
            break;
        }
    }
    return out;
}

std::string SeedRange::to_string() const {
    return first == last ? std::to_string(first) : std::to_string(first) + ".." + std::to_string(last);
}

SeedRange parse_seed_range(const std::string& text) {
    auto parse = [&](const std::string& part) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("bad seed range '" + text + "' (expected a..b)");
        }
        return static_cast<std::uint64_t>(std::stoull(part));
    };
    const auto dots = text.find("..");
    SeedRange r;
    if (dots == std::string::npos) {
        r.first = r.last = parse(text);
    } else {
        r.first = parse(text.substr(0, dots));
        r.last = parse(text.substr(dots + 2));
    }
    if (r.last < r.first) {
        throw std::invalid_argument("bad seed range '" + text + "': end precedes start");
    }
    return r;
}

OptimizerConfig ExperimentConfig::optimizer_for(std::size_t dim) const {
    OptimizerConfig cfg = OptimizerConfig::defaults_for(dim);
    if (trace_cap) {
        // rho and epsilon defaults scale with C/K.
        const double ratio = *trace_cap / cfg.trace_cap;
        cfg.trace_cap = *trace_cap;
        cfg.rho *= ratio;
        cfg.epsilon *= ratio;
    }
    if (rho) {
        cfg.rho = *rho;
    }
    if (epsilon) {
        cfg.epsilon = *epsilon;
    }
    cfg.fw_max_iters = fw_max_iters;
    cfg.outer_max_iters = outer_max_iters;
    cfg.bcd_sweeps = bcd_sweeps;
    cfg.obj_rel_tol = obj_rel_tol;
    cfg.fw_step_rule = fw_step_rule;
    cfg.check(dim);
    return cfg;
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds, Rng& rng) {
    if (folds < 2) {
        throw std::invalid_argument("stratified_folds: need at least 2 folds");
    }
    const auto order = shuffled_indices(labels.size(), rng);
    std::vector<std::size_t> grouped(order);
    std::stable_sort(grouped.begin(), grouped.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < grouped.size(); ++i) {
        out[i % static_cast<std::size_t>(folds)].push_back(grouped[i]);
    }
    for (auto& f : out) {
        std::sort(f.begin(), f.end());
    }
    return out;
}

double ExperimentReport::mean_error(const std::string& classifier) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
        if (r.classifier == classifier) {
            sum += r.error;
            ++n;
        }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

double ExperimentReport::stddev_error(const std::string& classifier) const {
    const double mean = mean_error(classifier);
    double ss = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
        if (r.classifier == classifier) {
            ss += (r.error - mean) * (r.error - mean);
            ++n;
        }
    }
    return n < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(n - 1));
}

std::string ExperimentReport::to_json(bool include_runtime) const {
    Json j;
    j["dataset"] = {{"name", dataset}, {"samples", samples}, {"features", features}, {"classes", num_classes}};
    Json c = gml::to_json(config);
    c["optimizer"] = gml::to_json(optimizer);
    j["config"] = c;
    Json runs_json = Json::array();
    for (const auto& r : runs) {
        runs_json.push_back({{"seed", r.seed},
                             {"fold", r.fold},
                             {"classifier", r.classifier},
                             {"test_size", r.test_size},
                             {"errors", r.errors},
                             {"error", r.error},
                             {"reshuffles", r.reshuffles}});
    }
    Json summary = Json::object();
    for (const char* name : {"graph", "knn"}) {
        const double mean = mean_error(name);
        if (!std::isnan(mean)) {
            const auto n =
                std::count_if(runs.begin(), runs.end(), [&](const RunRecord& r) { return r.classifier == name; });
            summary[name] = {{"runs", n}, {"mean_error", mean}, {"std_error", stddev_error(name)}};
        }
    }
    j["summary"] = summary;
    j["runs"] = runs_json;
    j["diagnostics"] = diagnostics;
    if (include_runtime) {
        j["runtime"] = {{"seconds", runtime.seconds},
                        {"metrics_learned", runtime.metrics_learned},
                        {"outer_iterations", runtime.outer_iterations},
                        {"unconverged", runtime.unconverged}};
    }
    return j.dump(2);
}

std::string ExperimentReport::to_table() const {
    std::ostringstream os;
    os << "dataset " << dataset << ": " << samples << " samples, " << features << " features, " << num_classes
       << " classes\n";
    os << "seeds " << config.seeds.to_string() << ", " << config.folds << " folds, k = " << config.k
       << ", C = " << optimizer.trace_cap << ", rho = " << optimizer.rho << ", epsilon = " << optimizer.epsilon
       << ", step = " << gml::to_string(optimizer.fw_step_rule) << "\n\n";
    os << std::left << std::setw(12) << "classifier" << std::right << std::setw(8) << "runs" << std::setw(14)
       << "mean error %" << std::setw(12) << "std %" << "\n";
    for (const char* name : {"graph", "knn"}) {
        const double mean = mean_error(name);
        if (std::isnan(mean)) {
            continue;
        }
        const auto n =
            std::count_if(runs.begin(), runs.end(), [&](const RunRecord& r) { return r.classifier == name; });
        os << std::left << std::setw(12) << name << std::right << std::setw(8) << n << std::setw(14) << std::fixed
           << std::setprecision(2) << 100.0 * mean << std::setw(12) << 100.0 * stddev_error(name) << "\n";
        os.unsetf(std::ios::fixed);
    }
    os << "\n" << runtime.metrics_learned << " metrics learned in " << std::setprecision(3) << runtime.seconds << " s";
    if (runtime.unconverged > 0) {
        os << " (" << runtime.unconverged << " hit the outer iteration cap)";
    }
    os << "\n";
    for (const auto& d : diagnostics) {
        os << "note: " << d << "\n";
    }
    return os.str();
}

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& cfg, const ProgressFn& progress) {
    const auto start = std::chrono::steady_clock::now();
    if (data.labels.size() != data.size()) {
        throw DataError(data.name + ": the experiment needs a label for every sample");
    }
    if (data.num_classes < 2) {
        throw DataError(data.name + ": need at least 2 classes");
    }
    for (std::size_t c = 0; c < data.class_counts().size(); ++c) {
        if (data.class_counts()[c] < static_cast<std::size_t>(cfg.folds)) {
            throw DataError(data.name + ": class '" + data.class_names[c] + "' has fewer samples than folds");
        }
    }
    if (cfg.k == 0) {
        throw std::invalid_argument("k must be positive");
    }

    ExperimentReport report;
    report.dataset = data.name;
    report.samples = data.size();
    report.features = data.dim();
    report.num_classes = data.num_classes;
    report.config = cfg;
    report.optimizer = cfg.optimizer_for(data.dim());

    const bool want_graph = cfg.classifier != ClassifierChoice::Knn;
    const bool want_knn = cfg.classifier != ClassifierChoice::Graph;
    const auto seeds = cfg.seeds.values();
    const auto classes = static_cast<std::size_t>(data.num_classes);

    for (std::size_t si = 0; si < seeds.size(); ++si) {
        Rng rng(seeds[si]);
        auto folds = stratified_folds(data.labels, cfg.folds, rng);
        int reshuffles = 0;
        while (!folds_cover_classes(folds, data.labels, data.num_classes)) {
            if (++reshuffles > kMaxReshuffles) {
                throw DataError(data.name + ": seed " + std::to_string(seeds[si]) +
                                " cannot produce folds whose training sets contain every class");
            }
            folds = stratified_folds(data.labels, cfg.folds, rng);
        }

        for (std::size_t held = 0; held < folds.size(); ++held) {
            std::vector<std::size_t> train_rows;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                if (f != held) {
                    train_rows.insert(train_rows.end(), folds[f].begin(), folds[f].end());
                }
            }
            std::sort(train_rows.begin(), train_rows.end());
            const auto& test_rows = folds[held];

            Eigen::MatrixXd train = take_rows(data.features, train_rows);
            Eigen::MatrixXd test = take_rows(data.features, test_rows);
            if (cfg.standardize) {
                auto scaled = standardize(train, test);
                train = std::move(scaled.train);
                test = std::move(scaled.test);
            }
            std::vector<int> train_labels;
            std::vector<int> test_labels;
            for (std::size_t i : train_rows) {
                train_labels.push_back(data.labels[i]);
            }
            for (std::size_t i : test_rows) {
                test_labels.push_back(data.labels[i]);
            }
            if (cfg.k > train_rows.size()) {
                throw std::invalid_argument("k exceeds the training fold size");
            }

            Eigen::MatrixXd joint(train.rows() + test.rows(), train.cols());
            joint << train, test;
            const auto n_test = static_cast<Eigen::Index>(test_rows.size());
            Eigen::MatrixXd graph_scores(n_test, static_cast<Eigen::Index>(classes));
            Eigen::MatrixXd knn_scores(n_test, static_cast<Eigen::Index>(classes));

            for (std::size_t c = 0; c < classes; ++c) {
                std::vector<double> z(train_labels.size());
                for (std::size_t i = 0; i < z.size(); ++i) {
                    z[i] = train_labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
                }
                const GlrObjective objective(ObjectiveContext(train, z));
                const LearnResult learned = learn_metric(objective, report.optimizer);
                ++report.runtime.metrics_learned;
                report.runtime.outer_iterations += static_cast<std::size_t>(learned.outer_iterations);
                report.runtime.unconverged += learned.converged ? 0 : 1;
                const SymmetricMatrix& m = learned.metric.matrix();

                if (want_graph) {
                    std::vector<KnownLabel> known;
                    for (std::size_t i = 0; i < z.size(); ++i) {
                        known.push_back({i, z[i]});
                    }
                    const GraphScores scores = graph_classify(joint, known, m);
                    if (scores.regularized) {
                        report.diagnostics.push_back("seed " + std::to_string(seeds[si]) + " fold " +
                                                     std::to_string(held) + " class " + std::to_string(c) + ": " +
                                                     scores.warning);
                    }
                    for (Eigen::Index i = 0; i < n_test; ++i) {
                        graph_scores(i, static_cast<Eigen::Index>(c)) =
                            scores.scores[static_cast<std::size_t>(train.rows() + i)];
                    }
                }
                if (want_knn) {
                    std::vector<double> point(static_cast<std::size_t>(test.cols()));
                    for (Eigen::Index i = 0; i < n_test; ++i) {
                        for (Eigen::Index k = 0; k < test.cols(); ++k) {
                            point[static_cast<std::size_t>(k)] = test(i, k);
                        }
                        knn_scores(i, static_cast<Eigen::Index>(c)) =
                            knn_vote_share(train, train_labels, point, m, cfg.k, static_cast<int>(c));
                    }
                }
            }

            auto record = [&](const char* name, const Eigen::MatrixXd& scores) {
                RunRecord r;
                r.seed = seeds[si];
                r.fold = static_cast<int>(held);
                r.classifier = name;
                r.test_size = test_rows.size();
                r.errors = count_errors(scores, test_labels);
                r.error = static_cast<double>(r.errors) / static_cast<double>(r.test_size);
                r.reshuffles = reshuffles;
                report.runs.push_back(r);
            };
            if (want_graph) {
                record("graph", graph_scores);
            }
            if (want_knn) {
                record("knn", knn_scores);
            }
        }
        if (progress) {
            progress(si + 1, seeds.size());
        }
    }
    report.runtime.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace gml
