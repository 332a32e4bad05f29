// gml: learn graph metrics, classify with them, and run the cross-validation protocol.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gml/classifiers.hpp"
#include "gml/dataset.hpp"
#include "gml/experiment.hpp"
#include "gml/metric_io.hpp"
#include "gml/optimizer.hpp"
#include "gml/verify.hpp"

namespace {

using gml::Json;

// Everything a config file may set. Command-line flags are parsed on top of
// the values loaded from the file, so flags win.
struct Options {
    std::string dataset;
    std::string label_col = "last";
    std::string train;
    std::string metric;
    std::string target_class;
    std::string classifier;
    std::string seeds = "0..49";
    std::string fw_step = "line_search";
    std::string out;
    std::string format = "json";
    std::string trace;
    std::size_t k = 5;
    int folds = 2;
    int fw_max_iters = 100;
    int outer_max_iters = 50;
    int bcd_sweeps = 1;
    double obj_rel_tol = 1e-6;
    std::optional<double> trace_cap;
    std::optional<double> rho;
    std::optional<double> epsilon;
    bool standardize = true;
    bool progress = false;
    std::uint64_t seed = 0;
    std::size_t instances = 1000;
    std::size_t max_dim = 30;
};

const std::set<std::string> kConfigKeys{
    "dataset",   "label_col",   "train",      "metric",          "class",      "classifier",  "seeds",
    "fw_step",   "out",         "format",     "trace",           "k",          "folds",       "fw_max_iters",
    "outer_max_iters", "bcd_sweeps", "obj_rel_tol", "trace_cap", "rho",        "epsilon",     "standardize",
    "progress",  "seed",        "instances",  "max_dim"};

void apply_config(const Json& j, Options& o) {
    if (!j.is_object()) {
        throw std::runtime_error("config file must hold a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!kConfigKeys.count(key)) {
            throw std::runtime_error("unknown config key '" + key + "'");
        }
    }
    auto get = [&](const char* key, auto& out) {
        if (j.contains(key) && !j.at(key).is_null()) {
            out = j.at(key).get<std::decay_t<decltype(out)>>();
        }
    };
    auto get_opt = [&](const char* key, std::optional<double>& out) {
        if (j.contains(key)) {
            out = j.at(key).is_null() ? std::nullopt : std::optional<double>(j.at(key).get<double>());
        }
    };
    get("dataset", o.dataset);
    if (j.contains("label_col")) {
        const Json& v = j.at("label_col");
        o.label_col = v.is_number_integer() ? std::to_string(v.get<long>()) : v.get<std::string>();
    }
    get("train", o.train);
    get("metric", o.metric);
    get("class", o.target_class);
    get("classifier", o.classifier);
    if (j.contains("seeds")) {
        const Json& v = j.at("seeds");
        o.seeds = v.is_number_integer() ? std::to_string(v.get<long>()) : v.get<std::string>();
    }
    get("fw_step", o.fw_step);
    get("out", o.out);
    get("format", o.format);
    get("trace", o.trace);
    get("k", o.k);
    get("folds", o.folds);
    get("fw_max_iters", o.fw_max_iters);
    get("outer_max_iters", o.outer_max_iters);
    get("bcd_sweeps", o.bcd_sweeps);
    get("obj_rel_tol", o.obj_rel_tol);
    get_opt("trace_cap", o.trace_cap);
    get_opt("rho", o.rho);
    get_opt("epsilon", o.epsilon);
    get("standardize", o.standardize);
    get("progress", o.progress);
    get("seed", o.seed);
    get("instances", o.instances);
    get("max_dim", o.max_dim);
}

// CLI11 only writes bound variables for flags that were given, but optionals
// need a staging double.
struct OptionalFlag {
    double value = 0.0;
    CLI::Option* option = nullptr;

    void commit(std::optional<double>& target) const {
        if (option != nullptr && option->count() > 0) {
            target = value;
        }
    }
};

void add_optimizer_flags(CLI::App* cmd, Options& o, OptionalFlag& cap, OptionalFlag& rho, OptionalFlag& eps) {
    cap.option = cmd->add_option("--trace-cap", cap.value, "trace cap C (default: number of features)")
                     ->check(CLI::PositiveNumber);
    rho.option = cmd->add_option("--rho", rho.value, "disc left-end margin (default: 1e-4 C/K)")
                     ->check(CLI::PositiveNumber);
    eps.option =
        cmd->add_option("--epsilon", eps.value, "initial edge weight and connectivity floor (default: 1e-3 C/K)")
            ->check(CLI::PositiveNumber);
    cmd->add_option("--fw-step", o.fw_step, "Frank-Wolfe step rule")
        ->check(CLI::IsMember({"line_search", "diminishing"}));
    cmd->add_option("--fw-max-iters", o.fw_max_iters, "Frank-Wolfe iterations per block")->check(CLI::PositiveNumber);
    cmd->add_option("--outer-max-iters", o.outer_max_iters, "outer alternations")->check(CLI::PositiveNumber);
    cmd->add_option("--bcd-sweeps", o.bcd_sweeps, "column sweeps per alternation")->check(CLI::PositiveNumber);
    cmd->add_option("--obj-rel-tol", o.obj_rel_tol, "relative objective change that stops the optimizer")
        ->check(CLI::PositiveNumber);
}

gml::ExperimentConfig experiment_config(const Options& o) {
    gml::ExperimentConfig cfg;
    cfg.trace_cap = o.trace_cap;
    cfg.rho = o.rho;
    cfg.epsilon = o.epsilon;
    cfg.fw_max_iters = o.fw_max_iters;
    cfg.outer_max_iters = o.outer_max_iters;
    cfg.bcd_sweeps = o.bcd_sweeps;
    cfg.obj_rel_tol = o.obj_rel_tol;
    cfg.fw_step_rule = gml::parse_step_rule(o.fw_step);
    cfg.classifier = gml::parse_classifier(o.classifier.empty() ? "both" : o.classifier);
    cfg.k = o.k;
    cfg.seeds = gml::parse_seed_range(o.seeds);
    cfg.folds = o.folds;
    cfg.standardize = o.standardize;
    return cfg;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
}

gml::Dataset require_dataset(const Options& o, const std::string& path) {
    if (path.empty()) {
        throw std::runtime_error("--dataset is required");
    }
    return gml::load_csv(path, o.label_col);
}

int resolve_class(const gml::Dataset& ds, const std::string& name) {
    if (name.empty()) {
        return 0;
    }
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
        if (ds.class_names[c] == name) {
            return static_cast<int>(c);
        }
    }
    if (name.find_first_not_of("0123456789") == std::string::npos) {
        const int idx = std::stoi(name);
        if (idx < ds.num_classes) {
            return idx;
        }
    }
    throw std::runtime_error("class '" + name + "' does not occur in " + ds.name);
}

int cmd_learn(const Options& o) {
    const gml::Dataset ds = require_dataset(o, o.dataset);
    if (ds.labels.empty() || ds.num_classes < 2) {
        throw std::runtime_error("learn needs a labeled dataset with at least two classes");
    }
    const int target = resolve_class(ds, o.target_class);
    std::vector<double> z;
    for (int l : ds.labels) {
        z.push_back(l == target ? 1.0 : -1.0);
    }
    std::optional<gml::Scaler> scaler;
    Eigen::MatrixXd features = ds.features;
    if (o.standardize) {
        scaler = gml::fit_scaler(features);
        features = scaler->apply(features);
    }
    const gml::OptimizerConfig cfg = experiment_config(o).optimizer_for(ds.dim());

    std::ofstream trace_file;
    std::ostream* trace = nullptr;
    if (o.trace == "-") {
        trace = &std::cerr;
    } else if (!o.trace.empty()) {
        trace_file.open(o.trace);
        if (!trace_file) {
            throw std::runtime_error("cannot write " + o.trace);
        }
        trace = &trace_file;
    }
    gml::Observer observer;
    if (trace != nullptr) {
        observer = [trace](const gml::OptimizerEvent& ev) {
            if (ev.kind != gml::EventKind::OuterIteration) {
                return;
            }
            Json line{{"iteration", ev.state.iteration},
                      {"objective", ev.state.objective_trace.back()},
                      {"lambda_min", ev.state.metric.lambda_min()},
                      {"trace", ev.state.metric.matrix().trace()},
                      {"fw_gap", ev.fw_gap}};
            *trace << line.dump() << "\n";
        };
    }

    const gml::GlrObjective objective(gml::ObjectiveContext(features, z));
    const gml::LearnResult result = gml::learn_metric(objective, cfg, observer);
    for (const auto& d : result.diagnostics) {
        std::cerr << "note: " << d << "\n";
    }

    Json meta{{"dataset", ds.name},
              {"class", ds.class_names[static_cast<std::size_t>(target)]},
              {"feature_names", ds.feature_names},
              {"outer_iterations", result.outer_iterations},
              {"converged", result.converged},
              {"objective", result.objective_trace.back()}};
    write_output(o.out, gml::metric_to_json(gml::MetricFile{result.metric, cfg, scaler, meta}));
    return 0;
}

int cmd_classify(const Options& o) {
    if (o.metric.empty()) {
        throw std::runtime_error("--metric is required");
    }
    const gml::MetricFile file = gml::load_metric(o.metric);
    const gml::Dataset train = require_dataset(o, o.train);
    const gml::Dataset test = require_dataset(o, o.dataset);
    if (train.labels.empty() || train.num_classes < 2) {
        throw std::runtime_error("--train must be labeled with at least two classes");
    }
    if (train.dim() != file.metric.dim() || test.dim() != file.metric.dim()) {
        throw std::runtime_error("feature count does not match the metric dimension");
    }
    Eigen::MatrixXd xtr = train.features;
    Eigen::MatrixXd xte = test.features;
    if (file.scaler) {
        xtr = file.scaler->apply(xtr);
        xte = file.scaler->apply(xte);
    }
    const std::string classifier = o.classifier.empty() ? "graph" : o.classifier;
    if (classifier != "knn" && classifier != "graph") {
        throw std::runtime_error("classify supports --classifier knn or graph");
    }
    const auto classes = static_cast<std::size_t>(train.num_classes);
    const auto n_test = static_cast<std::size_t>(xte.rows());
    std::vector<std::vector<double>> scores(n_test, std::vector<double>(classes, 0.0));
    std::vector<int> predicted(n_test, 0);

    if (classifier == "knn") {
        std::vector<double> point(static_cast<std::size_t>(xte.cols()));
        for (std::size_t i = 0; i < n_test; ++i) {
            for (Eigen::Index k = 0; k < xte.cols(); ++k) {
                point[static_cast<std::size_t>(k)] = xte(static_cast<Eigen::Index>(i), k);
            }
            for (std::size_t c = 0; c < classes; ++c) {
                scores[i][c] = gml::knn_vote_share(xtr, train.labels, point, file.metric.matrix(), o.k,
                                                   static_cast<int>(c));
            }
            predicted[i] = gml::knn_classify(xtr, train.labels, point, file.metric, o.k);
        }
    } else {
        Eigen::MatrixXd joint(xtr.rows() + xte.rows(), xtr.cols());
        joint << xtr, xte;
        for (std::size_t c = 0; c < classes; ++c) {
            std::vector<gml::KnownLabel> known;
            for (std::size_t i = 0; i < train.size(); ++i) {
                known.push_back({i, train.labels[i] == static_cast<int>(c) ? 1.0 : -1.0});
            }
            const gml::GraphScores g = gml::graph_classify(joint, known, file.metric);
            if (g.regularized) {
                std::cerr << "warning: " << g.warning << "\n";
            }
            for (std::size_t i = 0; i < n_test; ++i) {
                scores[i][c] = g.scores[train.size() + i];
            }
        }
        for (std::size_t i = 0; i < n_test; ++i) {
            predicted[i] = static_cast<int>(gml::argmax(scores[i]));
        }
    }

    // Test labels are encoded independently; compare by class name.
    const bool labeled = !test.labels.empty();
    std::size_t errors = 0;
    Json rows = Json::array();
    for (std::size_t i = 0; i < n_test; ++i) {
        Json row{{"index", i}, {"predicted", train.class_names[static_cast<std::size_t>(predicted[i])]},
                 {"scores", scores[i]}};
        if (labeled) {
            const std::string& truth = test.class_names[static_cast<std::size_t>(test.labels[i])];
            row["label"] = truth;
            errors += truth != row["predicted"].get<std::string>();
        }
        rows.push_back(row);
    }

    if (o.format == "table") {
        std::ostringstream os;
        os << std::left << std::setw(8) << "index" << std::setw(16) << "predicted" << (labeled ? "label" : "") << "\n";
        for (const auto& row : rows) {
            os << std::left << std::setw(8) << row["index"].get<std::size_t>() << std::setw(16)
               << row["predicted"].get<std::string>() << (labeled ? row["label"].get<std::string>() : "") << "\n";
        }
        if (labeled) {
            os << "\nerror rate " << std::fixed << std::setprecision(2)
               << 100.0 * static_cast<double>(errors) / static_cast<double>(n_test) << "% (" << errors << "/" << n_test
               << ")\n";
        }
        write_output(o.out, os.str());
    } else {
        Json j{{"classifier", classifier}, {"k", o.k}, {"classes", train.class_names}, {"predictions", rows}};
        if (labeled) {
            j["errors"] = errors;
            j["error_rate"] = static_cast<double>(errors) / static_cast<double>(n_test);
        }
        write_output(o.out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_experiment(const Options& o) {
    const gml::Dataset ds = require_dataset(o, o.dataset);
    const gml::ExperimentConfig cfg = experiment_config(o);
    gml::ProgressFn progress;
    if (o.progress) {
        progress = [](std::size_t done, std::size_t total) {
            std::cerr << "\rseed " << done << "/" << total << std::flush;
            if (done == total) {
                std::cerr << "\n";
            }
        };
    }
    const gml::ExperimentReport report = gml::run_experiment(ds, cfg, progress);
    write_output(o.out, o.format == "table" ? report.to_table() : report.to_json() + "\n");
    return 0;
}

int cmd_verify(const Options& o) {
    gml::VerifyOptions vo;
    vo.seed = o.seed;
    vo.instances = o.instances;
    vo.max_dim = o.max_dim;
    const auto results = gml::run_verification(vo);
    bool ok = true;
    std::ostringstream os;
    if (o.format == "table") {
        for (const auto& r : results) {
            os << (r.passed() ? "pass  " : "FAIL  ") << std::left << std::setw(72) << r.name << std::right
               << std::setw(6) << r.checked << "  worst " << std::scientific << std::setprecision(2) << r.worst
               << "  tol " << r.tolerance << std::defaultfloat;
            if (!r.passed()) {
                os << "  (" << r.failures << " failures, first: " << r.first_failure << ")";
            }
            os << "\n";
            ok = ok && r.passed();
        }
    } else {
        Json j = Json::array();
        for (const auto& r : results) {
            j.push_back({{"property", r.name},
                         {"checked", r.checked},
                         {"failures", r.failures},
                         {"worst", r.worst},
                         {"tolerance", r.tolerance},
                         {"first_failure", r.first_failure}});
            ok = ok && r.passed();
        }
        os << j.dump(2) << "\n";
    }
    write_output(o.out, os.str());
    return ok ? 0 : 1;
}

std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            return argv[i + 1];
        }
        if (arg.rfind("--config=", 0) == 0) {
            return arg.substr(9);
        }
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    try {
        if (const std::string path = find_config_path(argc, argv); !path.empty()) {
            apply_config(gml::read_json_file(path), o);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"Graph metric learning with Gershgorin disc alignment"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default values for any flag (flags override it)");

    auto add_data_flags = [&](CLI::App* cmd) {
        cmd->add_option("--dataset", o.dataset, "CSV file");
        cmd->add_option("--label-col", o.label_col, "label column: last, first, none, an index or a header name");
        cmd->add_option("--out", o.out, "output file (default: stdout)");
        cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "table"}));
    };
    auto add_standardize = [&](CLI::App* cmd) {
        cmd->add_flag("--standardize,!--no-standardize", o.standardize, "z-score features (on by default)");
    };

    OptionalFlag cap;
    OptionalFlag rho;
    OptionalFlag eps;

    CLI::App* learn = app.add_subcommand("learn", "learn a metric for one class against the rest");
    add_data_flags(learn);
    add_standardize(learn);
    add_optimizer_flags(learn, o, cap, rho, eps);
    learn->add_option("--class", o.target_class, "class labeled +1 (name or encoded index; default: first class)");
    learn->add_option("--trace", o.trace, "write one JSON line per outer iteration to this file ('-' for stderr)");

    OptionalFlag cap2;
    OptionalFlag rho2;
    OptionalFlag eps2;
    CLI::App* experiment = app.add_subcommand("experiment", "run the repeated cross-validation protocol");
    add_data_flags(experiment);
    add_standardize(experiment);
    add_optimizer_flags(experiment, o, cap2, rho2, eps2);
    experiment->add_option("--classifier", o.classifier, "classifier to evaluate (default: both)")
        ->check(CLI::IsMember({"knn", "graph", "both"}));
    experiment->add_option("--k", o.k, "neighbors for kNN")->check(CLI::PositiveNumber);
    experiment->add_option("--seeds", o.seeds, "inclusive seed range a..b");
    experiment->add_option("--folds", o.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
    experiment->add_flag("--progress", o.progress, "report progress on stderr");

    CLI::App* classify = app.add_subcommand("classify", "label a dataset with a learned metric");
    add_data_flags(classify);
    classify->add_option("--metric", o.metric, "metric JSON written by learn");
    classify->add_option("--train", o.train, "labeled training CSV");
    classify->add_option("--classifier", o.classifier, "classifier (default: graph)")
        ->check(CLI::IsMember({"knn", "graph"}));
    classify->add_option("--k", o.k, "neighbors for kNN")->check(CLI::PositiveNumber);

    CLI::App* verify = app.add_subcommand("verify", "check the library's properties on random instances");
    verify->add_option("--seed", o.seed, "random seed");
    verify->add_option("--instances", o.instances, "random matrices to test");
    verify->add_option("--max-dim", o.max_dim, "largest matrix dimension")->check(CLI::Range(2, 200));
    verify->add_option("--out", o.out, "output file (default: stdout)");
    verify->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "table"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*learn) {
            cap.commit(o.trace_cap);
            rho.commit(o.rho);
            eps.commit(o.epsilon);
            return cmd_learn(o);
        }
        if (*experiment) {
            cap2.commit(o.trace_cap);
            rho2.commit(o.rho);
            eps2.commit(o.epsilon);
            return cmd_experiment(o);
        }
        if (*classify) {
            return cmd_classify(o);
        }
        if (*verify) {
            return cmd_verify(o);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
