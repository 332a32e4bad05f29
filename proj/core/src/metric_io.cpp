#include "gml/metric_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gml {
namespace {

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) {
        out = j.at(key).get<T>();
    }
}

template <typename T>
void read_optional(const Json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key)) {
        if (j.at(key).is_null()) {
            out.reset();
        } else {
            out = j.at(key).get<T>();
        }
    }
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const OptimizerConfig& cfg) {
    Json j;
    j["trace_cap"] = cfg.trace_cap;
    j["rho"] = cfg.rho;
    j["epsilon"] = cfg.epsilon;
    j["fw_max_iters"] = cfg.fw_max_iters;
    j["outer_max_iters"] = cfg.outer_max_iters;
    j["bcd_sweeps"] = cfg.bcd_sweeps;
    j["obj_rel_tol"] = cfg.obj_rel_tol;
    j["fw_step"] = to_string(cfg.fw_step_rule);
    j["armijo_c"] = cfg.armijo_c;
    j["lobpcg_tol"] = cfg.lobpcg.tol;
    j["lobpcg_max_iters"] = cfg.lobpcg.max_iters;
    return j;
}

OptimizerConfig optimizer_config_from_json(const Json& j, OptimizerConfig base) {
    if (!j.is_object()) {
        throw std::runtime_error("optimizer config must be a JSON object");
    }
    static const std::set<std::string> known{"trace_cap",  "rho",      "epsilon",    "fw_max_iters",
                                             "outer_max_iters", "bcd_sweeps", "obj_rel_tol", "fw_step",
                                             "armijo_c",   "lobpcg_tol", "lobpcg_max_iters"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw std::runtime_error("unknown optimizer config key '" + key + "'");
        }
    }
    read_if(j, "trace_cap", base.trace_cap);
    read_if(j, "rho", base.rho);
    read_if(j, "epsilon", base.epsilon);
    read_if(j, "fw_max_iters", base.fw_max_iters);
    read_if(j, "outer_max_iters", base.outer_max_iters);
    read_if(j, "bcd_sweeps", base.bcd_sweeps);
    read_if(j, "obj_rel_tol", base.obj_rel_tol);
    if (j.contains("fw_step")) {
        base.fw_step_rule = parse_step_rule(j.at("fw_step").get<std::string>());
    }
    read_if(j, "armijo_c", base.armijo_c);
    read_if(j, "lobpcg_tol", base.lobpcg.tol);
    read_if(j, "lobpcg_max_iters", base.lobpcg.max_iters);
    return base;
}

Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["trace_cap"] = optional_json(cfg.trace_cap);
    j["rho"] = optional_json(cfg.rho);
    j["epsilon"] = optional_json(cfg.epsilon);
    j["fw_step"] = to_string(cfg.fw_step_rule);
    j["fw_max_iters"] = cfg.fw_max_iters;
    j["outer_max_iters"] = cfg.outer_max_iters;
    j["bcd_sweeps"] = cfg.bcd_sweeps;
    j["obj_rel_tol"] = cfg.obj_rel_tol;
    j["classifier"] = to_string(cfg.classifier);
    j["k"] = cfg.k;
    j["seeds"] = cfg.seeds.to_string();
    j["folds"] = cfg.folds;
    j["standardize"] = cfg.standardize;
    j["rng"] = "mt19937_64";
    return j;
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base) {
    if (!j.is_object()) {
        throw std::runtime_error("config must be a JSON object");
    }
    read_optional(j, "trace_cap", base.trace_cap);
    read_optional(j, "rho", base.rho);
    read_optional(j, "epsilon", base.epsilon);
    if (j.contains("fw_step")) {
        base.fw_step_rule = parse_step_rule(j.at("fw_step").get<std::string>());
    }
    read_if(j, "fw_max_iters", base.fw_max_iters);
    read_if(j, "outer_max_iters", base.outer_max_iters);
    read_if(j, "bcd_sweeps", base.bcd_sweeps);
    read_if(j, "obj_rel_tol", base.obj_rel_tol);
    if (j.contains("classifier")) {
        base.classifier = parse_classifier(j.at("classifier").get<std::string>());
    }
    read_if(j, "k", base.k);
    if (j.contains("seeds")) {
        const Json& s = j.at("seeds");
        base.seeds = s.is_string() ? parse_seed_range(s.get<std::string>())
                                   : SeedRange{s.get<std::uint64_t>(), s.get<std::uint64_t>()};
    }
    read_if(j, "folds", base.folds);
    read_if(j, "standardize", base.standardize);
    return base;
}

Json to_json(const Scaler& scaler) { return Json{{"mean", scaler.mean}, {"scale", scaler.scale}}; }

Scaler scaler_from_json(const Json& j) {
    Scaler s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    if (s.mean.size() != s.scale.size()) {
        throw std::runtime_error("scaler: mean and scale lengths differ");
    }
    return s;
}

std::string metric_to_json(const MetricFile& file) {
    const SymmetricMatrix& m = file.metric.matrix();
    Json j;
    j["dim"] = m.dim();
    j["entries"] = m.to_row_major();
    j["lambda_min"] = file.metric.lambda_min();
    j["config"] = to_json(file.config);
    if (file.scaler) {
        j["scaler"] = to_json(*file.scaler);
    }
    if (!file.meta.empty()) {
        j["meta"] = file.meta;
    }
    return j.dump(2) + "\n";
}

MetricFile metric_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error(std::string("metric file is not valid JSON: ") + e.what());
    }
    for (const char* key : {"dim", "entries", "lambda_min", "config"}) {
        if (!j.contains(key)) {
            throw std::runtime_error(std::string("metric file lacks '") + key + "'");
        }
    }
    const auto dim = j.at("dim").get<std::size_t>();
    const auto entries = j.at("entries").get<std::vector<double>>();
    if (dim == 0 || entries.size() != dim * dim) {
        throw std::runtime_error("metric file: 'entries' must hold dim*dim values");
    }
    const SymmetricMatrix m = SymmetricMatrix::from_row_major(dim, entries);
    MetricFile out{certify(m), optimizer_config_from_json(j.at("config"), OptimizerConfig{}), std::nullopt,
                   Json::object()};
    if (j.contains("scaler")) {
        out.scaler = scaler_from_json(j.at("scaler"));
        if (out.scaler->mean.size() != dim) {
            throw std::runtime_error("metric file: scaler length does not match dim");
        }
    }
    if (j.contains("meta")) {
        out.meta = j.at("meta");
    }
    return out;
}

void save_metric(const std::filesystem::path& path, const MetricFile& file) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << metric_to_json(file);
}

MetricFile load_metric(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return metric_from_json(buffer.str());
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace gml
