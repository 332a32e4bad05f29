#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "gml/dataset.hpp"
#include "gml/experiment.hpp"
#include "gml/graph_metric.hpp"
#include "gml/optimizer.hpp"

namespace gml {

using Json = nlohmann::ordered_json;

Json to_json(const OptimizerConfig& cfg);
/// Reads the keys present in `j` over `base`; unknown keys are rejected.
OptimizerConfig optimizer_config_from_json(const Json& j, OptimizerConfig base);

Json to_json(const ExperimentConfig& cfg);
/// Like optimizer_config_from_json, but keys owned by the command line tool
/// (dataset, out, format, ...) are skipped rather than rejected.
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

Json to_json(const Scaler& scaler);
Scaler scaler_from_json(const Json& j);

/// Learned metric as stored on disk: `dim`, row-major `entries`, `lambda_min`,
/// the optimizer `config`, and optionally the feature `scaler` the metric was
/// learned under plus free-form `meta`.
struct MetricFile {
    GraphMetric metric;
    OptimizerConfig config;
    std::optional<Scaler> scaler;
    Json meta = Json::object();
};

std::string metric_to_json(const MetricFile& file);
/// Parses and re-certifies the matrix; throws CertificationError if the
/// stored entries are not a graph metric and std::runtime_error on schema errors.
MetricFile metric_from_json(const std::string& text);

void save_metric(const std::filesystem::path& path, const MetricFile& file);
MetricFile load_metric(const std::filesystem::path& path);

/// Reads a whole file as JSON (throws std::runtime_error naming the path).
Json read_json_file(const std::filesystem::path& path);

}  // namespace gml
