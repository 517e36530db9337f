#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hdh {

inline constexpr int kSchemaVersion = 1;

/// Model variants: factor count and whether the recursions are symmetric.
struct VariantSpec {
    std::string label;
    std::size_t factors = 0;
    bool symmetric = false;
};

/// 4F, FF, M or SYM; throws Config otherwise.
[[nodiscard]] VariantSpec variant_spec(std::string_view label);

struct DataConfig {
    std::string daily;
    std::string monthly;
    std::string monthly_source = "file";  // file | compound
    std::size_t factor_count = 4;         // factor columns in the input files
    std::string start;                    // optional YYYY-MM
    std::string end;
};

struct EstimationConfig {
    int starts = 5;
    int max_evaluations = 20000;
    std::size_t min_months = 60;
    unsigned workers = 1;
    double phi_lower = 0.0;
    double phi_upper = 3.0;
    std::uint64_t seed = 20240601;
};

struct ForecastConfig {
    std::size_t window = 660;
    std::size_t refit_every = 12;
    std::string shrinkage = "nonlinear";  // nonlinear | linear
};

struct EvaluationConfig {
    std::string proxy = "outer";  // outer | realized
    std::vector<double> gammas{1.0, 10.0};
    std::string forecast_root;  // evaluate: directory holding <variant>/manifest.csv
};

struct McsConfig {
    double confidence = 0.90;
    std::size_t block_length = 4;
    std::vector<std::size_t> block_lengths{2, 4, 8};
    std::size_t replications = 10000;
    std::uint64_t seed = 20240601;
};

struct SimulationConfig {
    std::size_t factors = 4;
    std::size_t assets = 5;
    std::size_t months = 240;
    std::size_t days_per_month = 21;
    std::uint64_t seed = 1;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    std::string variant = "4F";
    std::vector<std::string> variants{"4F", "FF", "M", "SYM"};
    std::string output_dir = "runs";
    DataConfig data;
    EstimationConfig estimation;
    ForecastConfig forecast;
    EvaluationConfig evaluation;
    McsConfig mcs;
    SimulationConfig simulation;
};

[[nodiscard]] nlohmann::ordered_json to_json(const RunConfig& config);

/// Reads a config object on top of the defaults. Every problem found (unknown keys, wrong
/// types, out-of-range values) is collected and reported together as one Config error.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& j);

[[nodiscard]] RunConfig load_config(const std::string& path);

/// Semantic checks on a parsed config; empty when valid.
[[nodiscard]] std::vector<std::string> validate(const RunConfig& config);

}  // namespace hdh
