#pragma once

#include "hdheavy/config.hpp"
#include "hdheavy/forecasting.hpp"
#include "hdheavy/panel.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hdh {

inline constexpr const char* kDataDirVariable = "HDHEAVY_DATA_DIR";

/// Relative paths are taken from $HDHEAVY_DATA_DIR when it is set.
[[nodiscard]] std::filesystem::path resolve_data_path(const std::string& path);

[[nodiscard]] ReturnPanel load_configured_panel(const RunConfig& config);

[[nodiscard]] ModelOptions model_options(const RunConfig& config, const VariantSpec& variant);

struct RunResult {
    std::filesystem::path run_dir;
    std::vector<std::string> files;  // relative to run_dir, sorted
};

/// Executes one subcommand (ingest, estimate, forecast, backtest, simulate, evaluate).
/// Artifacts go to <output_dir>/<command>-<hash>, where the hash covers the settings and
/// the bytes of every input file, and a manifest.json listing them is written last.
RunResult run(const std::string& command, const RunConfig& config);

/// Loss tables, MCS reports, portfolio diagnostics and utility fees for aligned forecast
/// sequences, one per variant label. Returns the files written, relative to `dir`.
std::vector<std::string> write_backtest_reports(const std::filesystem::path& dir, const ReturnPanel& panel,
                                                const std::map<std::string, std::vector<CovarianceForecast>>& forecasts,
                                                const std::vector<std::string>& order, const RunConfig& config);

}  // namespace hdh
