#pragma once

#include "hdheavy/asset_estimation.hpp"
#include "hdheavy/core_estimation.hpp"
#include "hdheavy/forecasting.hpp"
#include "hdheavy/shrinkage.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hdh {

/// One estimated coefficient with its box.
struct ParameterRecord {
    std::string block;  // "core" or the asset ticker
    std::string name;
    std::optional<std::size_t> index;  // factor index for per-factor coefficients
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

[[nodiscard]] std::vector<ParameterRecord> core_parameter_records(const CoreModelParams& params);
[[nodiscard]] std::vector<ParameterRecord> asset_parameter_records(const std::string& ticker,
                                                                   const AssetModelParams& params, double phi_lower,
                                                                   double phi_upper);

/// Header `block,name,index,value,lower,upper`, one row per coefficient.
void write_parameter_records(const std::filesystem::path& path, const std::vector<ParameterRecord>& records);
[[nodiscard]] std::vector<ParameterRecord> read_parameter_records(const std::filesystem::path& path);

/// Parameters plus the data moments (targets and starting values) needed to re-filter.
struct StoredModel {
    CoreModelParams core;
    std::vector<std::string> asset_names;
    std::vector<AssetModelParams> assets;
};

void write_model(const std::filesystem::path& parameters_path, const std::filesystem::path& moments_path,
                 const CoreModelParams& core, const std::vector<std::string>& asset_names, const std::vector<AssetModelParams>& assets,
                 double phi_lower, double phi_upper);
[[nodiscard]] StoredModel read_model(const std::filesystem::path& parameters_path,
                                     const std::filesystem::path& moments_path);

/// Header `model,llf,aic,bic,parameters,observations,converged`.
void write_fit_summary(const std::filesystem::path& path, const std::vector<std::string>& labels,
                       const std::vector<FitReport>& reports);

/// Header `model,block,stage,llf,start_llf,parameters,evaluations,converged`.
void write_fit_stages(const std::filesystem::path& path, const std::string& label, const FitReport& core,
                      const std::vector<std::string>& asset_names, const std::vector<FitReport>& assets);

/// Square or rectangular matrix with a leading name column.
void write_matrix(const std::filesystem::path& path, const MatrixXd& m, const std::vector<std::string>& row_names,
                  const std::vector<std::string>& col_names);

/// Header `index,original,shrunk`.
void write_eigen_table(const std::filesystem::path& path, const ResidualCovariance& residual);

/// One file per forecast month under `directory` (`<YYYY-MM>.csv`, rows `block,row,col,value`
/// holding vech(H_hat), vech(H_factor), B and vech(Sigma)) plus `manifest.csv`.
void write_forecast_store(const std::filesystem::path& directory, const std::string& variant,
                          const std::vector<CovarianceForecast>& forecasts, std::size_t assets, std::size_t factors);

struct ForecastStore {
    std::string variant;
    std::vector<CovarianceForecast> forecasts;
};

[[nodiscard]] ForecastStore read_forecast_store(const std::filesystem::path& directory);

}  // namespace hdh
