#pragma once

#include "hdheavy/asset_estimation.hpp"
#include "hdheavy/calendar.hpp"
#include "hdheavy/core_estimation.hpp"
#include "hdheavy/panel.hpp"
#include "hdheavy/realized.hpp"
#include "hdheavy/shrinkage.hpp"

#include <string>
#include <vector>

namespace hdh {

/// diag(h^c)^{-1/2} R^{-1} rho sqrt(h_i). Throws PdViolation for a non-PD R.
[[nodiscard]] VectorXd compute_beta(const VectorXd& h_factors, const MatrixXd& R, const VectorXd& rho,
                                    double h_asset);

struct BetaPath {
    std::vector<MatrixXd> betas;  // T of N x K
    MatrixXd alphas;              // T x N
    VectorXd mu_assets;
    VectorXd mu_factors;
};

[[nodiscard]] BetaPath beta_path(const CoreFilteredState& core, const std::vector<AssetFilteredState>& assets,
                                 const MatrixXd& asset_returns, const MatrixXd& factor_returns);

struct ModelOptions {
    EstimationOptions estimation;
    ShrinkageMethod shrinkage = ShrinkageMethod::Nonlinear;
};

/// Estimated parameters and in-sample states for one window.
struct FittedModel {
    CoreFit core;
    std::vector<AssetFit> assets;
    ResidualCovariance residual;
    BetaPath betas;
    FitReport report;
};

[[nodiscard]] FittedModel fit_model(const MatrixXd& factor_returns, const MatrixXd& asset_returns,
                                    const RealizedMeasures& measures, const ModelOptions& options);

struct CovarianceForecast {
    YearMonth month;
    MatrixXd H_hat;        // N x N
    MatrixXd H_factor;     // K x K
    MatrixXd B_next;       // N x K
    MatrixXd sigma_resid;  // N x N
    bool refit = false;
    bool carried_forward = false;
};

/// Forecast for the month after the last one in `measures`, with parameters frozen and the
/// states re-filtered over the supplied data.
[[nodiscard]] CovarianceForecast forecast_one_step(const FittedModel& model, const MatrixXd& factor_returns,
                                                   const MatrixXd& asset_returns, const RealizedMeasures& measures,
                                                   YearMonth target);

struct RollingOptions {
    std::size_t window = 660;
    std::size_t refit_every = 12;
    ModelOptions model;
};

struct RollingResult {
    std::vector<CovarianceForecast> forecasts;
    std::vector<FitReport> fits;
    std::vector<YearMonth> fit_months;  // first forecast month of each estimation window
    std::vector<std::string> warnings;
};

/// One forecast per month from index `window` to the end of the panel. Parameters are
/// re-estimated every `refit_every` months on the trailing window; a failed re-estimation
/// keeps the previous parameters.
[[nodiscard]] RollingResult rolling_forecasts(const ReturnPanel& panel, const RealizedMeasures& measures,
                                              const RollingOptions& options);

}  // namespace hdh
