#pragma once

#include "hdheavy/calendar.hpp"
#include "hdheavy/common.hpp"
#include "hdheavy/panel.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hdh {

/// Monthly realized measures built from the daily returns inside each month.
///
/// Covariances are uncentered: RC_t = sum_j r_j r_j'. Zero daily returns belong to the
/// negative semivariance leg. All values are in raw (monthly, decimal) units.
struct RealizedMeasures {
    std::vector<YearMonth> months;
    std::vector<std::string> factor_names;
    std::vector<std::string> asset_names;

    MatrixXd rv_factors;   // T x K
    MatrixXd semivar_pos;  // T x K
    MatrixXd semivar_neg;  // T x K
    MatrixSeq rc_factors;  // T of K x K
    MatrixSeq rl_factors;  // T of K x K, unit diagonal

    MatrixXd rv_assets;           // T x N
    MatrixXd semivar_pos_assets;  // T x N
    MatrixXd semivar_neg_assets;  // T x N
    std::vector<MatrixXd> rc_asset_factor;  // N of T x K
    std::vector<MatrixXd> rl_asset_factor;  // N of T x K

    // RV split on the sign of the month's own return; summary statistics only.
    MatrixXd gjr_pos_factors;
    MatrixXd gjr_neg_factors;
    MatrixXd gjr_pos_assets;
    MatrixXd gjr_neg_assets;

    [[nodiscard]] std::size_t months_count() const { return months.size(); }
    [[nodiscard]] std::size_t factors() const { return static_cast<std::size_t>(rv_factors.cols()); }
    [[nodiscard]] std::size_t assets() const { return static_cast<std::size_t>(rv_assets.cols()); }

    /// Months [first, first + count).
    [[nodiscard]] RealizedMeasures slice(std::size_t first, std::size_t count) const;
};

struct Semivariances {
    double pos = 0.0;
    double neg = 0.0;
};

/// Sum of squared daily returns; requires at least two observations.
[[nodiscard]] double realized_variance(std::span<const double> daily);

/// Squared positive returns and squared non-positive returns, summed separately.
[[nodiscard]] Semivariances signed_semivariances(std::span<const double> daily);

/// Uncentered outer-product sum of the rows of an m x d block.
[[nodiscard]] MatrixXd realized_covariance(const Eigen::Ref<const MatrixXd>& daily);

/// D^{-1/2} RC D^{-1/2} with an exact unit diagonal. Throws DegenerateMonth when a series
/// has zero realized variance.
[[nodiscard]] MatrixXd realized_correlation_matrix(const Eigen::Ref<const MatrixXd>& daily);

[[nodiscard]] RealizedMeasures build_measures(const ReturnPanel& panel);

/// Annualisation used for reporting monthly variances (percent per year).
inline constexpr double kAnnualizedPercent = 1200.0;

struct SummaryRow {
    std::string series;
    std::string statistic;  // r2, RV, P, N, GJR_P, GJR_N, RL
    double mean = 0.0;
    double sd = 0.0;
};

/// Time-series means and standard deviations per series, variances annualised by 1200;
/// the RL row averages over the factor pairs.
[[nodiscard]] std::vector<SummaryRow> summarize_measures(const ReturnPanel& panel, const RealizedMeasures& m);

void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

/// Wide CSV cache, one row per month. Column order: factors first, then assets, each group
/// sorted by name. Realized correlations are rebuilt from the covariances on read.
void write_measures(const std::filesystem::path& path, const RealizedMeasures& m);

/// Reads a cache written by write_measures, returning series in the given name order.
[[nodiscard]] RealizedMeasures read_measures(const std::filesystem::path& path,
                                             const std::vector<std::string>& factor_names,
                                             const std::vector<std::string>& asset_names);

}  // namespace hdh
