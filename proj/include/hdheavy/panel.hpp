#pragma once

#include "hdheavy/calendar.hpp"
#include "hdheavy/common.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hdh {

/// Aligned daily and monthly returns for K factors and N assets.
///
/// Daily rows are grouped into calendar months; `month_offsets[t]` is the first daily
/// row of month t and `month_offsets[T]` equals the number of daily rows.
struct ReturnPanel {
    std::vector<Date> dates_daily;
    std::vector<YearMonth> dates_monthly;
    std::vector<std::size_t> month_offsets;
    std::vector<std::string> factor_names;
    std::vector<std::string> asset_names;
    MatrixXd factor_returns_daily;    // T_d x K
    MatrixXd factor_returns_monthly;  // T x K
    MatrixXd asset_returns_daily;     // T_d x N
    MatrixXd asset_returns_monthly;   // T x N

    [[nodiscard]] std::size_t months() const { return dates_monthly.size(); }
    [[nodiscard]] std::size_t days() const { return dates_daily.size(); }
    [[nodiscard]] std::size_t factors() const { return factor_names.size(); }
    [[nodiscard]] std::size_t assets() const { return asset_names.size(); }
    [[nodiscard]] std::size_t days_in_month(std::size_t t) const {
        return month_offsets[t + 1] - month_offsets[t];
    }

    /// Checks every structural invariant; throws Error on the first violation.
    void validate() const;

    /// Copy keeping only the first `k` factors.
    [[nodiscard]] ReturnPanel with_factors(std::size_t k) const;

    /// Copy restricted to months [first, first + count).
    [[nodiscard]] ReturnPanel slice(std::size_t first, std::size_t count) const;
};

enum class MonthlySource { File, Compound };

struct IngestionConfig {
    /// Number of leading return columns (after `date`) that are factors.
    std::size_t factor_count = 1;
    MonthlySource monthly_source = MonthlySource::File;
    std::filesystem::path monthly_path;
    std::optional<YearMonth> start;
    std::optional<YearMonth> end;
};

/// Reads the daily CSV (and the monthly CSV when configured) into a validated panel.
ReturnPanel load_panel(const std::filesystem::path& daily_path, const IngestionConfig& config);

/// Stream form of load_panel; `monthly` may be null when compounding.
ReturnPanel parse_panel(std::istream& daily, std::istream* monthly, const IngestionConfig& config);

/// Monthly compounded returns prod(1 + r) - 1 per month group.
MatrixXd compound_monthly(const MatrixXd& daily, const std::vector<std::size_t>& month_offsets);

/// Writes the panel in the two-file CSV layout load_panel reads.
void write_panel(const ReturnPanel& panel, const std::filesystem::path& daily_path,
                 const std::filesystem::path& monthly_path);

}  // namespace hdh
