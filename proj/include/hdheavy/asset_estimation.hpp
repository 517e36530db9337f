#pragma once

#include "hdheavy/asset_model.hpp"
#include "hdheavy/core_estimation.hpp"

#include <vector>

namespace hdh {

struct AssetFit {
    AssetModelParams params;
    AssetFilteredState state;
    FitReport report;
};

/// Two-stage QML for one asset given the frozen core state: the conditional return model
/// (variance and return-correlation vector), then the conditional realized model.
[[nodiscard]] AssetFit estimate_asset(const AssetSeries& series, const CoreFilteredState& core,
                                      const CoreContext& context, const EstimationOptions& options);

/// All assets, distributed over options.workers threads. Results are ordered by asset.
[[nodiscard]] std::vector<AssetFit> estimate_assets(const MatrixXd& monthly_asset_returns,
                                                    const RealizedMeasures& measures, const CoreFit& core,
                                                    const EstimationOptions& options);

/// Core plus asset totals: LLF and the 8K + 4 + 14N parameter count (free parameters
/// for restricted variants).
[[nodiscard]] FitReport combine_reports(const CoreFit& core, const std::vector<AssetFit>& assets);

}  // namespace hdh
