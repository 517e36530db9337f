#pragma once

#include "hdheavy/core_model.hpp"
#include "hdheavy/optimizer.hpp"
#include "hdheavy/panel.hpp"
#include "hdheavy/realized.hpp"

#include <string>
#include <vector>

namespace hdh {

struct EstimationOptions {
    optim::Options optimizer;
    std::size_t min_months = 60;
    bool symmetric = false;
    // Box for the Fisher-correlation intercepts of the asset models.
    double phi_lower = 0.0;
    double phi_upper = 3.0;
    unsigned workers = 1;
};

struct StageReport {
    std::string name;
    double llf = kNegInf;
    double start_llf = kNegInf;
    std::size_t parameters = 0;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Log-likelihood summary. AIC and BIC are scaled by the number of observations.
struct FitReport {
    std::vector<StageReport> stages;
    double llf = 0.0;
    std::size_t parameters = 0;
    std::size_t observations = 0;
    bool converged = true;
    std::vector<std::string> warnings;

    [[nodiscard]] double aic() const;
    [[nodiscard]] double bic() const;
    [[nodiscard]] double stage_llf(const std::string& prefix) const;
};

struct CoreFit {
    CoreModelParams params;
    CoreFilteredState state;
    FitReport report;
};

/// Step-wise QML: per-factor variance fits, the return-correlation pair, per-factor
/// realized-variance fits, then the realized-correlation pair. K = 1 fixes both pairs at 0.
[[nodiscard]] CoreFit estimate_core(const MatrixXd& monthly_factor_returns, const RealizedMeasures& measures,
                                    const EstimationOptions& options);

[[nodiscard]] CoreFit estimate_core(const ReturnPanel& panel, const RealizedMeasures& measures,
                                    const EstimationOptions& options);

/// Joint log-likelihood of returns and realized covariances at given parameters:
/// the Gaussian density of r_t given H_t plus the nu = 1 Wishart density of RC_t given M_t.
[[nodiscard]] double core_joint_llf(const CoreModelParams& params, const RealizedMeasures& measures,
                                    const MatrixXd& monthly_factor_returns);

}  // namespace hdh
