#include "hdheavy/forecasting.hpp"

#include <spdlog/spdlog.h>

#include <optional>
#include <string>

namespace hdh {

VectorXd compute_beta(const VectorXd& h_factors, const MatrixXd& R, const VectorXd& rho, double h_asset) {
    const Eigen::LLT<MatrixXd> llt(R);
    if (llt.info() != Eigen::Success || !is_pd(R)) {
        fail(ErrorCode::PdViolation, "compute_beta: factor correlation matrix is not positive definite");
    }
    const VectorXd x = llt.solve(rho);
    return x.cwiseQuotient(h_factors.cwiseSqrt()) * std::sqrt(h_asset);
}

BetaPath beta_path(const CoreFilteredState& core, const std::vector<AssetFilteredState>& assets,
                   const MatrixXd& asset_returns, const MatrixXd& factor_returns) {
    const std::size_t T = core.months();
    const auto N = static_cast<Eigen::Index>(assets.size());
    const auto K = core.h.cols();
    BetaPath path;
    path.mu_assets = asset_returns.colwise().mean().transpose();
    path.mu_factors = factor_returns.colwise().mean().transpose();
    path.alphas.resize(static_cast<Eigen::Index>(T), N);
    path.betas.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        MatrixXd B(N, K);
        const VectorXd hc = core.h.row(ti).transpose();
        for (Eigen::Index i = 0; i < N; ++i) {
            const auto& a = assets[static_cast<std::size_t>(i)];
            B.row(i) = compute_beta(hc, core.R[t], a.rho.row(ti).transpose(), a.h(ti)).transpose();
        }
        path.alphas.row(ti) = (path.mu_assets - B * path.mu_factors).transpose();
        path.betas.push_back(std::move(B));
    }
    return path;
}

FittedModel fit_model(const MatrixXd& factor_returns, const MatrixXd& asset_returns, const RealizedMeasures& measures,
                      const ModelOptions& options) {
    FittedModel m;
    m.core = estimate_core(factor_returns, measures, options.estimation);
    m.assets = estimate_assets(asset_returns, measures, m.core, options.estimation);
    std::vector<AssetFilteredState> states;
    states.reserve(m.assets.size());
    for (const auto& a : m.assets) {
        states.push_back(a.state);
    }
    m.betas = beta_path(m.core.state, states, asset_returns, factor_returns);
    const MatrixXd eps = compute_residuals(asset_returns, factor_returns, m.betas.betas, m.betas.alphas);
    m.residual = shrink_residuals(eps, options.shrinkage);
    m.report = combine_reports(m.core, m.assets);
    return m;
}

CovarianceForecast forecast_one_step(const FittedModel& model, const MatrixXd& factor_returns,
                                     const MatrixXd& asset_returns, const RealizedMeasures& measures,
                                     YearMonth target) {
    const CoreFilteredState core = filter_core(model.core.params, measures, factor_returns);
    const CoreStep step = core_next(model.core.params, core, measures, factor_returns);
    const auto N = static_cast<Eigen::Index>(model.assets.size());
    const auto K = static_cast<Eigen::Index>(step.h.size());

    CovarianceForecast f;
    f.month = target;
    f.H_factor = step.H;
    f.B_next.resize(N, K);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto& params = model.assets[static_cast<std::size_t>(i)].params;
        const AssetSeries series = make_asset_series(asset_returns, measures, static_cast<std::size_t>(i));
        const AssetFilteredState state = filter_asset(params, series, core);
        const AssetStep next = asset_next(params, state, series);
        if (1.0 - next.rho.dot(step.R.llt().solve(next.rho)) <= kPdTolerance) {
            fail(ErrorCode::PdViolation, "asset " + series.name + ": forecast joint correlation not positive definite");
        }
        f.B_next.row(i) = compute_beta(step.h, step.R, next.rho, next.h).transpose();
    }
    f.sigma_resid = model.residual.sigma;
    f.H_hat = f.B_next * f.H_factor * f.B_next.transpose() + f.sigma_resid;
    f.H_hat = 0.5 * (f.H_hat + f.H_hat.transpose()).eval();
    if (!is_pd(f.H_hat)) {
        fail(ErrorCode::PdViolation, "covariance forecast for " + target.str() + " is not positive definite");
    }
    return f;
}

namespace {

struct Window {
    MatrixXd factors;
    MatrixXd assets;
    RealizedMeasures measures;
};

Window window(const ReturnPanel& panel, const RealizedMeasures& measures, std::size_t first, std::size_t count) {
    const auto f = static_cast<Eigen::Index>(first);
    const auto c = static_cast<Eigen::Index>(count);
    return {panel.factor_returns_monthly.middleRows(f, c), panel.asset_returns_monthly.middleRows(f, c),
            measures.slice(first, count)};
}

}  // namespace

RollingResult rolling_forecasts(const ReturnPanel& panel, const RealizedMeasures& measures,
                                const RollingOptions& options) {
    const std::size_t T = panel.months();
    if (options.window + 1 > T) {
        fail(ErrorCode::Input, "rolling_forecasts: window of " + std::to_string(options.window) +
                                   " months leaves no out-of-sample month in " + std::to_string(T));
    }
    if (options.refit_every == 0) {
        fail(ErrorCode::Input, "rolling_forecasts: re-estimation frequency must be positive");
    }
    RollingResult out;
    std::optional<FittedModel> model;
    std::size_t model_start = 0;
    for (std::size_t s = options.window; s < T; ++s) {
        bool refit = false;
        bool carried = false;
        if ((s - options.window) % options.refit_every == 0) {
            const std::size_t start = s - options.window;
            const Window w = window(panel, measures, start, options.window);
            try {
                model = fit_model(w.factors, w.assets, w.measures, options.model);
                model_start = start;
                refit = true;
                out.fits.push_back(model->report);
                out.fit_months.push_back(panel.dates_monthly[s]);
            } catch (const Error& e) {
                if (!model) {
                    throw;
                }
                carried = true;
                const std::string msg = "re-estimation for " + panel.dates_monthly[s].str() +
                                        " failed (" + e.what() + "); previous parameters carried forward";
                spdlog::warn("{}", msg);
                out.warnings.push_back(msg);
            }
        }
        const Window w = window(panel, measures, model_start, s - model_start);
        CovarianceForecast f = forecast_one_step(*model, w.factors, w.assets, w.measures, panel.dates_monthly[s]);
        f.refit = refit;
        f.carried_forward = carried;
        out.forecasts.push_back(std::move(f));
    }
    return out;
}

}  // namespace hdh
