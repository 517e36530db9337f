#include "expect_error.hpp"
#include "support.hpp"

#include "hdheavy/forecasting.hpp"
#include "hdheavy/simulation.hpp"

#include <spdlog/spdlog.h>

using namespace hdh;
using namespace support;

namespace {

struct ForecastFixture {
    SimulationResult sim;
    RealizedMeasures m;
    FittedModel model;
    ModelOptions options;
};

const ForecastFixture& fixture() {
    static const ForecastFixture f = [] {
        spdlog::set_level(spdlog::level::err);
        ForecastFixture x;
        x.sim = simulate(default_dgp(2, 3, 200, 404));
        x.m = build_measures(x.sim.panel);
        x.options.estimation.optimizer.starts = 1;
        const RealizedMeasures w = x.m.slice(0, 150);
        x.model = fit_model(x.sim.panel.factor_returns_monthly.topRows(150),
                            x.sim.panel.asset_returns_monthly.topRows(150), w, x.options);
        return x;
    }();
    return f;
}

}  // namespace

TEST(Beta, MatchesRegressionCoefficientOfTheJointCovariance) {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index K = 1 + rep % 5;
        const MatrixXd R = random_correlation(K, rng);
        VectorXd h(K);
        for (Eigen::Index k = 0; k < K; ++k) {
            h(k) = uniform(rng, 0.0005, 0.01);
        }
        VectorXd rho = VectorXd::Constant(K, uniform(rng, -0.3, 0.3));
        const double hi = uniform(rng, 0.001, 0.02);
        const MatrixXd D = h.cwiseSqrt().asDiagonal();
        const MatrixXd H = D * R * D;
        const VectorXd cov = std::sqrt(hi) * (D * rho);
        const VectorXd expected = H.inverse() * cov;
        EXPECT_LE(max_rel_diff(compute_beta(h, R, rho, hi), expected), 1e-12);
    }
    VectorXd h1(1), r1(1);
    h1 << 0.004;
    r1 << 0.5;
    EXPECT_NEAR(compute_beta(h1, MatrixXd::Ones(1, 1), r1, 0.009)(0), 0.5 * std::sqrt(0.009 / 0.004), 1e-15);
}

TEST(Beta, SingularCorrelationIsPdViolation) {
    MatrixXd R = MatrixXd::Ones(2, 2);
    EXPECT_HDH_ERROR(compute_beta(VectorXd::Ones(2), R, VectorXd::Zero(2), 1.0), ErrorCode::PdViolation);
}

TEST(BetaPathTest, InterceptsCentreTheFactorModel) {
    const auto& f = fixture();
    const BetaPath& b = f.model.betas;
    ASSERT_EQ(b.betas.size(), 150u);
    for (std::size_t t = 0; t < 150; t += 13) {
        const VectorXd a = b.mu_assets - b.betas[t] * b.mu_factors;
        EXPECT_LE((b.alphas.row(static_cast<Eigen::Index>(t)).transpose() - a).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(OneStep, EqualsFilterRunOneMonthFurther) {
    const auto& f = fixture();
    const auto& panel = f.sim.panel;
    for (const std::size_t s : {150u, 163u, 199u}) {
        const auto si = static_cast<Eigen::Index>(s);
        const CovarianceForecast fc = forecast_one_step(f.model, panel.factor_returns_monthly.topRows(si),
                                                        panel.asset_returns_monthly.topRows(si), f.m.slice(0, s),
                                                        panel.dates_monthly[s]);
        EXPECT_EQ(fc.month, panel.dates_monthly[s]);
        const RealizedMeasures ext = f.m.slice(0, s + 1);
        const CoreFilteredState core = filter_core(f.model.core.params, ext, panel.factor_returns_monthly.topRows(si + 1));
        EXPECT_LE(max_rel_diff(fc.H_factor, core.H[s]), 1e-12);
        for (Eigen::Index i = 0; i < 3; ++i) {
            const AssetSeries series =
                make_asset_series(panel.asset_returns_monthly.topRows(si + 1), ext, static_cast<std::size_t>(i));
            const AssetFilteredState a = filter_asset(f.model.assets[static_cast<std::size_t>(i)].params, series, core);
            const VectorXd beta = compute_beta(core.h.row(si).transpose(), core.R[s], a.rho.row(si).transpose(), a.h(si));
            EXPECT_LE(max_rel_diff(fc.B_next.row(i).transpose(), beta), 1e-12);
        }
        const MatrixXd H = fc.B_next * fc.H_factor * fc.B_next.transpose() + f.model.residual.sigma;
        EXPECT_LE(max_rel_diff(fc.H_hat, H), 1e-14);
        EXPECT_EQ(max_asymmetry(fc.H_hat), 0.0);
        EXPECT_GT(min_eig(fc.H_hat), 0.0);
    }
}

TEST(Rolling, ScheduleAndDeterminism) {
    const auto& f = fixture();
    RollingOptions o;
    o.window = 180;
    o.refit_every = 8;
    o.model = f.options;
    const RollingResult a = rolling_forecasts(f.sim.panel, f.m, o);
    ASSERT_EQ(a.forecasts.size(), 20u);
    EXPECT_EQ(a.fits.size(), 3u);
    ASSERT_EQ(a.fit_months.size(), 3u);
    EXPECT_EQ(a.fit_months[1], f.sim.panel.dates_monthly[188]);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(a.forecasts[i].refit, i % 8 == 0);
        EXPECT_FALSE(a.forecasts[i].carried_forward);
        EXPECT_EQ(a.forecasts[i].month, f.sim.panel.dates_monthly[180 + i]);
        EXPECT_GT(min_eig(a.forecasts[i].H_hat), 0.0);
    }
    const RollingResult b = rolling_forecasts(f.sim.panel, f.m, o);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(a.forecasts[i].H_hat, b.forecasts[i].H_hat);
    }
}

TEST(Rolling, RejectsImpossibleSchedules) {
    const auto& f = fixture();
    RollingOptions o;
    o.window = 200;
    EXPECT_HDH_ERROR(rolling_forecasts(f.sim.panel, f.m, o), ErrorCode::Input);
    o.window = 150;
    o.refit_every = 0;
    EXPECT_HDH_ERROR(rolling_forecasts(f.sim.panel, f.m, o), ErrorCode::Input);
}
