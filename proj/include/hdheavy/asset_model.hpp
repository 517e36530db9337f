#pragma once

#include "hdheavy/common.hpp"
#include "hdheavy/core_model.hpp"
#include "hdheavy/realized.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace hdh {

inline constexpr double kCorrelationClamp = 1.0 - 1e-8;

/// Fourteen coefficients of one asset's conditional model plus its starting values.
struct AssetModelParams {
    double c_h = 0.0, a_h_pos = 0.0, a_h_neg = 0.0, b_h = 0.0;
    double c_m = 0.0, a_m_pos = 0.0, a_m_neg = 0.0, b_m = 0.0;
    double phi_R = 0.0, alpha_R = 0.0, beta_R = 0.0;
    double phi_P = 0.0, alpha_P = 0.0, beta_P = 0.0;
    double h_init = 1.0;
    double m_init = 1.0;
    VectorXd rho_init;
    VectorXd p_init;
    bool symmetric = false;

    static constexpr std::size_t parameter_count = 14;
    [[nodiscard]] std::size_t free_parameters() const { return symmetric ? 12 : 14; }
    [[nodiscard]] VarianceEquation variance_equation() const { return {c_h, a_h_pos, a_h_neg, b_h}; }
    [[nodiscard]] VarianceEquation realized_equation() const { return {c_m, a_m_pos, a_m_neg, b_m}; }
    void validate() const;
};

/// One asset's monthly inputs.
struct AssetSeries {
    std::string name;
    VectorXd returns;  // T
    VectorXd rv, rv_pos, rv_neg;  // T
    MatrixXd rc;  // T x K covariances with the factors
    MatrixXd rl;  // T x K correlations with the factors
    MatrixXd fisher_rl;  // atanh of the clamped rl
    std::size_t clamped = 0;

    [[nodiscard]] std::size_t months() const { return static_cast<std::size_t>(returns.size()); }
    [[nodiscard]] std::size_t factors() const { return static_cast<std::size_t>(rl.cols()); }
};

/// Extracts asset i. Realized correlations at +-1 are clamped before the Fisher map;
/// more than 1% clamped entries raise DataQuality.
[[nodiscard]] AssetSeries make_asset_series(const MatrixXd& monthly_asset_returns, const RealizedMeasures& measures,
                                            std::size_t asset);

struct AssetFilteredState {
    VectorXd h;
    VectorXd m;
    VectorXd u;
    MatrixXd rho;  // T x K
    MatrixXd p;  // T x K

    [[nodiscard]] std::size_t months() const { return static_cast<std::size_t>(h.size()); }
};

/// Throws Domain unless every |x| < 1.
[[nodiscard]] VectorXd fisher(const VectorXd& x);
[[nodiscard]] VectorXd fisher_inv(const VectorXd& y);

/// Empirical starting values: mean realized variance and mean realized correlation vector.
void set_asset_initial_values(AssetModelParams& params, const AssetSeries& series);

[[nodiscard]] VectorXd filter_asset_variance(const AssetModelParams& params, const AssetSeries& series);
[[nodiscard]] VectorXd filter_asset_realized_mean(const AssetModelParams& params, const AssetSeries& series);

/// (rho path, p path), each T x K, from the Fisher-scale recursions.
[[nodiscard]] std::pair<MatrixXd, MatrixXd> filter_correlation_vectors(const AssetModelParams& params,
                                                                       const AssetSeries& series);

/// Full asset state. Throws PdViolation when rho' R^{-1} rho or p' P^{-1} p reaches 1.
[[nodiscard]] AssetFilteredState filter_asset(const AssetModelParams& params, const AssetSeries& series,
                                              const CoreFilteredState& core);

/// Core quantities the asset likelihoods need, computed once per core fit.
struct CoreContext {
    MatrixSeq R_inv;
    MatrixXd g;  // T x K, R_t^{-1} u_t
    MatrixSeq P_inv;
    MatrixSeq RC_inv;
    std::vector<std::size_t> ridged_months;

    [[nodiscard]] std::size_t months() const { return R_inv.size(); }
};

[[nodiscard]] CoreContext make_core_context(const CoreFilteredState& core, const RealizedMeasures& measures);

/// -1/2 sum_t {log(h_t (1 - q_t)) + (u_t - rho_t' R_t^{-1} u^c_t)^2 / (1 - q_t)}, q_t = rho_t' R_t^{-1} rho_t.
[[nodiscard]] double llf_asset_conditional(const AssetModelParams& params, const AssetSeries& series,
                                           const CoreContext& core);

/// -1/2 sum_t {log(m_t (1 - s_t)) + (v_t - rc_t' RC_t^{-1} rc_t) / (m_t (1 - s_t))}, s_t = p_t' P_t^{-1} p_t.
[[nodiscard]] double llf_asset_realized(const AssetModelParams& params, const AssetSeries& series,
                                        const CoreContext& core);

/// v_t - rc_t' RC_t^{-1} rc_t for every month.
[[nodiscard]] VectorXd realized_residual_variance(const AssetSeries& series, const CoreContext& core);

struct AssetStep {
    double h = 0.0;
    double m = 0.0;
    VectorXd rho;
    VectorXd p;
};

[[nodiscard]] AssetStep asset_next(const AssetModelParams& params, const AssetFilteredState& state,
                                   const AssetSeries& series);

/// Joint correlation matrix [[R, rho], [rho', 1]].
[[nodiscard]] MatrixXd joint_correlation(const MatrixXd& R, const VectorXd& rho);

}  // namespace hdh
