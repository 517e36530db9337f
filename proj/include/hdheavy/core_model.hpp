#pragma once

#include "hdheavy/common.hpp"
#include "hdheavy/realized.hpp"

#include <cstddef>
#include <utility>

namespace hdh {

/// Coefficients of one factor's variance-type recursion:
///   x_t = w + a_pos * z_pos_{t-1} + a_neg * z_neg_{t-1} + b * x_{t-1}.
struct VarianceEquation {
    double w = 0.0;
    double a_pos = 0.0;
    double a_neg = 0.0;
    double b = 0.0;
};

/// Conditional variance step: the realized variance enters through the leg selected by
/// the sign of the previous monthly return (zero counts as negative).
[[nodiscard]] inline double variance_step(const VarianceEquation& eq, double rv_prev, double return_prev,
                                          double h_prev) {
    return eq.w + (return_prev > 0.0 ? eq.a_pos : eq.a_neg) * rv_prev + eq.b * h_prev;
}

/// Realized-variance mean step driven by the two semivariance legs.
[[nodiscard]] inline double realized_mean_step(const VarianceEquation& eq, double pos_prev, double neg_prev,
                                               double m_prev) {
    return eq.w + eq.a_pos * pos_prev + eq.a_neg * neg_prev + eq.b * m_prev;
}

/// Parameters of the factor (core) model: K variance equations for the returns, K for the
/// realized variances, and two scalar correlation pairs with targeting matrices.
///
/// Only the 8K + 4 coefficients count as parameters; the targets R_bar, P_bar and the
/// starting values are moments computed from the data.
struct CoreModelParams {
    VectorXd w_h, a_h_pos, a_h_neg, b_h;
    double alpha_R = 0.0;
    double beta_R = 0.0;
    VectorXd w_m, a_m_pos, a_m_neg, b_m;
    double alpha_P = 0.0;
    double beta_P = 0.0;
    MatrixXd R_bar;
    MatrixXd P_bar;
    VectorXd h_init;
    VectorXd m_init;
    bool symmetric = false;

    [[nodiscard]] std::size_t factors() const { return static_cast<std::size_t>(w_h.size()); }
    [[nodiscard]] VarianceEquation variance_equation(std::size_t k) const;
    [[nodiscard]] VarianceEquation realized_equation(std::size_t k) const;

    [[nodiscard]] static constexpr std::size_t parameter_count(std::size_t K) { return 8 * K + 4; }
    /// Coefficients actually estimated: symmetric variants tie a_pos to a_neg and the
    /// correlation pairs are fixed at zero when K = 1.
    [[nodiscard]] std::size_t free_parameters() const;

    /// Throws Error(Input) on any box or pair-rule violation.
    void validate() const;
};

struct CoreFilteredState {
    MatrixXd h;  // T x K conditional variances
    MatrixXd u;  // T x K degarched returns
    MatrixSeq R;  // conditional correlations
    MatrixXd m;  // T x K conditional means of realized variances
    MatrixSeq P;  // conditional means of realized correlations
    MatrixSeq H;  // conditional covariances diag(h)^1/2 R diag(h)^1/2

    [[nodiscard]] std::size_t months() const { return static_cast<std::size_t>(h.rows()); }
};

/// h_1 = m_1 = time-series mean of the realized variances.
[[nodiscard]] VectorXd empirical_variance_init(const RealizedMeasures& measures);

/// Empirical correlation of degarched returns: mean of u u' scaled to unit diagonal.
[[nodiscard]] MatrixXd correlation_target(const MatrixXd& u);

/// Time-series mean of the realized correlation matrices.
[[nodiscard]] MatrixXd realized_correlation_target(const MatrixSeq& rl);

/// Conditional variance path, T x K. Throws ParameterExplosion on non-finite or
/// non-positive values.
[[nodiscard]] MatrixXd filter_variances(const CoreModelParams& params, const RealizedMeasures& measures,
                                        const MatrixXd& monthly_factor_returns);

/// r_t / sqrt(h_t) elementwise.
[[nodiscard]] MatrixXd degarch(const MatrixXd& returns, const MatrixXd& h);

/// R_t = (1 - beta) R_bar - alpha P_bar + alpha RL_{t-1} + beta R_{t-1}, R_1 = R_bar.
/// Throws PdViolation when some R_t has minimum eigenvalue <= kPdTolerance.
[[nodiscard]] MatrixSeq filter_correlations(const CoreModelParams& params, const RealizedMeasures& measures);

/// Conditional means of realized variances (T x K) and realized correlations.
[[nodiscard]] std::pair<MatrixXd, MatrixSeq> filter_realized_means(const CoreModelParams& params,
                                                                   const RealizedMeasures& measures);

[[nodiscard]] CoreFilteredState filter_core(const CoreModelParams& params, const RealizedMeasures& measures,
                                            const MatrixXd& monthly_factor_returns);

/// Next-month quantities computed from the last filtered month and that month's data.
struct CoreStep {
    VectorXd h;
    MatrixXd R;
    VectorXd m;
    MatrixXd P;
    MatrixXd H;
};

[[nodiscard]] CoreStep core_next(const CoreModelParams& params, const CoreFilteredState& state,
                                 const RealizedMeasures& measures, const MatrixXd& monthly_factor_returns);

// Quasi log-likelihoods. Each returns -inf at infeasible parameter points.

/// Gaussian variance QML: -1/2 sum_t sum_k (log h_tk + r_tk^2 / h_tk).
[[nodiscard]] double llf_variances(const CoreModelParams& params, const RealizedMeasures& measures,
                                   const MatrixXd& monthly_factor_returns);

/// One factor's share of llf_variances.
[[nodiscard]] double llf_variance_factor(const VarianceEquation& eq, double h_init, const VectorXd& rv,
                                         const VectorXd& returns);

/// -1/2 sum_t (log|R_t| + u_t' R_t^{-1} u_t) with R_t from the correlation recursion.
[[nodiscard]] double llf_correlations(const CoreModelParams& params, const RealizedMeasures& measures,
                                      const MatrixXd& u_hat);

/// Wishart (nu = 1) variance part: -1/2 sum_t sum_k (log m_tk + RC_t,kk / m_tk).
[[nodiscard]] double llf_realized_variances(const CoreModelParams& params, const RealizedMeasures& measures);

[[nodiscard]] double llf_realized_variance_factor(const VarianceEquation& eq, double m_init, const VectorXd& rv,
                                                  const VectorXd& pos, const VectorXd& neg);

/// Wishart correlation part: -1/2 sum_t (log|P_t| + tr[(P_t^{-1} - I) L^{-1} RC_t L^{-1}]),
/// L = diag(m_hat_t)^{1/2}.
[[nodiscard]] double llf_realized_correlations(const CoreModelParams& params, const RealizedMeasures& measures,
                                               const MatrixXd& m_hat);

}  // namespace hdh
