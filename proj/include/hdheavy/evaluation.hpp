#pragma once

#include "hdheavy/common.hpp"

#include <string_view>

namespace hdh {

enum class CovarianceProxy { OuterProduct, RealizedCovariance };

[[nodiscard]] CovarianceProxy parse_proxy(std::string_view text);
[[nodiscard]] std::string_view to_string(CovarianceProxy proxy);

/// Sum of squared differences over the lower triangle including the diagonal.
[[nodiscard]] double loss_ed(const MatrixXd& C, const MatrixXd& H);

/// Squared Frobenius norm of C - H.
[[nodiscard]] double loss_fn(const MatrixXd& C, const MatrixXd& H);

/// H^{-1} 1 / (1' H^{-1} 1).
[[nodiscard]] VectorXd gmvp_weights(const MatrixXd& H);

/// Minimum-variance weights on the unit simplex. Exhaustive support enumeration for
/// N <= 12, projected gradient followed by an active-set polish otherwise.
[[nodiscard]] VectorXd gmvp_weights_long_only(const MatrixXd& H);

/// Projected gradient on the simplex, then an exact active-set polish.
[[nodiscard]] VectorXd long_only_active_set(const MatrixXd& H);

/// Best feasible support among all 2^N - 1 candidates.
[[nodiscard]] VectorXd long_only_enumeration(const MatrixXd& H);

/// Maximum KKT violation of w as a minimiser of w'Hw on the simplex.
[[nodiscard]] double long_only_kkt_violation(const MatrixXd& H, const VectorXd& w);

inline constexpr double kMonthsPerYear = 12.0;

struct PortfolioSummary {
    double ar = 0.0;  // annualised mean return
    double sd = 0.0;  // annualised standard deviation
    double ir = 0.0;  // ar / sd, NaN when sd = 0
    double to = 0.0;  // mean turnover
    double sp = 0.0;  // mean share of short positions
};

struct PortfolioTrack {
    MatrixXd weights;  // T x N, chosen before each month
    VectorXd returns;  // T
    VectorXd turnover;
    VectorXd short_positions;  // count per month
    PortfolioSummary summary;
};

/// Realised portfolio returns w_t' r_t and diagnostics. Turnover adjusts the previous
/// weights for drift: sum_i |w_it - w_i,t-1 (1 + r_i,t-1) / (1 + r^p_t-1)|, and equals
/// sum_i |w_i1| in the first month.
[[nodiscard]] PortfolioTrack portfolio_track(const MatrixXd& weights, const MatrixXd& realized_returns);

/// U(r) = 1 + r - gamma / (2 (1 + gamma)) (1 + r)^2.
[[nodiscard]] double quadratic_utility(double r, double gamma);

/// Delta with sum U(r1) = sum U(r2 - Delta), by bisection on the branch where the utility
/// of r2 - Delta decreases in Delta. Positive values mean the investor would pay to switch
/// from the first strategy to the second.
[[nodiscard]] double utility_fee(const VectorXd& r1, const VectorXd& r2, double gamma);

inline constexpr double kBasisPoints = 1e4;

}  // namespace hdh
