#pragma once

#include "hdheavy/common.hpp"

#include <string_view>
#include <vector>

namespace hdh {

enum class ShrinkageMethod { Nonlinear, Linear };

[[nodiscard]] ShrinkageMethod parse_shrinkage_method(std::string_view text);
[[nodiscard]] std::string_view to_string(ShrinkageMethod method);

struct ResidualCovariance {
    MatrixXd sigma;
    VectorXd eigen_original;  // ascending
    VectorXd eigen_shrunk;    // paired with eigen_original
    std::size_t sample_size = 0;
    ShrinkageMethod method = ShrinkageMethod::Nonlinear;
};

/// Analytical nonlinear shrinkage of a sample covariance built from n_obs observations
/// (after demeaning). Eigenvectors are kept; eigenvalues pass through the kernel
/// estimate of the spectral density and its Hilbert transform, with bandwidth
/// n_obs^{-1/3} scaled by each eigenvalue. The shrunk spectrum is rescaled to the
/// sample trace. Rank-deficient inputs use the singular branch, which needs n_obs >= 12.
[[nodiscard]] ResidualCovariance nonlinear_shrink(const MatrixXd& sample_cov, std::size_t n_obs);

/// Ledoit-Wolf linear shrinkage towards a scaled identity, from the T x N data.
[[nodiscard]] ResidualCovariance linear_shrink(const MatrixXd& data);

/// Demeaned sample covariance (divisor T - 1) of the rows of `data`.
[[nodiscard]] MatrixXd sample_covariance(const MatrixXd& data);

/// Shrinks the covariance of T x N residuals with the chosen method.
[[nodiscard]] ResidualCovariance shrink_residuals(const MatrixXd& residuals, ShrinkageMethod method);

/// eps_t = r_t - alpha_t - B_t r^c_t for T x N returns, T x K factor returns, T betas (N x K)
/// and T x N intercepts.
[[nodiscard]] MatrixXd compute_residuals(const MatrixXd& asset_returns, const MatrixXd& factor_returns,
                                         const std::vector<MatrixXd>& betas, const MatrixXd& alphas);

}  // namespace hdh
