#include "hdheavy/shrinkage.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace hdh {

ShrinkageMethod parse_shrinkage_method(std::string_view text) {
    if (text == "nonlinear") {
        return ShrinkageMethod::Nonlinear;
    }
    if (text == "linear") {
        return ShrinkageMethod::Linear;
    }
    fail(ErrorCode::Config, "unknown shrinkage method '" + std::string(text) + "' (expected nonlinear or linear)");
}

std::string_view to_string(ShrinkageMethod method) {
    return method == ShrinkageMethod::Nonlinear ? "nonlinear" : "linear";
}

MatrixXd sample_covariance(const MatrixXd& data) {
    if (data.rows() < 2) {
        fail(ErrorCode::Input, "sample covariance needs at least two observations");
    }
    const MatrixXd centered = data.rowwise() - data.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
}

ResidualCovariance nonlinear_shrink(const MatrixXd& sample_cov, std::size_t n_obs) {
    const auto p = sample_cov.rows();
    if (p < 2 || sample_cov.cols() != p) {
        fail(ErrorCode::Dimension, "nonlinear_shrink: need a square matrix with N >= 2");
    }
    if (n_obs <= 2) {
        fail(ErrorCode::Input, "nonlinear_shrink: need more than two observations");
    }
    if (max_asymmetry(sample_cov) > 1e-10 * (1.0 + sample_cov.cwiseAbs().maxCoeff())) {
        fail(ErrorCode::Input, "nonlinear_shrink: sample covariance is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (sample_cov + sample_cov.transpose()));
    const VectorXd lambda_all = eig.eigenvalues().cwiseMax(0.0);
    const MatrixXd& U = eig.eigenvectors();
    const double n = static_cast<double>(n_obs);
    const double top = lambda_all.maxCoeff();
    if (!(top > 0.0)) {
        fail(ErrorCode::Input, "nonlinear_shrink: sample covariance is zero");
    }

    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
        rank += lambda_all(i) > 1e-12 * top ? 1 : 0;
    }
    rank = std::min<Eigen::Index>(rank, static_cast<Eigen::Index>(n_obs));
    const Eigen::Index zeros = p - rank;
    const VectorXd lambda = lambda_all.tail(rank);

    const double h = std::pow(n, -1.0 / 3.0);
    const double sqrt5 = std::sqrt(5.0);
    const double pi = std::numbers::pi;
    VectorXd f_tilde = VectorXd::Zero(rank);
    VectorXd hilbert = VectorXd::Zero(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
        for (Eigen::Index j = 0; j < rank; ++j) {
            const double bw = h * lambda(j);
            const double x = (lambda(i) - lambda(j)) / bw;
            f_tilde(i) += std::max(1.0 - x * x / 5.0, 0.0) / bw;
            double hf = -3.0 / 10.0 / pi * x;
            if (std::abs(x) != sqrt5) {
                hf += 3.0 / 4.0 / sqrt5 / pi * (1.0 - x * x / 5.0) * std::log(std::abs((sqrt5 - x) / (sqrt5 + x)));
            }
            hilbert(i) += hf / bw;
        }
    }
    f_tilde *= 3.0 / 4.0 / sqrt5 / static_cast<double>(rank);
    hilbert /= static_cast<double>(rank);

    VectorXd d(p);
    if (zeros == 0) {
        const double c = static_cast<double>(p) / n;
        for (Eigen::Index i = 0; i < p; ++i) {
            const double a = pi * c * lambda(i) * f_tilde(i);
            const double b = 1.0 - c - pi * c * lambda(i) * hilbert(i);
            d(i) = lambda(i) / (a * a + b * b);
        }
    } else {
        if (sqrt5 * h >= 1.0) {
            fail(ErrorCode::Input, "nonlinear_shrink: a rank-deficient sample covariance needs at least 12 observations");
        }
        const double hilbert0 = (1.0 / pi) *
                                (3.0 / 10.0 / (h * h) + 3.0 / 4.0 / sqrt5 / h * (1.0 - 1.0 / 5.0 / (h * h)) *
                                                            std::log((1.0 + sqrt5 * h) / (1.0 - sqrt5 * h))) *
                                lambda.cwiseInverse().mean();
        const double d0 = 1.0 / (pi * static_cast<double>(zeros) / static_cast<double>(rank) * hilbert0);
        d.head(zeros).setConstant(d0);
        for (Eigen::Index i = 0; i < rank; ++i) {
            d(zeros + i) = lambda(i) / (pi * pi * lambda(i) * lambda(i) * (f_tilde(i) * f_tilde(i) + hilbert(i) * hilbert(i)));
        }
    }
    if (!d.allFinite() || (d.array() <= 0.0).any()) {
        fail(ErrorCode::Solver, "nonlinear_shrink: shrunk spectrum is not positive");
    }
    d *= lambda_all.sum() / d.sum();

    ResidualCovariance out;
    out.sigma = U * d.asDiagonal() * U.transpose();
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
    out.eigen_original = lambda_all;
    out.eigen_shrunk = d;
    out.sample_size = n_obs;
    out.method = ShrinkageMethod::Nonlinear;
    return out;
}

ResidualCovariance linear_shrink(const MatrixXd& data) {
    const auto n = data.rows();
    const auto p = data.cols();
    if (n < 3 || p < 1) {
        fail(ErrorCode::Input, "linear_shrink: need more than two observations");
    }
    const MatrixXd X = data.rowwise() - data.colwise().mean();
    const MatrixXd S = (X.transpose() * X) / static_cast<double>(n);
    const double mu = S.trace() / static_cast<double>(p);
    const MatrixXd target = mu * MatrixXd::Identity(p, p);
    const double d2 = (S - target).squaredNorm() / static_cast<double>(p);
    double b2_bar = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const VectorXd x = X.row(t).transpose();
        b2_bar += (x * x.transpose() - S).squaredNorm();
    }
    b2_bar /= static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(p);
    const double b2 = std::min(b2_bar, d2);
    const double weight = d2 > 0.0 ? b2 / d2 : 1.0;

    ResidualCovariance out;
    out.sigma = weight * target + (1.0 - weight) * S;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> e0(S);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> e1(out.sigma, Eigen::EigenvaluesOnly);
    out.eigen_original = e0.eigenvalues();
    out.eigen_shrunk = e1.eigenvalues();
    out.sample_size = static_cast<std::size_t>(n);
    out.method = ShrinkageMethod::Linear;
    return out;
}

ResidualCovariance shrink_residuals(const MatrixXd& residuals, ShrinkageMethod method) {
    if (method == ShrinkageMethod::Linear) {
        return linear_shrink(residuals);
    }
    if (residuals.rows() < 4) {
        fail(ErrorCode::Input, "shrink_residuals: need at least four residual observations");
    }
    if (residuals.cols() == 1) {
        ResidualCovariance out;
        out.sigma = sample_covariance(residuals);
        out.eigen_original = out.sigma.diagonal();
        out.eigen_shrunk = out.eigen_original;
        out.sample_size = static_cast<std::size_t>(residuals.rows()) - 1;
        return out;
    }
    return nonlinear_shrink(sample_covariance(residuals), static_cast<std::size_t>(residuals.rows()) - 1);
}

MatrixXd compute_residuals(const MatrixXd& asset_returns, const MatrixXd& factor_returns,
                           const std::vector<MatrixXd>& betas, const MatrixXd& alphas) {
    const auto T = asset_returns.rows();
    if (factor_returns.rows() != T || alphas.rows() != T || alphas.cols() != asset_returns.cols() ||
        static_cast<Eigen::Index>(betas.size()) != T) {
        fail(ErrorCode::Dimension, "compute_residuals: inputs disagree on T or N");
    }
    MatrixXd eps(T, asset_returns.cols());
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& B = betas[static_cast<std::size_t>(t)];
        if (B.rows() != asset_returns.cols() || B.cols() != factor_returns.cols()) {
            fail(ErrorCode::Dimension, "compute_residuals: beta matrix has the wrong shape");
        }
        eps.row(t) = asset_returns.row(t) - alphas.row(t) - (B * factor_returns.row(t).transpose()).transpose();
    }
    return eps;
}

}  // namespace hdh
