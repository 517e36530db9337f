#include "hdheavy/asset_model.hpp"

#include "hdheavy/core_detail.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <string>

namespace hdh {

void AssetModelParams::validate() const {
    const auto nonneg = [](double x) { return x >= 0.0 && std::isfinite(x); };
    if (!(c_h > 0.0) || !(c_m > 0.0)) {
        fail(ErrorCode::Input, "asset intercepts c_h and c_m must be positive");
    }
    for (double x : {a_h_pos, a_h_neg, b_h, a_m_pos, a_m_neg, b_m, phi_R, alpha_R, beta_R, phi_P, alpha_P, beta_P}) {
        if (!nonneg(x)) {
            fail(ErrorCode::Input, "asset coefficients must be finite and non-negative");
        }
    }
    if (b_h + std::max(a_h_pos, a_h_neg) >= 1.0 || beta_R >= 1.0 || beta_P >= 1.0) {
        fail(ErrorCode::Input, "asset persistence exceeds its bound");
    }
    if (!(h_init > 0.0) || !(m_init > 0.0)) {
        fail(ErrorCode::Input, "asset starting variances must be positive");
    }
    if (rho_init.size() != p_init.size() || (rho_init.array().abs() >= 1.0).any() ||
        (p_init.array().abs() >= 1.0).any()) {
        fail(ErrorCode::Input, "asset starting correlations must lie in (-1, 1)");
    }
}

AssetSeries make_asset_series(const MatrixXd& monthly_asset_returns, const RealizedMeasures& measures,
                              std::size_t asset) {
    if (asset >= measures.assets() || monthly_asset_returns.cols() != static_cast<Eigen::Index>(measures.assets()) ||
        monthly_asset_returns.rows() != static_cast<Eigen::Index>(measures.months_count())) {
        fail(ErrorCode::Dimension, "make_asset_series: asset index or dimensions out of range");
    }
    const auto i = static_cast<Eigen::Index>(asset);
    AssetSeries s;
    s.name = measures.asset_names[asset];
    s.returns = monthly_asset_returns.col(i);
    s.rv = measures.rv_assets.col(i);
    s.rv_pos = measures.semivar_pos_assets.col(i);
    s.rv_neg = measures.semivar_neg_assets.col(i);
    s.rc = measures.rc_asset_factor[asset];
    s.rl = measures.rl_asset_factor[asset];
    s.fisher_rl.resize(s.rl.rows(), s.rl.cols());
    for (Eigen::Index t = 0; t < s.rl.rows(); ++t) {
        for (Eigen::Index k = 0; k < s.rl.cols(); ++k) {
            double x = s.rl(t, k);
            if (std::abs(x) >= kCorrelationClamp) {
                x = std::copysign(kCorrelationClamp, x);
                ++s.clamped;
            }
            s.fisher_rl(t, k) = std::atanh(x);
        }
    }
    const double share = static_cast<double>(s.clamped) / static_cast<double>(std::max<Eigen::Index>(1, s.rl.size()));
    if (share > 0.01) {
        fail(ErrorCode::DataQuality, "asset " + s.name + ": " + std::to_string(s.clamped) +
                                         " realized correlations at +-1 (more than 1% of observations)");
    }
    if (s.clamped > 0) {
        spdlog::warn("asset {}: clamped {} realized correlations at +-1", s.name, s.clamped);
    }
    return s;
}

VectorXd fisher(const VectorXd& x) {
    if ((x.array().abs() >= 1.0).any() || !x.allFinite()) {
        fail(ErrorCode::Domain, "fisher: argument outside (-1, 1)");
    }
    return x.array().atanh();
}

VectorXd fisher_inv(const VectorXd& y) {
    return y.array().tanh();
}

void set_asset_initial_values(AssetModelParams& params, const AssetSeries& series) {
    params.h_init = series.rv.mean();
    params.m_init = params.h_init;
    VectorXd r = series.rl.colwise().mean().transpose();
    r = r.cwiseMax(-kCorrelationClamp).cwiseMin(kCorrelationClamp);
    params.rho_init = r;
    params.p_init = r;
}

VectorXd filter_asset_variance(const AssetModelParams& params, const AssetSeries& series) {
    VectorXd h;
    if (!detail::variance_path(params.variance_equation(), params.h_init, series.rv, series.returns, h)) {
        fail(ErrorCode::ParameterExplosion, "asset " + series.name + ": conditional variance not finite/positive");
    }
    return h;
}

VectorXd filter_asset_realized_mean(const AssetModelParams& params, const AssetSeries& series) {
    VectorXd m;
    if (!detail::realized_mean_path(params.realized_equation(), params.m_init, series.rv_pos, series.rv_neg, m)) {
        fail(ErrorCode::ParameterExplosion, "asset " + series.name + ": realized-variance mean not finite/positive");
    }
    return m;
}

namespace {

MatrixXd fisher_path(double phi, double alpha, double beta, const VectorXd& init, const MatrixXd& fisher_rl) {
    const auto T = fisher_rl.rows();
    const auto K = fisher_rl.cols();
    MatrixXd out(T, K);
    if (init.size() != K) {
        fail(ErrorCode::Dimension, "correlation-vector start has the wrong length");
    }
    VectorXd f = init.array().atanh();
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            for (Eigen::Index k = 0; k < K; ++k) {
                f(k) = phi + alpha * fisher_rl(t - 1, k) + beta * f(k);
            }
        }
        out.row(t) = f.array().tanh().transpose();
    }
    return out;
}

double quadratic(const MatrixXd& A, const double* x, Eigen::Index K) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
        double row = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) {
            row += A(i, j) * x[i];
        }
        s += row * x[j];
    }
    return s;
}

MatrixXd inverse_pd(const MatrixXd& m) {
    return m.llt().solve(MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

std::pair<MatrixXd, MatrixXd> filter_correlation_vectors(const AssetModelParams& params, const AssetSeries& series) {
    return {fisher_path(params.phi_R, params.alpha_R, params.beta_R, params.rho_init, series.fisher_rl),
            fisher_path(params.phi_P, params.alpha_P, params.beta_P, params.p_init, series.fisher_rl)};
}

AssetFilteredState filter_asset(const AssetModelParams& params, const AssetSeries& series,
                                const CoreFilteredState& core) {
    if (core.months() != series.months() || static_cast<std::size_t>(core.h.cols()) != series.factors()) {
        fail(ErrorCode::Dimension, "filter_asset: core state and asset series disagree on T or K");
    }
    AssetFilteredState s;
    s.h = filter_asset_variance(params, series);
    s.m = filter_asset_realized_mean(params, series);
    s.u = series.returns.array() / s.h.array().sqrt();
    auto [rho, p] = filter_correlation_vectors(params, series);
    s.rho = std::move(rho);
    s.p = std::move(p);
    for (std::size_t t = 0; t < series.months(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        const VectorXd r = s.rho.row(ti).transpose();
        const VectorXd pv = s.p.row(ti).transpose();
        const double q = r.dot(core.R[t].llt().solve(r));
        const double qp = pv.dot(core.P[t].llt().solve(pv));
        if (!(1.0 - q > kPdTolerance) || !(1.0 - qp > kPdTolerance)) {
            fail(ErrorCode::PdViolation, "asset " + series.name + ": joint correlation not positive definite at t = " +
                                             std::to_string(t));
        }
    }
    return s;
}

CoreContext make_core_context(const CoreFilteredState& core, const RealizedMeasures& measures) {
    CoreContext c;
    const std::size_t T = core.months();
    const auto K = core.h.cols();
    c.g.resize(static_cast<Eigen::Index>(T), K);
    c.R_inv.reserve(T);
    c.P_inv.reserve(T);
    c.RC_inv.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        c.R_inv.push_back(inverse_pd(core.R[t]));
        c.g.row(ti) = (c.R_inv.back() * core.u.row(ti).transpose()).transpose();
        c.P_inv.push_back(inverse_pd(core.P[t]));
        MatrixXd rc = measures.rc_factors[t];
        MatrixXd chol = rc;
        if (!cholesky_in_place(chol) || !is_pd(rc)) {
            rc.diagonal().array() += 1e-10 * rc.trace() / static_cast<double>(K);
            c.ridged_months.push_back(t);
            spdlog::warn("factor realized covariance singular in month {}; ridge added", measures.months[t].str());
        }
        c.RC_inv.push_back(inverse_pd(rc));
    }
    return c;
}

VectorXd realized_residual_variance(const AssetSeries& series, const CoreContext& core) {
    const auto T = static_cast<Eigen::Index>(series.months());
    const auto K = static_cast<Eigen::Index>(series.factors());
    VectorXd s(T);
    VectorXd rc(K);
    for (Eigen::Index t = 0; t < T; ++t) {
        rc = series.rc.row(t).transpose();
        s(t) = series.rv(t) - quadratic(core.RC_inv[static_cast<std::size_t>(t)], rc.data(), K);
    }
    return s;
}

double llf_asset_conditional(const AssetModelParams& params, const AssetSeries& series, const CoreContext& core) {
    const auto T = static_cast<Eigen::Index>(series.months());
    const auto K = static_cast<Eigen::Index>(series.factors());
    if (core.months() != series.months()) {
        fail(ErrorCode::Dimension, "llf_asset_conditional: core context and series disagree on T");
    }
    const VarianceEquation eq = params.variance_equation();
    VectorXd f(K);
    VectorXd rho(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double x = params.rho_init(k);
        if (!(std::abs(x) < 1.0)) {
            return kNegInf;
        }
        f(k) = std::atanh(x);
    }
    double h = params.h_init;
    double s = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            h = variance_step(eq, series.rv(t - 1), series.returns(t - 1), h);
            for (Eigen::Index k = 0; k < K; ++k) {
                f(k) = params.phi_R + params.alpha_R * series.fisher_rl(t - 1, k) + params.beta_R * f(k);
            }
        }
        if (!(h > 0.0) || !std::isfinite(h)) {
            return kNegInf;
        }
        for (Eigen::Index k = 0; k < K; ++k) {
            rho(k) = std::tanh(f(k));
        }
        const double q = quadratic(core.R_inv[static_cast<std::size_t>(t)], rho.data(), K);
        const double one_minus_q = 1.0 - q;
        if (!(one_minus_q > kPdTolerance)) {
            return kNegInf;
        }
        double mean = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            mean += rho(k) * core.g(t, k);
        }
        const double u = series.returns(t) / std::sqrt(h);
        const double e = u - mean;
        s += std::log(h * one_minus_q) + e * e / one_minus_q;
    }
    return std::isfinite(s) ? -0.5 * s : kNegInf;
}

double llf_asset_realized(const AssetModelParams& params, const AssetSeries& series, const CoreContext& core) {
    const VectorXd resid = realized_residual_variance(series, core);
    const auto T = static_cast<Eigen::Index>(series.months());
    const auto K = static_cast<Eigen::Index>(series.factors());
    const VarianceEquation eq = params.realized_equation();
    VectorXd f(K);
    VectorXd p(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double x = params.p_init(k);
        if (!(std::abs(x) < 1.0)) {
            return kNegInf;
        }
        f(k) = std::atanh(x);
    }
    double m = params.m_init;
    double s = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            m = realized_mean_step(eq, series.rv_pos(t - 1), series.rv_neg(t - 1), m);
            for (Eigen::Index k = 0; k < K; ++k) {
                f(k) = params.phi_P + params.alpha_P * series.fisher_rl(t - 1, k) + params.beta_P * f(k);
            }
        }
        if (!(m > 0.0) || !std::isfinite(m)) {
            return kNegInf;
        }
        for (Eigen::Index k = 0; k < K; ++k) {
            p(k) = std::tanh(f(k));
        }
        const double one_minus_q = 1.0 - quadratic(core.P_inv[static_cast<std::size_t>(t)], p.data(), K);
        if (!(one_minus_q > kPdTolerance)) {
            return kNegInf;
        }
        const double scale = m * one_minus_q;
        s += std::log(scale) + resid(t) / scale;
    }
    return std::isfinite(s) ? -0.5 * s : kNegInf;
}

AssetStep asset_next(const AssetModelParams& params, const AssetFilteredState& state, const AssetSeries& series) {
    const auto last = static_cast<Eigen::Index>(state.months()) - 1;
    if (last < 0 || static_cast<Eigen::Index>(series.months()) != last + 1) {
        fail(ErrorCode::Dimension, "asset_next: state and series disagree on T");
    }
    AssetStep step;
    step.h = variance_step(params.variance_equation(), series.rv(last), series.returns(last), state.h(last));
    step.m = realized_mean_step(params.realized_equation(), series.rv_pos(last), series.rv_neg(last), state.m(last));
    if (!(step.h > 0.0) || !std::isfinite(step.h) || !(step.m > 0.0) || !std::isfinite(step.m)) {
        fail(ErrorCode::ParameterExplosion, "asset " + series.name + ": one-step variance not finite/positive");
    }
    const VectorXd frl = series.fisher_rl.row(last).transpose();
    const VectorXd frho = state.rho.row(last).transpose().array().atanh();
    const VectorXd fp = state.p.row(last).transpose().array().atanh();
    step.rho = (params.phi_R + params.alpha_R * frl.array() + params.beta_R * frho.array()).tanh();
    step.p = (params.phi_P + params.alpha_P * frl.array() + params.beta_P * fp.array()).tanh();
    return step;
}

MatrixXd joint_correlation(const MatrixXd& R, const VectorXd& rho) {
    const auto K = R.rows();
    MatrixXd J(K + 1, K + 1);
    J.topLeftCorner(K, K) = R;
    J.topRightCorner(K, 1) = rho;
    J.bottomLeftCorner(1, K) = rho.transpose();
    J(K, K) = 1.0;
    return J;
}

}  // namespace hdh
