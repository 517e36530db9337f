#include "hdheavy/core_model.hpp"

#include "hdheavy/core_detail.hpp"

#include <cmath>
#include <string>

namespace hdh {

VarianceEquation CoreModelParams::variance_equation(std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    return {w_h(i), a_h_pos(i), a_h_neg(i), b_h(i)};
}

VarianceEquation CoreModelParams::realized_equation(std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    return {w_m(i), a_m_pos(i), a_m_neg(i), b_m(i)};
}

std::size_t CoreModelParams::free_parameters() const {
    const std::size_t K = factors();
    std::size_t n = symmetric ? 6 * K : 8 * K;
    if (K > 1) {
        n += 4;
    }
    return n;
}

void CoreModelParams::validate() const {
    const auto K = w_h.size();
    const auto check_len = [&](const VectorXd& v, const char* name) {
        if (v.size() != K) {
            fail(ErrorCode::Dimension, std::string("core parameter '") + name + "' has the wrong length");
        }
    };
    check_len(a_h_pos, "a_h_pos");
    check_len(a_h_neg, "a_h_neg");
    check_len(b_h, "b_h");
    check_len(w_m, "w_m");
    check_len(a_m_pos, "a_m_pos");
    check_len(a_m_neg, "a_m_neg");
    check_len(b_m, "b_m");
    check_len(h_init, "h_init");
    check_len(m_init, "m_init");
    if (R_bar.rows() != K || R_bar.cols() != K || P_bar.rows() != K || P_bar.cols() != K) {
        fail(ErrorCode::Dimension, "targeting matrices must be K x K");
    }
    const auto in_unit = [](double x) { return x >= 0.0 && x < 1.0; };
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!(w_h(k) > 0.0) || !(w_m(k) > 0.0)) {
            fail(ErrorCode::Input, "intercepts w_h and w_m must be positive (factor " + std::to_string(k) + ")");
        }
        if (!in_unit(a_h_pos(k)) || !in_unit(a_h_neg(k)) || !in_unit(b_h(k)) || !in_unit(a_m_pos(k)) ||
            !in_unit(a_m_neg(k)) || !in_unit(b_m(k))) {
            fail(ErrorCode::Input, "variance coefficients must lie in [0, 1) (factor " + std::to_string(k) + ")");
        }
        if (!(h_init(k) > 0.0) || !(m_init(k) > 0.0)) {
            fail(ErrorCode::Input, "starting variances must be positive");
        }
    }
    if (alpha_R < 0.0 || beta_R < 0.0 || beta_R >= 1.0 || (alpha_R == 0.0 && beta_R != 0.0)) {
        fail(ErrorCode::Input, "correlation pair (alpha_R, beta_R) violates its constraint set");
    }
    if (alpha_P < 0.0 || beta_P < 0.0 || alpha_P + beta_P >= 1.0 || (alpha_P == 0.0 && beta_P != 0.0)) {
        fail(ErrorCode::Input, "correlation pair (alpha_P, beta_P) violates its constraint set");
    }
    for (const MatrixXd* m : {&R_bar, &P_bar}) {
        if (max_asymmetry(*m) > 1e-12 || ((m->diagonal().array() - 1.0).abs() > 1e-12).any()) {
            fail(ErrorCode::Input, "targeting matrices must be symmetric with unit diagonal");
        }
    }
}

VectorXd empirical_variance_init(const RealizedMeasures& measures) {
    return measures.rv_factors.colwise().mean().transpose();
}

MatrixXd correlation_target(const MatrixXd& u) {
    const MatrixXd second_moment = (u.transpose() * u) / static_cast<double>(u.rows());
    return to_correlation(second_moment);
}

MatrixXd realized_correlation_target(const MatrixSeq& rl) {
    MatrixXd sum = MatrixXd::Zero(rl.front().rows(), rl.front().cols());
    for (const auto& m : rl) {
        sum += m;
    }
    MatrixXd out = sum / static_cast<double>(rl.size());
    out.diagonal().setOnes();
    return out;
}

namespace detail {

bool variance_path(const VarianceEquation& eq, double init, const VectorXd& driver, const VectorXd& sign,
                   VectorXd& out) {
    const auto T = driver.size();
    out.resize(T);
    double h = init;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            h = variance_step(eq, driver(t - 1), sign(t - 1), h);
        }
        if (!(h > 0.0) || !std::isfinite(h)) {
            return false;
        }
        out(t) = h;
    }
    return true;
}

bool realized_mean_path(const VarianceEquation& eq, double init, const VectorXd& pos, const VectorXd& neg,
                        VectorXd& out) {
    const auto T = pos.size();
    out.resize(T);
    double m = init;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            m = realized_mean_step(eq, pos(t - 1), neg(t - 1), m);
        }
        if (!(m > 0.0) || !std::isfinite(m)) {
            return false;
        }
        out(t) = m;
    }
    return true;
}

double gaussian_variance_llf(const VectorXd& h, const VectorXd& r) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < h.size(); ++t) {
        s += std::log(h(t)) + r(t) * r(t) / h(t);
    }
    return -0.5 * s;
}

double correlation_llf(double alpha, double beta, const MatrixXd& R_bar, const MatrixXd& P_bar,
                       const MatrixSeq& rl, const MatrixXd& u_hat) {
    const auto K = R_bar.rows();
    const MatrixXd intercept = (1.0 - beta) * R_bar - alpha * P_bar;
    MatrixXd R = R_bar;
    MatrixXd chol(K, K);
    VectorXd x(K);
    VectorXd work(K);
    double s = 0.0;
    for (std::size_t t = 0; t < rl.size(); ++t) {
        if (t > 0) {
            R = intercept + alpha * rl[t - 1] + beta * R;
        }
        chol = R;
        chol.diagonal().array() -= kPdTolerance;
        if (!cholesky_in_place(chol)) {
            return kNegInf;
        }
        chol = R;
        if (!cholesky_in_place(chol)) {
            return kNegInf;
        }
        x = u_hat.row(static_cast<Eigen::Index>(t)).transpose();
        s += cholesky_logdet(chol) + cholesky_quadratic(chol, x, work);
    }
    return std::isfinite(s) ? -0.5 * s : kNegInf;
}

double realized_correlation_llf(double alpha, double beta, const MatrixXd& P_bar, const MatrixSeq& rl,
                                const MatrixSeq& scaled_rc) {
    const auto K = P_bar.rows();
    const MatrixXd intercept = (1.0 - alpha - beta) * P_bar;
    MatrixXd P = P_bar;
    MatrixXd chol(K, K);
    VectorXd x(K);
    double s = 0.0;
    for (std::size_t t = 0; t < rl.size(); ++t) {
        if (t > 0) {
            P = intercept + alpha * rl[t - 1] + beta * P;
        }
        chol = P;
        chol.diagonal().array() -= kPdTolerance;
        if (!cholesky_in_place(chol)) {
            return kNegInf;
        }
        chol = P;
        if (!cholesky_in_place(chol)) {
            return kNegInf;
        }
        const MatrixXd& Z = scaled_rc[t];
        double trace = 0.0;
        for (Eigen::Index j = 0; j < K; ++j) {
            x = Z.col(j);
            cholesky_solve_in_place(chol, x);
            trace += x(j) - Z(j, j);
        }
        s += cholesky_logdet(chol) + trace;
    }
    return std::isfinite(s) ? -0.5 * s : kNegInf;
}

MatrixSeq scale_realized_covariances(const MatrixSeq& rc, const MatrixXd& m) {
    MatrixSeq out;
    out.reserve(rc.size());
    for (std::size_t t = 0; t < rc.size(); ++t) {
        const VectorXd inv_sd = m.row(static_cast<Eigen::Index>(t)).transpose().cwiseSqrt().cwiseInverse();
        out.push_back(inv_sd.asDiagonal() * rc[t] * inv_sd.asDiagonal());
    }
    return out;
}

}  // namespace detail

MatrixXd filter_variances(const CoreModelParams& params, const RealizedMeasures& measures,
                          const MatrixXd& monthly_factor_returns) {
    const std::size_t K = params.factors();
    const auto T = static_cast<Eigen::Index>(measures.months_count());
    if (measures.factors() != K || monthly_factor_returns.cols() != static_cast<Eigen::Index>(K) ||
        monthly_factor_returns.rows() != T) {
        fail(ErrorCode::Dimension, "filter_variances: inputs disagree on T or K");
    }
    MatrixXd h(T, static_cast<Eigen::Index>(K));
    VectorXd path;
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        if (!detail::variance_path(params.variance_equation(k), params.h_init(c), measures.rv_factors.col(c),
                                   monthly_factor_returns.col(c), path)) {
            Eigen::Index bad = 0;
            while (bad < path.size() && path(bad) > 0.0 && std::isfinite(path(bad))) {
                ++bad;
            }
            fail(ErrorCode::ParameterExplosion, "conditional variance not finite/positive at t = " +
                                                    std::to_string(bad) + ", factor " + std::to_string(k));
        }
        h.col(c) = path;
    }
    return h;
}

MatrixXd degarch(const MatrixXd& returns, const MatrixXd& h) {
    return returns.array() / h.array().sqrt();
}

MatrixSeq filter_correlations(const CoreModelParams& params, const RealizedMeasures& measures) {
    const auto& rl = measures.rl_factors;
    const MatrixXd intercept = (1.0 - params.beta_R) * params.R_bar - params.alpha_R * params.P_bar;
    MatrixSeq R;
    R.reserve(rl.size());
    for (std::size_t t = 0; t < rl.size(); ++t) {
        R.push_back(t == 0 ? params.R_bar : MatrixXd(intercept + params.alpha_R * rl[t - 1] + params.beta_R * R.back()));
        if (!is_pd(R.back())) {
            fail(ErrorCode::PdViolation, "conditional correlation matrix not positive definite at t = " +
                                             std::to_string(t));
        }
    }
    return R;
}

std::pair<MatrixXd, MatrixSeq> filter_realized_means(const CoreModelParams& params, const RealizedMeasures& measures) {
    const std::size_t K = params.factors();
    const auto T = static_cast<Eigen::Index>(measures.months_count());
    MatrixXd m(T, static_cast<Eigen::Index>(K));
    VectorXd path;
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        if (!detail::realized_mean_path(params.realized_equation(k), params.m_init(c), measures.semivar_pos.col(c),
                                        measures.semivar_neg.col(c), path)) {
            fail(ErrorCode::ParameterExplosion, "realized-variance mean not finite/positive for factor " +
                                                    std::to_string(k));
        }
        m.col(c) = path;
    }
    const auto& rl = measures.rl_factors;
    const MatrixXd intercept = (1.0 - params.alpha_P - params.beta_P) * params.P_bar;
    MatrixSeq P;
    P.reserve(rl.size());
    for (std::size_t t = 0; t < rl.size(); ++t) {
        P.push_back(t == 0 ? params.P_bar : MatrixXd(intercept + params.alpha_P * rl[t - 1] + params.beta_P * P.back()));
        if (!is_pd(P.back())) {
            fail(ErrorCode::PdViolation, "realized-correlation mean not positive definite at t = " + std::to_string(t));
        }
    }
    return {std::move(m), std::move(P)};
}

CoreFilteredState filter_core(const CoreModelParams& params, const RealizedMeasures& measures,
                              const MatrixXd& monthly_factor_returns) {
    CoreFilteredState s;
    s.h = filter_variances(params, measures, monthly_factor_returns);
    s.u = degarch(monthly_factor_returns, s.h);
    s.R = filter_correlations(params, measures);
    auto [m, P] = filter_realized_means(params, measures);
    s.m = std::move(m);
    s.P = std::move(P);
    s.H.reserve(s.R.size());
    for (std::size_t t = 0; t < s.R.size(); ++t) {
        const VectorXd sd = s.h.row(static_cast<Eigen::Index>(t)).transpose().cwiseSqrt();
        s.H.push_back(sd.asDiagonal() * s.R[t] * sd.asDiagonal());
    }
    return s;
}

CoreStep core_next(const CoreModelParams& params, const CoreFilteredState& state, const RealizedMeasures& measures,
                   const MatrixXd& monthly_factor_returns) {
    const std::size_t K = params.factors();
    const auto last = static_cast<Eigen::Index>(state.months()) - 1;
    if (last < 0 || static_cast<Eigen::Index>(measures.months_count()) != last + 1) {
        fail(ErrorCode::Dimension, "core_next: state and measures disagree on T");
    }
    CoreStep step;
    step.h.resize(static_cast<Eigen::Index>(K));
    step.m.resize(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        step.h(c) = variance_step(params.variance_equation(k), measures.rv_factors(last, c),
                                  monthly_factor_returns(last, c), state.h(last, c));
        step.m(c) = realized_mean_step(params.realized_equation(k), measures.semivar_pos(last, c),
                                       measures.semivar_neg(last, c), state.m(last, c));
        if (!(step.h(c) > 0.0) || !std::isfinite(step.h(c)) || !(step.m(c) > 0.0) || !std::isfinite(step.m(c))) {
            fail(ErrorCode::ParameterExplosion, "one-step variance not finite/positive for factor " + std::to_string(k));
        }
    }
    const auto& rl_last = measures.rl_factors[static_cast<std::size_t>(last)];
    step.R = (1.0 - params.beta_R) * params.R_bar - params.alpha_R * params.P_bar + params.alpha_R * rl_last +
             params.beta_R * state.R[static_cast<std::size_t>(last)];
    step.P = (1.0 - params.alpha_P - params.beta_P) * params.P_bar + params.alpha_P * rl_last +
             params.beta_P * state.P[static_cast<std::size_t>(last)];
    if (!is_pd(step.R) || !is_pd(step.P)) {
        fail(ErrorCode::PdViolation, "one-step correlation forecast not positive definite");
    }
    const VectorXd sd = step.h.cwiseSqrt();
    step.H = sd.asDiagonal() * step.R * sd.asDiagonal();
    return step;
}

double llf_variance_factor(const VarianceEquation& eq, double h_init, const VectorXd& rv, const VectorXd& returns) {
    VectorXd h;
    if (!detail::variance_path(eq, h_init, rv, returns, h)) {
        return kNegInf;
    }
    return detail::gaussian_variance_llf(h, returns);
}

double llf_variances(const CoreModelParams& params, const RealizedMeasures& measures,
                     const MatrixXd& monthly_factor_returns) {
    double s = 0.0;
    for (std::size_t k = 0; k < params.factors(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        const double part = llf_variance_factor(params.variance_equation(k), params.h_init(c),
                                                measures.rv_factors.col(c), monthly_factor_returns.col(c));
        if (!std::isfinite(part)) {
            return kNegInf;
        }
        s += part;
    }
    return s;
}

double llf_correlations(const CoreModelParams& params, const RealizedMeasures& measures, const MatrixXd& u_hat) {
    return detail::correlation_llf(params.alpha_R, params.beta_R, params.R_bar, params.P_bar, measures.rl_factors,
                                   u_hat);
}

double llf_realized_variance_factor(const VarianceEquation& eq, double m_init, const VectorXd& rv, const VectorXd& pos,
                                    const VectorXd& neg) {
    VectorXd m;
    if (!detail::realized_mean_path(eq, m_init, pos, neg, m)) {
        return kNegInf;
    }
    double s = 0.0;
    for (Eigen::Index t = 0; t < m.size(); ++t) {
        s += std::log(m(t)) + rv(t) / m(t);
    }
    return -0.5 * s;
}

double llf_realized_variances(const CoreModelParams& params, const RealizedMeasures& measures) {
    double s = 0.0;
    for (std::size_t k = 0; k < params.factors(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        const double part = llf_realized_variance_factor(params.realized_equation(k), params.m_init(c),
                                                         measures.rv_factors.col(c), measures.semivar_pos.col(c),
                                                         measures.semivar_neg.col(c));
        if (!std::isfinite(part)) {
            return kNegInf;
        }
        s += part;
    }
    return s;
}

double llf_realized_correlations(const CoreModelParams& params, const RealizedMeasures& measures,
                                 const MatrixXd& m_hat) {
    const MatrixSeq scaled = detail::scale_realized_covariances(measures.rc_factors, m_hat);
    return detail::realized_correlation_llf(params.alpha_P, params.beta_P, params.P_bar, measures.rl_factors, scaled);
}

}  // namespace hdh
