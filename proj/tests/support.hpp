#pragma once

// Shared fixtures for the unit and acceptance tests. The oracles below are plain loops with
// explicit inverses, written from the model equations rather than from the library code.

#include "hdheavy/asset_model.hpp"
#include "hdheavy/core_model.hpp"
#include "hdheavy/panel.hpp"
#include "hdheavy/realized.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace support {

using hdh::MatrixSeq;
using hdh::MatrixXd;
using hdh::VectorXd;

inline MatrixXd random_correlation(Eigen::Index n, std::mt19937_64& rng, double spread = 0.6) {
    std::normal_distribution<double> z;
    MatrixXd A(n, n + 4);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            A(i, j) = z(rng) * (j < 2 ? 1.0 : spread);
        }
    }
    MatrixXd S = A * A.transpose();
    const VectorXd d = S.diagonal().cwiseSqrt().cwiseInverse();
    S = d.asDiagonal() * S * d.asDiagonal();
    S.diagonal().setOnes();
    return S;
}

inline MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            A(i, j) = z(rng);
        }
    }
    return A * A.transpose() / static_cast<double>(n) + 0.05 * MatrixXd::Identity(n, n);
}

/// Daily panel with volatility clustering at the monthly level and correlated series.
inline hdh::ReturnPanel random_panel(std::size_t K, std::size_t N, std::size_t T, std::uint64_t seed,
                                     std::size_t days = 21) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const auto D = static_cast<Eigen::Index>(K + N);
    const MatrixXd C = random_correlation(D, rng, 0.8);
    const MatrixXd L = C.llt().matrixL();
    hdh::ReturnPanel p;
    for (std::size_t k = 0; k < K; ++k) {
        p.factor_names.push_back("F" + std::to_string(k + 1));
    }
    for (std::size_t i = 0; i < N; ++i) {
        p.asset_names.push_back("A" + std::to_string(i + 1));
    }
    p.factor_returns_daily.resize(static_cast<Eigen::Index>(T * days), static_cast<Eigen::Index>(K));
    p.asset_returns_daily.resize(static_cast<Eigen::Index>(T * days), static_cast<Eigen::Index>(N));
    p.factor_returns_monthly.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(K));
    p.asset_returns_monthly.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(N));
    double logvol = 0.0;
    hdh::YearMonth ym{1990, 1};
    for (std::size_t t = 0; t < T; ++t) {
        logvol = 0.8 * logvol + 0.3 * z(rng);
        const double vol = 0.01 * std::exp(logvol);
        p.dates_monthly.push_back(ym);
        p.month_offsets.push_back(t * days);
        VectorXd month_sum = VectorXd::Zero(D);
        for (std::size_t d = 0; d < days; ++d) {
            VectorXd e(D);
            for (Eigen::Index j = 0; j < D; ++j) {
                e(j) = z(rng);
            }
            const VectorXd r = vol * (L * e);
            const auto row = static_cast<Eigen::Index>(t * days + d);
            p.factor_returns_daily.row(row) = r.head(static_cast<Eigen::Index>(K)).transpose();
            p.asset_returns_daily.row(row) = r.tail(static_cast<Eigen::Index>(N)).transpose();
            p.dates_daily.push_back({ym.year, ym.month, static_cast<int>(d + 1)});
            month_sum += r;
        }
        const auto ti = static_cast<Eigen::Index>(t);
        p.factor_returns_monthly.row(ti) = month_sum.head(static_cast<Eigen::Index>(K)).transpose();
        p.asset_returns_monthly.row(ti) = month_sum.tail(static_cast<Eigen::Index>(N)).transpose();
        ym = ym.next();
    }
    p.month_offsets.push_back(T * days);
    return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// ---- straightline oracles -------------------------------------------------------------

inline VectorXd oracle_variance(double w, double ap, double an, double b, double init, const VectorXd& rv,
                                const VectorXd& r) {
    VectorXd h(rv.size());
    h(0) = init;
    for (Eigen::Index t = 1; t < rv.size(); ++t) {
        const double a = r(t - 1) > 0.0 ? ap : an;
        h(t) = w + a * rv(t - 1) + b * h(t - 1);
    }
    return h;
}

inline VectorXd oracle_realized_mean(double w, double ap, double an, double b, double init, const VectorXd& pos,
                                     const VectorXd& neg) {
    VectorXd m(pos.size());
    m(0) = init;
    for (Eigen::Index t = 1; t < pos.size(); ++t) {
        m(t) = w + ap * pos(t - 1) + an * neg(t - 1) + b * m(t - 1);
    }
    return m;
}

/// Targeted scalar recursion X_t = (1 - beta) Xbar - alpha Ybar + alpha RL_{t-1} + beta X_{t-1}.
inline MatrixSeq oracle_targeted(double alpha, double beta, const MatrixXd& xbar, const MatrixXd& ybar,
                                 const MatrixSeq& rl) {
    MatrixSeq out(rl.size());
    out[0] = xbar;
    const auto K = xbar.rows();
    for (std::size_t t = 1; t < rl.size(); ++t) {
        out[t].resize(K, K);
        for (Eigen::Index i = 0; i < K; ++i) {
            for (Eigen::Index j = 0; j < K; ++j) {
                out[t](i, j) = (1.0 - beta) * xbar(i, j) - alpha * ybar(i, j) + alpha * rl[t - 1](i, j) +
                               beta * out[t - 1](i, j);
            }
        }
    }
    return out;
}

inline MatrixXd oracle_fisher_path(double phi, double alpha, double beta, const VectorXd& init, const MatrixXd& rl) {
    MatrixXd out(rl.rows(), rl.cols());
    for (Eigen::Index k = 0; k < rl.cols(); ++k) {
        double f = std::atanh(init(k));
        out(0, k) = std::tanh(f);
        for (Eigen::Index t = 1; t < rl.rows(); ++t) {
            f = phi + alpha * std::atanh(rl(t - 1, k)) + beta * f;
            out(t, k) = std::tanh(f);
        }
    }
    return out;
}

inline MatrixXd mean_outer_correlation(const MatrixXd& u) {
    MatrixXd S = MatrixXd::Zero(u.cols(), u.cols());
    for (Eigen::Index t = 0; t < u.rows(); ++t) {
        S += u.row(t).transpose() * u.row(t);
    }
    S /= static_cast<double>(u.rows());
    MatrixXd R(S.rows(), S.cols());
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        for (Eigen::Index j = 0; j < S.cols(); ++j) {
            R(i, j) = i == j ? 1.0 : S(i, j) / std::sqrt(S(i, i) * S(j, j));
        }
    }
    return R;
}

inline MatrixXd mean_matrix(const MatrixSeq& xs) {
    MatrixXd s = MatrixXd::Zero(xs[0].rows(), xs[0].cols());
    for (const auto& x : xs) {
        s += x;
    }
    s /= static_cast<double>(xs.size());
    s.diagonal().setOnes();
    return s;
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

/// max |a - b| / max |b|, the normwise relative difference.
inline double max_rel_diff(const MatrixXd& a, const MatrixXd& b) {
    const double scale = b.cwiseAbs().maxCoeff();
    return (a - b).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

/// Random core parameters with moderate persistence, targets taken from the data.
inline hdh::CoreModelParams random_core_params(std::size_t K, const hdh::RealizedMeasures& m,
                                               const MatrixXd& returns, std::mt19937_64& rng, bool symmetric = false) {
    hdh::CoreModelParams p;
    const auto Ki = static_cast<Eigen::Index>(K);
    p.symmetric = symmetric;
    for (VectorXd* v : {&p.w_h, &p.a_h_pos, &p.a_h_neg, &p.b_h, &p.w_m, &p.a_m_pos, &p.a_m_neg, &p.b_m}) {
        v->resize(Ki);
    }
    p.h_init.resize(Ki);
    p.m_init.resize(Ki);
    for (Eigen::Index k = 0; k < Ki; ++k) {
        const double level = m.rv_factors.col(k).mean();
        p.h_init(k) = level;
        p.m_init(k) = level;
        p.a_h_pos(k) = uniform(rng, 0.02, 0.4);
        p.a_h_neg(k) = symmetric ? p.a_h_pos(k) : uniform(rng, 0.02, 0.4);
        p.b_h(k) = uniform(rng, 0.3, 0.55);
        p.w_h(k) = level * uniform(rng, 0.05, 0.3);
        p.a_m_pos(k) = uniform(rng, 0.05, 0.5);
        p.a_m_neg(k) = symmetric ? p.a_m_pos(k) : uniform(rng, 0.05, 0.5);
        p.b_m(k) = uniform(rng, 0.3, 0.6);
        p.w_m(k) = level * uniform(rng, 0.05, 0.3);
    }
    if (K > 1) {
        p.alpha_R = uniform(rng, 0.01, 0.08);
        p.beta_R = uniform(rng, 0.3, 0.85);
        p.alpha_P = uniform(rng, 0.05, 0.3);
        p.beta_P = uniform(rng, 0.3, 0.65);
    }
    p.P_bar = mean_matrix(m.rl_factors);
    MatrixXd h(returns.rows(), Ki);
    for (Eigen::Index k = 0; k < Ki; ++k) {
        h.col(k) = oracle_variance(p.w_h(k), p.a_h_pos(k), p.a_h_neg(k), p.b_h(k), p.h_init(k), m.rv_factors.col(k),
                                   returns.col(k));
    }
    p.R_bar = mean_outer_correlation(returns.array() / h.array().sqrt());
    return p;
}

inline hdh::AssetModelParams random_asset_params(const hdh::AssetSeries& s, std::mt19937_64& rng) {
    hdh::AssetModelParams p;
    const double level = s.rv.mean();
    p.h_init = level;
    p.m_init = level;
    p.c_h = level * uniform(rng, 0.05, 0.3);
    p.a_h_pos = uniform(rng, 0.02, 0.4);
    p.a_h_neg = uniform(rng, 0.02, 0.4);
    p.b_h = uniform(rng, 0.3, 0.55);
    p.c_m = level * uniform(rng, 0.05, 0.3);
    p.a_m_pos = uniform(rng, 0.05, 0.5);
    p.a_m_neg = uniform(rng, 0.05, 0.5);
    p.b_m = uniform(rng, 0.3, 0.6);
    p.alpha_R = uniform(rng, 0.02, 0.2);
    p.beta_R = uniform(rng, 0.3, 0.7);
    p.alpha_P = uniform(rng, 0.1, 0.4);
    p.beta_P = uniform(rng, 0.3, 0.6);
    const VectorXd mean_fisher = s.fisher_rl.colwise().mean().transpose();
    // Intercepts near the fixed point keep the correlation vectors inside the feasible region.
    p.phi_R = std::max(0.0, (1.0 - p.alpha_R - p.beta_R) * mean_fisher.mean() * uniform(rng, 0.5, 1.0));
    p.phi_P = std::max(0.0, (1.0 - p.alpha_P - p.beta_P) * mean_fisher.mean() * uniform(rng, 0.5, 1.0));
    VectorXd r = s.rl.colwise().mean().transpose();
    p.rho_init = r;
    p.p_init = r;
    return p;
}

/// -1/2 sum {log h + r^2 / h} over all factors.
inline double oracle_llf_variances(const MatrixXd& h, const MatrixXd& r) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
        for (Eigen::Index k = 0; k < h.cols(); ++k) {
            s += std::log(h(t, k)) + r(t, k) * r(t, k) / h(t, k);
        }
    }
    return -0.5 * s;
}

inline double oracle_llf_correlations(const MatrixSeq& R, const MatrixXd& u) {
    double s = 0.0;
    for (std::size_t t = 0; t < R.size(); ++t) {
        const VectorXd ut = u.row(static_cast<Eigen::Index>(t)).transpose();
        s += std::log(R[t].determinant()) + ut.dot(R[t].inverse() * ut);
    }
    return -0.5 * s;
}

inline double oracle_llf_realized_variances(const MatrixXd& m, const MatrixSeq& rc) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            s += std::log(m(t, k)) + rc[static_cast<std::size_t>(t)](k, k) / m(t, k);
        }
    }
    return -0.5 * s;
}

inline double oracle_llf_realized_correlations(const MatrixSeq& P, const MatrixXd& m, const MatrixSeq& rc) {
    double s = 0.0;
    for (std::size_t t = 0; t < P.size(); ++t) {
        const auto K = P[t].rows();
        const MatrixXd Linv = m.row(static_cast<Eigen::Index>(t)).transpose().cwiseSqrt().cwiseInverse().asDiagonal();
        const MatrixXd Z = Linv * rc[t] * Linv;
        s += std::log(P[t].determinant()) + ((P[t].inverse() - MatrixXd::Identity(K, K)) * Z).trace();
    }
    return -0.5 * s;
}

inline double oracle_llf_asset_conditional(const VectorXd& h, const MatrixXd& rho, const MatrixSeq& R,
                                           const MatrixXd& uc, const VectorXd& r) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < h.size(); ++t) {
        const MatrixXd Rinv = R[static_cast<std::size_t>(t)].inverse();
        const VectorXd rt = rho.row(t).transpose();
        const double q = rt.dot(Rinv * rt);
        const double mean = rt.dot(Rinv * uc.row(t).transpose());
        const double u = r(t) / std::sqrt(h(t));
        s += std::log(h(t) * (1.0 - q)) + (u - mean) * (u - mean) / (1.0 - q);
    }
    return -0.5 * s;
}

inline double oracle_llf_asset_realized(const VectorXd& m, const MatrixXd& p, const MatrixSeq& P, const VectorXd& v,
                                        const MatrixXd& rc_if, const MatrixSeq& rc) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < m.size(); ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const VectorXd pt = p.row(t).transpose();
        const double q = pt.dot(P[ts].inverse() * pt);
        const VectorXd c = rc_if.row(t).transpose();
        const double resid = v(t) - c.dot(rc[ts].inverse() * c);
        const double scale = m(t) * (1.0 - q);
        s += std::log(scale) + resid / scale;
    }
    return -0.5 * s;
}

inline double min_eig(const MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace support
