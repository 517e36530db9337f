#include "hdheavy/simulation.hpp"

#include "hdheavy/realized.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>

namespace hdh {

namespace {

std::string numbered(char prefix, std::size_t i, std::size_t count) {
    const int width = count >= 100 ? 3 : 2;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i + 1);
    return buf;
}

MatrixXd constant_correlation(Eigen::Index K, double r) {
    MatrixXd m = MatrixXd::Constant(K, K, r);
    m.diagonal().setOnes();
    return m;
}

}  // namespace

void DgpSpec::validate() const {
    if (K == 0 || N == 0 || T < 2) {
        fail(ErrorCode::Input, "dgp: K, N must be positive and T at least 2");
    }
    if (days_per_month < 2 || days_per_month > 28) {
        fail(ErrorCode::Input, "dgp: days_per_month must lie in [2, 28]");
    }
    if (core.factors() != K || assets.size() != N || factor_names.size() != K || asset_names.size() != N) {
        fail(ErrorCode::Dimension, "dgp: parameter or name counts disagree with K and N");
    }
    core.validate();
    if (!is_pd(core.R_bar) || !is_pd(core.P_bar)) {
        fail(ErrorCode::Input, "dgp: targeting matrices must be positive definite");
    }
    for (const auto& a : assets) {
        a.validate();
        if (static_cast<std::size_t>(a.rho_init.size()) != K) {
            fail(ErrorCode::Dimension, "dgp: asset starting correlations must have K entries");
        }
    }
    if (idiosyncratic_correlation.size() != 0) {
        if (idiosyncratic_correlation.rows() != static_cast<Eigen::Index>(N) ||
            idiosyncratic_correlation.cols() != static_cast<Eigen::Index>(N) || !is_pd(idiosyncratic_correlation)) {
            fail(ErrorCode::Input, "dgp: idiosyncratic correlation must be N x N and positive definite");
        }
    }
}

DgpSpec default_dgp(std::size_t K, std::size_t N, std::size_t T, std::uint64_t seed) {
    DgpSpec s;
    s.K = K;
    s.N = N;
    s.T = T;
    s.seed = seed;
    const auto Ki = static_cast<Eigen::Index>(K);
    const double level = 0.002;
    auto& c = s.core;
    c.a_h_pos = VectorXd::Constant(Ki, 0.15);
    c.a_h_neg = VectorXd::Constant(Ki, 0.35);
    c.b_h = VectorXd::Constant(Ki, 0.6);
    c.w_h = VectorXd::Constant(Ki, level * (1.0 - 0.6) - 0.25 * level);
    c.a_m_pos = VectorXd::Constant(Ki, 0.2);
    c.a_m_neg = VectorXd::Constant(Ki, 0.3);
    c.b_m = VectorXd::Constant(Ki, 0.6);
    c.w_m = VectorXd::Constant(Ki, level * (1.0 - 0.6 - 0.25));
    c.h_init = VectorXd::Constant(Ki, level);
    c.m_init = VectorXd::Constant(Ki, level);
    c.R_bar = constant_correlation(Ki, K > 1 ? 0.3 : 0.0);
    c.P_bar = c.R_bar;
    if (K > 1) {
        c.alpha_R = 0.1;
        c.beta_R = 0.6;
        c.alpha_P = 0.1;
        c.beta_P = 0.6;
    }
    for (std::size_t i = 0; i < N; ++i) {
        AssetModelParams a;
        const double lvl = 0.003;
        a.a_h_pos = 0.1;
        a.a_h_neg = 0.3;
        a.b_h = 0.55;
        a.c_h = lvl * (1.0 - 0.55) - 0.2 * lvl;
        a.a_m_pos = 0.2;
        a.a_m_neg = 0.3;
        a.b_m = 0.55;
        a.c_m = lvl * (1.0 - 0.55 - 0.25);
        a.phi_R = 0.093;
        a.alpha_R = 0.1;
        a.beta_R = 0.6;
        a.phi_P = 0.093;
        a.alpha_P = 0.1;
        a.beta_P = 0.6;
        a.h_init = lvl;
        a.m_init = lvl;
        a.rho_init = VectorXd::Constant(Ki, 0.3);
        a.p_init = a.rho_init;
        s.assets.push_back(a);
    }
    for (std::size_t k = 0; k < K; ++k) {
        s.factor_names.push_back(numbered('F', k, K));
    }
    for (std::size_t i = 0; i < N; ++i) {
        s.asset_names.push_back(numbered('A', i, N));
    }
    return s;
}

namespace {

struct Path {
    ReturnPanel panel;
    CoreFilteredState core;
    std::vector<AssetFilteredState> assets;
};

std::optional<Path> draw_path(const DgpSpec& spec, int attempt) {
    const auto K = static_cast<Eigen::Index>(spec.K);
    const auto N = static_cast<Eigen::Index>(spec.N);
    const auto T = static_cast<Eigen::Index>(spec.T);
    const auto d = static_cast<Eigen::Index>(spec.days_per_month);
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto draw = [&](Eigen::Index n) {
        VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i) = normal(rng);
        }
        return z;
    };
    const MatrixXd idio_chol = spec.idiosyncratic_correlation.size() == 0
                                   ? MatrixXd(MatrixXd::Identity(N, N))
                                   : MatrixXd(spec.idiosyncratic_correlation.llt().matrixL());

    Path out;
    ReturnPanel& p = out.panel;
    p.factor_names = spec.factor_names;
    p.asset_names = spec.asset_names;
    p.factor_returns_daily.resize(T * d, K);
    p.asset_returns_daily.resize(T * d, N);
    p.factor_returns_monthly.resize(T, K);
    p.asset_returns_monthly.resize(T, N);
    p.month_offsets.push_back(0);

    const auto& c = spec.core;
    CoreFilteredState& cs = out.core;
    cs.h.resize(T, K);
    cs.u.resize(T, K);
    cs.m.resize(T, K);
    out.assets.resize(spec.N);
    for (auto& a : out.assets) {
        a.h.resize(T);
        a.m.resize(T);
        a.u.resize(T);
        a.rho.resize(T, K);
        a.p.resize(T, K);
    }

    VectorXd h = c.h_init;
    VectorXd m = c.m_init;
    MatrixXd R = c.R_bar;
    MatrixXd P = c.P_bar;
    std::vector<double> ha(spec.N), ma(spec.N);
    std::vector<VectorXd> frho(spec.N), fp(spec.N);
    for (std::size_t i = 0; i < spec.N; ++i) {
        ha[i] = spec.assets[i].h_init;
        ma[i] = spec.assets[i].m_init;
        frho[i] = spec.assets[i].rho_init.array().atanh();
        fp[i] = spec.assets[i].p_init.array().atanh();
    }
    std::optional<RealizedMeasures> prev;
    ReturnPanel month;
    month.factor_names = p.factor_names;
    month.asset_names = p.asset_names;
    month.month_offsets = {0, static_cast<std::size_t>(d)};

    YearMonth ym = spec.start;
    for (Eigen::Index t = 0; t < T; ++t, ym = ym.next()) {
        if (prev) {
            const auto& pm = *prev;
            for (Eigen::Index k = 0; k < K; ++k) {
                h(k) = variance_step(c.variance_equation(static_cast<std::size_t>(k)), pm.rv_factors(0, k),
                                     p.factor_returns_monthly(t - 1, k), h(k));
                m(k) = realized_mean_step(c.realized_equation(static_cast<std::size_t>(k)), pm.semivar_pos(0, k),
                                          pm.semivar_neg(0, k), m(k));
            }
            R = (1.0 - c.beta_R) * c.R_bar - c.alpha_R * c.P_bar + c.alpha_R * pm.rl_factors[0] + c.beta_R * R;
            P = (1.0 - c.alpha_P - c.beta_P) * c.P_bar + c.alpha_P * pm.rl_factors[0] + c.beta_P * P;
            for (std::size_t i = 0; i < spec.N; ++i) {
                const auto& a = spec.assets[i];
                const auto ii = static_cast<Eigen::Index>(i);
                ha[i] = variance_step(a.variance_equation(), pm.rv_assets(0, ii), p.asset_returns_monthly(t - 1, ii),
                                      ha[i]);
                ma[i] = realized_mean_step(a.realized_equation(), pm.semivar_pos_assets(0, ii),
                                           pm.semivar_neg_assets(0, ii), ma[i]);
                for (Eigen::Index k = 0; k < K; ++k) {
                    double rl = pm.rl_asset_factor[i](0, k);
                    rl = std::max(-kCorrelationClamp, std::min(kCorrelationClamp, rl));
                    const double frl = std::atanh(rl);
                    frho[i](k) = a.phi_R + a.alpha_R * frl + a.beta_R * frho[i](k);
                    fp[i](k) = a.phi_P + a.alpha_P * frl + a.beta_P * fp[i](k);
                }
            }
        }
        if (!h.allFinite() || (h.array() <= 0.0).any() || !m.allFinite() || (m.array() <= 0.0).any() || !is_pd(R) ||
            !is_pd(P)) {
            return std::nullopt;
        }
        const MatrixXd R_inv = R.llt().solve(MatrixXd::Identity(K, K));
        const MatrixXd P_inv = P.llt().solve(MatrixXd::Identity(K, K));

        // Monthly returns.
        const VectorXd uc = R.llt().matrixL() * draw(K);
        const VectorXd z = idio_chol * draw(N);
        cs.h.row(t) = h.transpose();
        cs.u.row(t) = uc.transpose();
        cs.m.row(t) = m.transpose();
        cs.R.push_back(R);
        cs.P.push_back(P);
        const VectorXd sd = h.cwiseSqrt();
        cs.H.push_back(sd.asDiagonal() * R * sd.asDiagonal());
        p.factor_returns_monthly.row(t) = sd.cwiseProduct(uc).transpose();

        // Joint mean of the realized covariance: factors first, then assets.
        MatrixXd M(K + N, K + N);
        const VectorXd lm = m.cwiseSqrt();
        M.topLeftCorner(K, K) = lm.asDiagonal() * P * lm.asDiagonal();
        std::vector<VectorXd> rho(spec.N), pv(spec.N);
        for (std::size_t i = 0; i < spec.N; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            rho[i] = frho[i].array().tanh();
            pv[i] = fp[i].array().tanh();
            const double q = rho[i].dot(R_inv * rho[i]);
            const double qp = pv[i].dot(P_inv * pv[i]);
            if (!(ha[i] > 0.0) || !(ma[i] > 0.0) || !std::isfinite(ha[i]) || !std::isfinite(ma[i]) ||
                !(1.0 - q > kPdTolerance) || !(1.0 - qp > kPdTolerance)) {
                return std::nullopt;
            }
            const double ui = rho[i].dot(R_inv * uc) + std::sqrt(1.0 - q) * z(ii);
            p.asset_returns_monthly(t, ii) = std::sqrt(ha[i]) * ui;
            auto& as = out.assets[i];
            as.h(t) = ha[i];
            as.m(t) = ma[i];
            as.u(t) = ui;
            as.rho.row(t) = rho[i].transpose();
            as.p.row(t) = pv[i].transpose();
            M.block(K + ii, 0, 1, K) = std::sqrt(ma[i]) * (lm.asDiagonal() * pv[i]).transpose();
            M.block(0, K + ii, K, 1) = M.block(K + ii, 0, 1, K).transpose();
        }
        for (std::size_t i = 0; i < spec.N; ++i) {
            for (std::size_t j = 0; j < spec.N; ++j) {
                const double corr = i == j ? 1.0 : pv[i].dot(P_inv * pv[j]);
                M(K + static_cast<Eigen::Index>(i), K + static_cast<Eigen::Index>(j)) = corr * std::sqrt(ma[i] * ma[j]);
            }
        }
        const Eigen::LLT<MatrixXd> llt(M / static_cast<double>(d));
        if (llt.info() != Eigen::Success) {
            return std::nullopt;
        }
        const MatrixXd L = llt.matrixL();

        // Daily returns and their realized measures.
        month.dates_monthly = {ym};
        month.dates_daily.clear();
        month.factor_returns_daily.resize(d, K);
        month.asset_returns_daily.resize(d, N);
        month.factor_returns_monthly = p.factor_returns_monthly.row(t);
        month.asset_returns_monthly = p.asset_returns_monthly.row(t);
        for (Eigen::Index j = 0; j < d; ++j) {
            const VectorXd y = L * draw(K + N);
            month.factor_returns_daily.row(j) = y.head(K).transpose();
            month.asset_returns_daily.row(j) = y.tail(N).transpose();
            const Date day{ym.year, ym.month, static_cast<int>(j) + 1};
            month.dates_daily.push_back(day);
            p.dates_daily.push_back(day);
        }
        p.factor_returns_daily.middleRows(t * d, d) = month.factor_returns_daily;
        p.asset_returns_daily.middleRows(t * d, d) = month.asset_returns_daily;
        p.dates_monthly.push_back(ym);
        p.month_offsets.push_back(static_cast<std::size_t>((t + 1) * d));
        try {
            prev = build_measures(month);
        } catch (const Error&) {
            return std::nullopt;
        }
    }
    return out;
}

}  // namespace

SimulationResult simulate(const DgpSpec& spec) {
    spec.validate();
    for (int attempt = 0; attempt <= spec.max_retries; ++attempt) {
        auto path = draw_path(spec, attempt);
        if (path) {
            SimulationResult r;
            r.panel = std::move(path->panel);
            r.core = std::move(path->core);
            r.assets = std::move(path->assets);
            r.attempts = attempt + 1;
            r.panel.validate();
            return r;
        }
        spdlog::debug("simulate: attempt {} left the feasible region; redrawing", attempt);
    }
    fail(ErrorCode::PdViolation, "simulate: no feasible path after " + std::to_string(spec.max_retries + 1) +
                                     " attempts");
}

}  // namespace hdh
