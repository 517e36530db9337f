#include "hdheavy/core_estimation.hpp"

#include "hdheavy/core_detail.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <string>

namespace hdh {

namespace {

constexpr double kPersistenceCap = 0.999;

const std::vector<optim::Bound>& symmetric_bounds() {
    static const std::vector<optim::Bound> b{{0.0, std::numeric_limits<double>::infinity()},
                                             {0.0, 1.0},
                                             {0.0, kPersistenceCap}};
    return b;
}

const std::vector<optim::Bound>& asymmetric_bounds() {
    static const std::vector<optim::Bound> b{{0.0, std::numeric_limits<double>::infinity()},
                                             {0.0, 1.0},
                                             {0.0, 1.0},
                                             {0.0, kPersistenceCap}};
    return b;
}

VarianceEquation unpack(const VectorXd& x, bool symmetric) {
    if (symmetric) {
        return {x(0), x(1), x(1), x(2)};
    }
    return {x(0), x(1), x(2), x(3)};
}

VectorXd pack(const VarianceEquation& eq, bool symmetric) {
    if (symmetric) {
        return (VectorXd(3) << eq.w, 0.5 * (eq.a_pos + eq.a_neg), eq.b).finished();
    }
    return (VectorXd(4) << eq.w, eq.a_pos, eq.a_neg, eq.b).finished();
}

struct UnivariateFit {
    VarianceEquation eq;
    StageReport report;
};

/// Fits one variance-type equation. The asymmetric fit is seeded with the symmetric
/// optimum so that its likelihood can never fall below the restricted one.
UnivariateFit fit_univariate(const std::string& name, const optim::Objective& llf, double level, bool symmetric,
                             const optim::Options& opt) {
    const VarianceEquation base{0.1 * level, 0.1, 0.1, 0.8};
    const VarianceEquation alt{0.3 * level, 0.3, 0.3, 0.4};
    const auto run = [&](bool sym, const std::vector<VectorXd>& extra) {
        const optim::Objective f = [&llf, sym](const VectorXd& x) {
            const VarianceEquation eq = unpack(x, sym);
            return llf((VectorXd(4) << eq.w, eq.a_pos, eq.a_neg, eq.b).finished());
        };
        std::vector<VectorXd> starts = extra;
        starts.push_back(pack(alt, sym));
        return optim::maximize(f, pack(base, sym), sym ? symmetric_bounds() : asymmetric_bounds(), opt, starts);
    };

    const optim::Result sym = run(true, {});
    optim::Result res = sym;
    std::size_t evaluations = sym.evaluations;
    if (!symmetric) {
        const VarianceEquation s = unpack(sym.x, true);
        res = run(false, {pack(s, false)});
        evaluations += res.evaluations;
    }
    UnivariateFit out;
    out.eq = unpack(res.x, symmetric);
    out.report = {name, res.value, res.start_value, symmetric ? 3U : 4U, res.converged, evaluations};
    return out;
}

optim::Result fit_pair(const optim::Objective& llf, double beta_cap, bool sum_guard, const optim::Options& opt) {
    const std::vector<optim::Bound> bounds{{0.0, 1.0}, {0.0, beta_cap}};
    const optim::Objective f = [&](const VectorXd& x) {
        if (sum_guard && x(0) + x(1) >= kPersistenceCap) {
            return kNegInf;
        }
        return llf(x);
    };
    const std::vector<VectorXd> extra{(VectorXd(2) << 0.02, 0.02).finished(), (VectorXd(2) << 0.05, 0.5).finished(),
                                      (VectorXd(2) << 0.2, 0.6).finished()};
    return optim::maximize(f, (VectorXd(2) << 0.05, 0.8).finished(), bounds, opt, extra);
}

void record(FitReport& report, const StageReport& stage) {
    report.stages.push_back(stage);
    if (!stage.converged) {
        report.converged = false;
        report.warnings.push_back("stage " + stage.name + " did not converge");
    }
    if (!std::isfinite(stage.llf)) {
        fail(ErrorCode::Estimation, "stage " + stage.name + " found no feasible parameter point");
    }
}

}  // namespace

double FitReport::aic() const {
    const double T = static_cast<double>(observations);
    return (-2.0 * llf + 2.0 * static_cast<double>(parameters)) / T;
}

double FitReport::bic() const {
    const double T = static_cast<double>(observations);
    return (-2.0 * llf + static_cast<double>(parameters) * std::log(T)) / T;
}

double FitReport::stage_llf(const std::string& prefix) const {
    double s = 0.0;
    for (const auto& st : stages) {
        if (st.name.rfind(prefix, 0) == 0) {
            s += st.llf;
        }
    }
    return s;
}

CoreFit estimate_core(const MatrixXd& r, const RealizedMeasures& measures, const EstimationOptions& options) {
    const std::size_t K = measures.factors();
    const auto T = static_cast<Eigen::Index>(measures.months_count());
    if (r.rows() != T || r.cols() != static_cast<Eigen::Index>(K) || K == 0) {
        fail(ErrorCode::Dimension, "estimate_core: returns and measures disagree on T or K");
    }
    if (static_cast<std::size_t>(T) < options.min_months) {
        fail(ErrorCode::Input, "estimate_core: " + std::to_string(T) + " months is below the minimum of " +
                                   std::to_string(options.min_months));
    }
    const auto Ki = static_cast<Eigen::Index>(K);
    CoreModelParams p;
    p.symmetric = options.symmetric;
    for (VectorXd* v : {&p.w_h, &p.a_h_pos, &p.a_h_neg, &p.b_h, &p.w_m, &p.a_m_pos, &p.a_m_neg, &p.b_m}) {
        v->setZero(Ki);
    }
    p.h_init = empirical_variance_init(measures);
    p.m_init = p.h_init;

    CoreFit fit;
    FitReport& rep = fit.report;
    rep.observations = static_cast<std::size_t>(T);

    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        const VectorXd rv = measures.rv_factors.col(c);
        const VectorXd ret = r.col(c);
        const double init = p.h_init(c);
        const optim::Objective llf = [&](const VectorXd& x) {
            return llf_variance_factor({x(0), x(1), x(2), x(3)}, init, rv, ret);
        };
        const auto f = fit_univariate("H1:" + measures.factor_names[k], llf, init, options.symmetric, options.optimizer);
        p.w_h(c) = f.eq.w;
        p.a_h_pos(c) = f.eq.a_pos;
        p.a_h_neg(c) = f.eq.a_neg;
        p.b_h(c) = f.eq.b;
        record(rep, f.report);
    }
    const MatrixXd h = filter_variances(p, measures, r);
    const MatrixXd u = degarch(r, h);
    p.R_bar = K > 1 ? correlation_target(u) : MatrixXd::Ones(1, 1);
    p.P_bar = K > 1 ? realized_correlation_target(measures.rl_factors) : MatrixXd::Ones(1, 1);

    if (K > 1) {
        const optim::Objective llf = [&](const VectorXd& x) {
            return detail::correlation_llf(x(0), x(1), p.R_bar, p.P_bar, measures.rl_factors, u);
        };
        const auto res = fit_pair(llf, kPersistenceCap, false, options.optimizer);
        p.alpha_R = res.x(0);
        p.beta_R = res.x(1);
        record(rep, {"H2", res.value, res.start_value, 2, res.converged, res.evaluations});
    }

    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        const VectorXd rv = measures.rv_factors.col(c);
        const VectorXd pos = measures.semivar_pos.col(c);
        const VectorXd neg = measures.semivar_neg.col(c);
        const double init = p.m_init(c);
        const optim::Objective llf = [&](const VectorXd& x) {
            if (x(3) + std::max(x(1), x(2)) >= kPersistenceCap) {
                return kNegInf;
            }
            return llf_realized_variance_factor({x(0), x(1), x(2), x(3)}, init, rv, pos, neg);
        };
        const auto f = fit_univariate("M1:" + measures.factor_names[k], llf, init, options.symmetric, options.optimizer);
        p.w_m(c) = f.eq.w;
        p.a_m_pos(c) = f.eq.a_pos;
        p.a_m_neg(c) = f.eq.a_neg;
        p.b_m(c) = f.eq.b;
        record(rep, f.report);
    }

    if (K > 1) {
        const auto [m, P_unused] = filter_realized_means(p, measures);
        (void)P_unused;
        const MatrixSeq scaled = detail::scale_realized_covariances(measures.rc_factors, m);
        const optim::Objective llf = [&](const VectorXd& x) {
            return detail::realized_correlation_llf(x(0), x(1), p.P_bar, measures.rl_factors, scaled);
        };
        const auto res = fit_pair(llf, kPersistenceCap, true, options.optimizer);
        p.alpha_P = res.x(0);
        p.beta_P = res.x(1);
        record(rep, {"M2", res.value, res.start_value, 2, res.converged, res.evaluations});
    }

    fit.state = filter_core(p, measures, r);
    rep.parameters = p.free_parameters();
    rep.llf = core_joint_llf(p, measures, r);
    for (const auto& w : rep.warnings) {
        spdlog::warn("core estimation: {}", w);
    }
    fit.params = std::move(p);
    return fit;
}

CoreFit estimate_core(const ReturnPanel& panel, const RealizedMeasures& measures, const EstimationOptions& options) {
    return estimate_core(panel.factor_returns_monthly, measures, options);
}

double core_joint_llf(const CoreModelParams& params, const RealizedMeasures& measures, const MatrixXd& r) {
    const double h1 = llf_variances(params, measures, r);
    if (!std::isfinite(h1)) {
        return kNegInf;
    }
    const MatrixXd u = degarch(r, filter_variances(params, measures, r));
    const double h2 = llf_correlations(params, measures, u) + 0.5 * u.squaredNorm();
    const double m1 = llf_realized_variances(params, measures);
    if (!std::isfinite(m1)) {
        return kNegInf;
    }
    const auto m = filter_realized_means(params, measures).first;
    const double m2 = llf_realized_correlations(params, measures, m);
    return h1 + h2 + m1 + m2;
}

}  // namespace hdh
