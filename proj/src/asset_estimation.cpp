#include "hdheavy/asset_estimation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace hdh {

namespace {

constexpr double kPersistenceCap = 0.999;
constexpr double kInf = std::numeric_limits<double>::infinity();

// x layout (asymmetric): c, a_pos, a_neg, b, phi, alpha, beta; symmetric drops a_neg.
struct Layout {
    bool symmetric;
    [[nodiscard]] Eigen::Index size() const { return symmetric ? 6 : 7; }
    [[nodiscard]] Eigen::Index offset() const { return symmetric ? 2 : 3; }
};

void unpack_h(const VectorXd& x, Layout l, AssetModelParams& p) {
    p.c_h = x(0);
    p.a_h_pos = x(1);
    p.a_h_neg = l.symmetric ? x(1) : x(2);
    const auto o = l.offset();
    p.b_h = x(o);
    p.phi_R = x(o + 1);
    p.alpha_R = x(o + 2);
    p.beta_R = x(o + 3);
}

void unpack_m(const VectorXd& x, Layout l, AssetModelParams& p) {
    p.c_m = x(0);
    p.a_m_pos = x(1);
    p.a_m_neg = l.symmetric ? x(1) : x(2);
    const auto o = l.offset();
    p.b_m = x(o);
    p.phi_P = x(o + 1);
    p.alpha_P = x(o + 2);
    p.beta_P = x(o + 3);
}

VectorXd pack(double c, double a_pos, double a_neg, double b, double phi, double alpha, double beta, Layout l) {
    if (l.symmetric) {
        return (VectorXd(6) << c, 0.5 * (a_pos + a_neg), b, phi, alpha, beta).finished();
    }
    return (VectorXd(7) << c, a_pos, a_neg, b, phi, alpha, beta).finished();
}

std::vector<optim::Bound> bounds(Layout l, const EstimationOptions& o) {
    std::vector<optim::Bound> b{{0.0, kInf}, {0.0, 1.0}};
    if (!l.symmetric) {
        b.push_back({0.0, 1.0});
    }
    b.push_back({0.0, kPersistenceCap});
    b.push_back({o.phi_lower, o.phi_upper});
    b.push_back({0.0, 1.0});
    b.push_back({0.0, kPersistenceCap});
    return b;
}

double clamp_phi(double phi, const EstimationOptions& o) {
    const double width = o.phi_upper - o.phi_lower;
    return std::clamp(phi, o.phi_lower + 1e-3 * width, o.phi_upper - 1e-3 * width);
}

using StageObjective = std::function<double(const AssetModelParams&)>;

/// One stage, fitted symmetric first; the asymmetric fit starts from the symmetric optimum.
StageReport fit_stage(const std::string& name, AssetModelParams& params, bool for_m, const StageObjective& llf,
                      double level, double fisher_level, const EstimationOptions& options) {
    const auto unpack = [for_m](const VectorXd& x, Layout l, AssetModelParams& p) {
        for_m ? unpack_m(x, l, p) : unpack_h(x, l, p);
    };
    const auto run = [&](Layout l, const std::vector<VectorXd>& extra) {
        const optim::Objective f = [&, l](const VectorXd& x) {
            AssetModelParams p = params;
            unpack(x, l, p);
            const double b = for_m ? p.b_m : p.b_h;
            const double a = for_m ? std::max(p.a_m_pos, p.a_m_neg) : std::max(p.a_h_pos, p.a_h_neg);
            if (b + a >= kPersistenceCap) {
                return kNegInf;
            }
            return llf(p);
        };
        std::vector<VectorXd> starts = extra;
        starts.push_back(pack(0.3 * level, 0.2, 0.2, 0.5, clamp_phi(0.3 * fisher_level, options), 0.2, 0.5, l));
        starts.push_back(pack(0.1 * level, 0.05, 0.05, 0.85, clamp_phi(0.05 * fisher_level, options), 0.05, 0.9, l));
        const VectorXd first = pack(0.2 * level, 0.1, 0.1, 0.7, clamp_phi(0.4 * fisher_level, options), 0.1, 0.5, l);
        return optim::maximize(f, first, bounds(l, options), options.optimizer, starts);
    };

    const optim::Result sym = run(Layout{true}, {});
    optim::Result res = sym;
    std::size_t evaluations = sym.evaluations;
    Layout used{true};
    if (!params.symmetric) {
        AssetModelParams s = params;
        unpack(sym.x, Layout{true}, s);
        const VectorXd seed = for_m ? pack(s.c_m, s.a_m_pos, s.a_m_neg, s.b_m, s.phi_P, s.alpha_P, s.beta_P, Layout{false})
                                    : pack(s.c_h, s.a_h_pos, s.a_h_neg, s.b_h, s.phi_R, s.alpha_R, s.beta_R, Layout{false});
        res = run(Layout{false}, {seed});
        evaluations += res.evaluations;
        used = Layout{false};
    }
    unpack(res.x, used, params);
    return {name, res.value, res.start_value, static_cast<std::size_t>(used.size()), res.converged, evaluations};
}

}  // namespace

AssetFit estimate_asset(const AssetSeries& series, const CoreFilteredState& core, const CoreContext& context,
                        const EstimationOptions& options) {
    AssetFit fit;
    AssetModelParams& p = fit.params;
    p.symmetric = options.symmetric;
    set_asset_initial_values(p, series);
    const double level = p.h_init;
    const double fisher_level = std::max(0.0, fisher(p.rho_init).mean());

    FitReport& rep = fit.report;
    rep.observations = series.months();
    const auto add = [&](const StageReport& st) {
        rep.stages.push_back(st);
        if (!st.converged) {
            rep.converged = false;
            rep.warnings.push_back("asset " + series.name + " stage " + st.name + " did not converge");
        }
        if (!std::isfinite(st.llf)) {
            fail(ErrorCode::Estimation, "asset " + series.name + " stage " + st.name + " found no feasible point");
        }
    };
    add(fit_stage("H", p, false,
                  [&](const AssetModelParams& q) { return llf_asset_conditional(q, series, context); }, level,
                  fisher_level, options));
    add(fit_stage("M", p, true, [&](const AssetModelParams& q) { return llf_asset_realized(q, series, context); },
                  level, fisher_level, options));
    rep.llf = rep.stages[0].llf + rep.stages[1].llf;
    rep.parameters = p.free_parameters();
    fit.state = filter_asset(p, series, core);
    return fit;
}

std::vector<AssetFit> estimate_assets(const MatrixXd& monthly_asset_returns, const RealizedMeasures& measures,
                                      const CoreFit& core, const EstimationOptions& options) {
    const std::size_t N = measures.assets();
    const CoreContext context = make_core_context(core.state, measures);
    std::vector<AssetSeries> series;
    series.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        series.push_back(make_asset_series(monthly_asset_returns, measures, i));
    }
    std::vector<AssetFit> fits(N);
    std::vector<std::exception_ptr> errors(N);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < N; i = next++) {
            try {
                fits[i] = estimate_asset(series[i], core.state, context, options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1U, std::min<unsigned>(options.workers, static_cast<unsigned>(N)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    for (const auto& f : fits) {
        for (const auto& w : f.report.warnings) {
            spdlog::warn("{}", w);
        }
    }
    return fits;
}

FitReport combine_reports(const CoreFit& core, const std::vector<AssetFit>& assets) {
    FitReport r;
    r.observations = core.report.observations;
    r.llf = core.report.llf;
    r.parameters = core.report.parameters;
    r.converged = core.report.converged;
    r.warnings = core.report.warnings;
    r.stages = core.report.stages;
    for (const auto& a : assets) {
        r.llf += a.report.llf;
        r.parameters += a.report.parameters;
        r.converged = r.converged && a.report.converged;
        r.warnings.insert(r.warnings.end(), a.report.warnings.begin(), a.report.warnings.end());
    }
    return r;
}

}  // namespace hdh
