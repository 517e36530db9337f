// Acceptance run: one pass/fail line per criterion. Pass criterion numbers as arguments to
// run a subset, e.g. `acceptance 2 3 9`.

#include "support.hpp"

#include "hdheavy/asset_estimation.hpp"
#include "hdheavy/core_estimation.hpp"
#include "hdheavy/evaluation.hpp"
#include "hdheavy/forecasting.hpp"
#include "hdheavy/mcs.hpp"
#include "hdheavy/pipeline.hpp"
#include "hdheavy/serialization.hpp"
#include "hdheavy/simulation.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace hdh;
using namespace support;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string strf(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Smallest eigenvalue seen in any emitted R_t, P_t, H_t or H_hat across the criteria.
double g_min_eig = std::numeric_limits<double>::infinity();
std::size_t g_matrices = 0;

void track(const MatrixSeq& ms) {
    for (const auto& m : ms) {
        g_min_eig = std::min(g_min_eig, min_eig(m));
        ++g_matrices;
    }
}

void track(const CoreFilteredState& s) {
    track(s.R);
    track(s.P);
    track(s.H);
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hdheavy-acceptance-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// ---- 2 ---------------------------------------------------------------------------------

Outcome filter_oracles() {
    double worst = 0.0;
    int redraws = 0;
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t K = 1 + static_cast<std::size_t>(draw % 4);
        const std::size_t N = 1 + static_cast<std::size_t>((draw / 4) % 5);
        std::mt19937_64 rng(7000 + static_cast<std::uint64_t>(draw));
        const ReturnPanel panel = random_panel(K, N, 200, 9000 + static_cast<std::uint64_t>(draw));
        const RealizedMeasures m = build_measures(panel);
        const MatrixXd& r = panel.factor_returns_monthly;
        CoreModelParams p;
        CoreFilteredState s;
        for (int attempt = 0;; ++attempt) {
            p = random_core_params(K, m, r, rng);
            try {
                s = filter_core(p, m, r);
                break;
            } catch (const Error&) {
                ++redraws;
                if (attempt > 50) {
                    return {false, "no feasible core parameter draw"};
                }
            }
        }
        track(s);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(K); ++k) {
            worst = std::max(worst, max_rel_diff(s.h.col(k), oracle_variance(p.w_h(k), p.a_h_pos(k), p.a_h_neg(k),
                                                                              p.b_h(k), p.h_init(k),
                                                                              m.rv_factors.col(k), r.col(k))));
            worst = std::max(worst, max_rel_diff(s.m.col(k), oracle_realized_mean(p.w_m(k), p.a_m_pos(k),
                                                                                   p.a_m_neg(k), p.b_m(k),
                                                                                   p.m_init(k), m.semivar_pos.col(k),
                                                                                   m.semivar_neg.col(k))));
        }
        const MatrixSeq R = oracle_targeted(p.alpha_R, p.beta_R, p.R_bar, p.P_bar, m.rl_factors);
        const MatrixSeq P = oracle_targeted(p.alpha_P, p.beta_P, p.P_bar, p.P_bar, m.rl_factors);
        for (std::size_t t = 0; t < R.size(); ++t) {
            worst = std::max(worst, max_rel_diff(s.R[t], R[t]));
            worst = std::max(worst, max_rel_diff(s.P[t], P[t]));
        }
        for (std::size_t i = 0; i < N; ++i) {
            const AssetSeries a = make_asset_series(panel.asset_returns_monthly, m, i);
            AssetModelParams ap;
            AssetFilteredState as;
            for (int attempt = 0;; ++attempt) {
                ap = random_asset_params(a, rng);
                try {
                    as = filter_asset(ap, a, s);
                    break;
                } catch (const Error&) {
                    ++redraws;
                    if (attempt > 50) {
                        return {false, "no feasible asset parameter draw"};
                    }
                }
            }
            worst = std::max(worst, max_rel_diff(as.h, oracle_variance(ap.c_h, ap.a_h_pos, ap.a_h_neg, ap.b_h,
                                                                       ap.h_init, a.rv, a.returns)));
            worst = std::max(worst, max_rel_diff(as.m, oracle_realized_mean(ap.c_m, ap.a_m_pos, ap.a_m_neg, ap.b_m,
                                                                            ap.m_init, a.rv_pos, a.rv_neg)));
            worst = std::max(worst, max_rel_diff(as.rho, oracle_fisher_path(ap.phi_R, ap.alpha_R, ap.beta_R,
                                                                            ap.rho_init, a.rl)));
            worst = std::max(worst, max_rel_diff(as.p, oracle_fisher_path(ap.phi_P, ap.alpha_P, ap.beta_P,
                                                                          ap.p_init, a.rl)));
        }
    }
    return {worst <= 1e-13, strf("max relative difference %.2e over 100 draws (%d infeasible redraws)", worst, redraws)};
}

// ---- 3 ---------------------------------------------------------------------------------

Outcome likelihood_oracles() {
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        const std::size_t K = 1 + static_cast<std::size_t>(draw % 4);
        const std::size_t N = 1 + static_cast<std::size_t>(draw % 3);
        std::mt19937_64 rng(17000 + static_cast<std::uint64_t>(draw));
        const ReturnPanel panel = random_panel(K, N, 200, 19000 + static_cast<std::uint64_t>(draw));
        const RealizedMeasures m = build_measures(panel);
        const MatrixXd& r = panel.factor_returns_monthly;
        CoreModelParams p;
        CoreFilteredState s;
        for (int attempt = 0;; ++attempt) {
            p = random_core_params(K, m, r, rng);
            try {
                s = filter_core(p, m, r);
                break;
            } catch (const Error&) {
                if (attempt > 50) {
                    return {false, "no feasible core parameter draw"};
                }
            }
        }
        track(s);
        worst = std::max(worst, rel_diff(llf_variances(p, m, r), oracle_llf_variances(s.h, r)));
        worst = std::max(worst, rel_diff(llf_correlations(p, m, s.u), oracle_llf_correlations(s.R, s.u)));
        worst = std::max(worst, rel_diff(llf_realized_variances(p, m), oracle_llf_realized_variances(s.m, m.rc_factors)));
        worst = std::max(worst, rel_diff(llf_realized_correlations(p, m, s.m),
                                          oracle_llf_realized_correlations(s.P, s.m, m.rc_factors)));
        const CoreContext ctx = make_core_context(s, m);
        for (std::size_t i = 0; i < N; ++i) {
            const AssetSeries a = make_asset_series(panel.asset_returns_monthly, m, i);
            AssetModelParams ap;
            AssetFilteredState as;
            for (int attempt = 0;; ++attempt) {
                ap = random_asset_params(a, rng);
                try {
                    as = filter_asset(ap, a, s);
                    break;
                } catch (const Error&) {
                    if (attempt > 50) {
                        return {false, "no feasible asset parameter draw"};
                    }
                }
            }
            worst = std::max(worst, rel_diff(llf_asset_conditional(ap, a, ctx),
                                              oracle_llf_asset_conditional(as.h, as.rho, s.R, s.u, a.returns)));
            worst = std::max(worst, rel_diff(llf_asset_realized(ap, a, ctx),
                                              oracle_llf_asset_realized(as.m, as.p, s.P, a.rv, a.rc, m.rc_factors)));
        }
    }
    return {worst <= 1e-11, strf("max relative difference %.2e over 50 instances", worst)};
}

// ---- 4 and 5 ---------------------------------------------------------------------------

struct RecoveryRun {
    CoreModelParams truth;
    CoreFit asymmetric;
    CoreFit symmetric;
};

// Persistent variances with small ARCH terms and strongly correlated factors: the most
// informative of the configurations tried inside the stated parameter ranges.
DgpSpec recovery_spec(std::uint64_t rep) {
    DgpSpec spec = default_dgp(2, 3, 3000, 31000 + rep);
    auto& c = spec.core;
    for (Eigen::Index k = 0; k < 2; ++k) {
        c.a_h_pos(k) = 0.05;
        c.a_h_neg(k) = 0.15;
        c.b_h(k) = 0.8;
        c.w_h(k) = c.h_init(k) * (1.0 - c.b_h(k) - 0.5 * (c.a_h_pos(k) + c.a_h_neg(k)));
    }
    c.R_bar = MatrixXd::Constant(2, 2, 0.8);
    c.R_bar.diagonal().setOnes();
    c.P_bar = c.R_bar;
    c.alpha_R = c.alpha_P = 0.2;
    c.beta_R = c.beta_P = 0.75;
    return spec;
}

std::vector<RecoveryRun>& recovery_runs() {
    static std::vector<RecoveryRun> runs;
    if (runs.empty()) {
        for (std::uint64_t rep = 0; rep < 20; ++rep) {
            const DgpSpec spec = recovery_spec(rep);
            const SimulationResult sim = simulate(spec);
            track(sim.core);
            const RealizedMeasures m = build_measures(sim.panel);
            EstimationOptions o;
            o.optimizer.starts = 2;
            o.optimizer.seed = 500 + rep;
            RecoveryRun run;
            run.truth = spec.core;
            run.asymmetric = estimate_core(sim.panel, m, o);
            o.symmetric = true;
            run.symmetric = estimate_core(sim.panel, m, o);
            track(run.asymmetric.state);
            runs.push_back(std::move(run));
        }
    }
    return runs;
}

Outcome parameter_recovery() {
    const auto& runs = recovery_runs();
    int good = 0;
    std::map<std::string, std::pair<int, int>> coverage;  // within, total
    for (const auto& run : runs) {
        const auto& t = run.truth;
        const auto& e = run.asymmetric.params;
        bool ok = true;
        const auto check = [&](const char* name, double est, double truth) {
            const bool within = std::abs(est - truth) <= 0.1;
            ok = ok && within;
            coverage[name].first += within ? 1 : 0;
            ++coverage[name].second;
        };
        for (Eigen::Index k = 0; k < 2; ++k) {
            check("b_h", e.b_h(k), t.b_h(k));
            check("a_h+", e.a_h_pos(k), t.a_h_pos(k));
            check("a_h-", e.a_h_neg(k), t.a_h_neg(k));
            check("b_m", e.b_m(k), t.b_m(k));
        }
        check("beta_R", e.beta_R, t.beta_R);
        good += ok ? 1 : 0;
    }
    std::string per;
    for (const auto& [name, c] : coverage) {
        per += strf(" %s %d/%d", name.c_str(), c.first, c.second);
    }
    return {good >= 16, strf("%d/20 replications with every listed coefficient within 0.1 (need 16); per coefficient:%s",
                             good, per.c_str())};
}

Outcome nesting() {
    const auto& runs = recovery_runs();
    double worst = std::numeric_limits<double>::infinity();
    int violations = 0;
    int compared = 0;
    const auto compare = [&](double asym, double sym) {
        ++compared;
        worst = std::min(worst, asym - sym);
        if (asym < sym - 1e-6) {
            ++violations;
        }
    };
    for (const auto& run : runs) {
        compare(run.asymmetric.report.llf, run.symmetric.report.llf);
    }
    // Full models on smaller panels, so the asset stages are covered as well.
    for (std::uint64_t rep = 0; rep < 3; ++rep) {
        const SimulationResult sim = simulate(default_dgp(2, 3, 400, 41000 + rep));
        const RealizedMeasures m = build_measures(sim.panel);
        ModelOptions o;
        o.estimation.optimizer.starts = 2;
        const FittedModel asym = fit_model(sim.panel.factor_returns_monthly, sim.panel.asset_returns_monthly, m, o);
        o.estimation.symmetric = true;
        const FittedModel sym = fit_model(sim.panel.factor_returns_monthly, sim.panel.asset_returns_monthly, m, o);
        compare(asym.report.llf, sym.report.llf);
        for (std::size_t i = 0; i < asym.assets.size(); ++i) {
            compare(asym.assets[i].report.llf, sym.assets[i].report.llf);
        }
        track(asym.core.state);
    }
    return {violations == 0, strf("%d comparisons, %d violations, smallest margin LLF_asym - LLF_sym = %.3e", compared,
                                 violations, worst)};
}

// ---- 6 ---------------------------------------------------------------------------------

Outcome parameter_counting() {
    const fs::path dir = scratch("count");
    std::string detail;
    bool ok = true;
    for (const std::size_t K : {1, 3, 4}) {
        for (const std::size_t N : {1, 20}) {
            const DgpSpec spec = default_dgp(K, N, 120, 1);
            write_model(dir / "p.csv", dir / "m.csv", spec.core, spec.asset_names, spec.assets, 0.0, 3.0);
            std::ifstream in(dir / "p.csv");
            std::size_t rows = 0;
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                rows += line.empty() ? 0 : 1;
            }
            const std::size_t expected = 8 * K + 4 + 14 * N;
            const std::size_t records = read_parameter_records(dir / "p.csv").size();
            ok = ok && rows == expected && records == expected;
            detail += strf(" (K=%zu,N=%zu):%zu/%zu", K, N, rows, expected);
        }
    }
    fs::remove_all(dir);
    return {ok, "rows/expected" + detail};
}

// ---- 7 ---------------------------------------------------------------------------------

Outcome gmvp() {
    std::mt19937_64 rng(7070);
    std::normal_distribution<double> z;
    int beaten = 0;
    for (const Eigen::Index N : {6, 20}) {
        for (int m = 0; m < 50; ++m) {
            const MatrixXd H = random_spd(N, rng);
            const VectorXd w = gmvp_weights(H);
            const double best = w.dot(H * w);
            for (int k = 0; k < 1000; ++k) {
                VectorXd v(N);
                for (Eigen::Index i = 0; i < N; ++i) {
                    v(i) = z(rng);
                }
                v /= v.sum();
                if (!std::isfinite(v.sum()) || v.dot(H * v) < best) {
                    ++beaten;
                }
            }
        }
    }
    double worst = 0.0;
    int constrained = 0;
    for (int m = 0; m < 200; ++m) {
        const MatrixXd H = random_spd(6, rng);
        const VectorXd reference = long_only_enumeration(H);
        const VectorXd solver = gmvp_weights_long_only(H);
        const VectorXd active = long_only_active_set(H);
        constrained += (gmvp_weights(H).array() < 0.0).any() ? 1 : 0;
        worst = std::max({worst, (solver - reference).cwiseAbs().maxCoeff(),
                          (active - reference).cwiseAbs().maxCoeff()});
    }
    return {beaten == 0 && worst <= 1e-8,
            strf("closed form beaten by %d of 100000 random portfolios; long-only vs enumeration max |dw| = %.2e on "
                "200 matrices (%d with binding constraints)",
                beaten, worst, constrained)};
}

// ---- 8 ---------------------------------------------------------------------------------

Outcome mcs_coverage() {
    int best_in = 0;
    int dominated_out = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        std::mt19937_64 rng(88000 + run);
        std::normal_distribution<double> z;
        const Eigen::Index T = 120;
        // AR(1) noise with unit variance; the means sit 1 sd apart, plus one model at +5 sd.
        const double phi = 0.3;
        MatrixXd close(T, 3);
        MatrixXd far(T, 3);
        VectorXd e = VectorXd::Zero(3);
        for (Eigen::Index t = 0; t < T; ++t) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                e(j) = phi * e(j) + std::sqrt(1.0 - phi * phi) * z(rng);
            }
            close.row(t) << 0.0 + e(0), 1.0 + e(1), 2.0 + e(2);
            far.row(t) << 0.0 + e(0), 1.0 + e(1), 5.0 + e(2);
        }
        McsOptions o;
        o.replications = 1000;
        o.seed = run;
        const McsResult a = model_confidence_set(close, {"best", "mid", "worst"}, o);
        const McsResult b = model_confidence_set(far, {"best", "mid", "dominated"}, o);
        best_in += a.included[0] ? 1 : 0;
        dominated_out += b.included[2] ? 0 : 1;
    }
    return {best_in >= 90 && dominated_out >= 99,
            strf("best model retained in %d/100 runs, dominated model excluded in %d/100 runs", best_in, dominated_out)};
}

// ---- 9 ---------------------------------------------------------------------------------

Outcome utility_fees() {
    std::mt19937_64 rng(9090);
    std::normal_distribution<double> z;
    double worst = 0.0;
    bool identical_zero = true;
    const auto total = [](const VectorXd& r, double shift, double gamma) {
        long double s = 0.0L;
        for (Eigen::Index t = 0; t < r.size(); ++t) {
            const long double x = 1.0L + (static_cast<long double>(r(t)) - shift);
            s += x - static_cast<long double>(gamma) / (2.0L * (1.0L + gamma)) * x * x;
        }
        return s;
    };
    for (int pair = 0; pair < 200; ++pair) {
        VectorXd r1(120);
        VectorXd r2(120);
        for (Eigen::Index t = 0; t < 120; ++t) {
            r1(t) = 0.008 + 0.045 * z(rng);
            r2(t) = 0.006 + 0.035 * z(rng);
        }
        for (const double gamma : {1.0, 10.0}) {
            const double delta = utility_fee(r1, r2, gamma);
            worst = std::max(worst, static_cast<double>(std::abs(total(r1, 0.0, gamma) - total(r2, delta, gamma))));
            identical_zero = identical_zero && utility_fee(r1, r1, gamma) == 0.0;
        }
    }
    return {worst <= 1e-12 && identical_zero,
            strf("max |sum U(r1) - sum U(r2 - fee)| = %.2e over 400 cases; identical series give 0 exactly: %s", worst,
                identical_zero ? "yes" : "no")};
}

// ---- 10 --------------------------------------------------------------------------------

RunConfig small_pipeline_config(const fs::path& root) {
    RunConfig c;
    c.output_dir = (root / "runs").string();
    c.variant = "FF";
    c.variants = {"FF", "M"};
    c.simulation.factors = 3;
    c.simulation.assets = 3;
    c.simulation.months = 150;
    c.simulation.seed = 2024;
    c.data.factor_count = 3;
    c.estimation.starts = 2;
    c.forecast.window = 120;
    c.forecast.refit_every = 12;
    c.mcs.replications = 500;
    return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            std::ifstream in(e.path(), std::ios::binary);
            files[fs::relative(e.path(), root).string()] = {std::istreambuf_iterator<char>(in),
                                                            std::istreambuf_iterator<char>()};
        }
    }
    return files;
}

fs::path pipeline_once(const fs::path& root) {
    RunConfig c = small_pipeline_config(root);
    const RunResult sim = run("simulate", c);
    c.data.daily = (sim.run_dir / "daily.csv").string();
    c.data.monthly = (sim.run_dir / "monthly.csv").string();
    (void)run("estimate", c);
    (void)run("forecast", c);
    (void)run("backtest", c);
    return root / "runs";
}

Outcome end_to_end_determinism() {
    const fs::path a = scratch("e2e-a");
    const fs::path b = scratch("e2e-b");
    const auto first = snapshot(pipeline_once(a));
    const auto second = snapshot(pipeline_once(b));
    std::size_t differing = 0;
    for (const auto& [name, bytes] : first) {
        const auto it = second.find(name);
        differing += (it == second.end() || it->second != bytes) ? 1 : 0;
    }
    differing += second.size() > first.size() ? second.size() - first.size() : 0;
    fs::remove_all(a);
    fs::remove_all(b);
    return {differing == 0 && first.size() > 10,
            strf("%zu files per run, %zu differ between the two runs", first.size(), differing)};
}

// ---- 11 --------------------------------------------------------------------------------

Outcome pd_safety() {
    const SimulationResult sim = simulate(default_dgp(3, 4, 200, 1111));
    track(sim.core);
    const RealizedMeasures m = build_measures(sim.panel);
    RollingOptions ro;
    ro.window = 150;
    ro.refit_every = 12;
    ro.model.estimation.optimizer.starts = 2;
    const RollingResult rolled = rolling_forecasts(sim.panel, m, ro);
    for (const auto& f : rolled.forecasts) {
        track(MatrixSeq{f.H_hat, f.H_factor});
    }
    // A deliberately explosive correlation pair must abort with PdViolation.
    CoreModelParams bad = default_dgp(3, 4, 200, 1111).core;
    bad.P_bar = MatrixXd::Constant(3, 3, 0.9);
    bad.P_bar.diagonal().setOnes();
    bad.R_bar = MatrixXd::Identity(3, 3);
    bad.alpha_R = 0.9;
    bad.beta_R = 0.05;
    std::string abort_code = "none";
    try {
        (void)filter_correlations(bad, m);
    } catch (const Error& e) {
        abort_code = std::string(to_string(e.code()));
    }
    std::string beta_code = "none";
    try {
        MatrixXd R = MatrixXd::Ones(2, 2);
        (void)compute_beta(VectorXd::Ones(2), R, VectorXd::Constant(2, 0.1), 1.0);
    } catch (const Error& e) {
        beta_code = std::string(to_string(e.code()));
    }
    const bool aborted = abort_code == to_string(ErrorCode::PdViolation) && beta_code == abort_code;
    return {g_min_eig > 1e-10 && aborted,
            strf("min eigenvalue %.3e over %zu emitted matrices; forced violations abort with '%s' and '%s'", g_min_eig,
                g_matrices, abort_code.c_str(), beta_code.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);
    const std::vector<Criterion> criteria{
        {2, "filter-oracle equivalence", 10.0, filter_oracles},
        {3, "likelihood-oracle equivalence", 10.0, likelihood_oracles},
        {4, "parameter recovery", 600.0, parameter_recovery},
        {5, "nesting inequality", 0.0, nesting},
        {6, "parameter counting", 0.0, parameter_counting},
        {7, "GMVP correctness", 0.0, gmvp},
        {8, "MCS coverage", 300.0, mcs_coverage},
        {9, "utility-fee residual", 0.0, utility_fees},
        {10, "end-to-end determinism", 0.0, end_to_end_determinism},
        {11, "PD safety", 0.0, pd_safety},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::stoi(argv[i]));
    }
    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && selected.count(c.id) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0.0 && seconds > c.limit_seconds) {
            o.pass = false;
            o.detail += strf("; exceeded the %.0f s limit", c.limit_seconds);
        }
        failures += o.pass ? 0 : 1;
        std::cout << "criterion " << c.id << " [" << c.title << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
                  << o.detail << strf(" (%.1f s)", seconds) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
