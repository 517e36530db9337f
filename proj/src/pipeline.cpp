#include "hdheavy/pipeline.hpp"

#include "hdheavy/csv.hpp"
#include "hdheavy/evaluation.hpp"
#include "hdheavy/mcs.hpp"
#include "hdheavy/realized.hpp"
#include "hdheavy/serialization.hpp"
#include "hdheavy/simulation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

namespace hdh {

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot read " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Settings without paths, so relocating inputs or outputs leaves the stamp unchanged.
nlohmann::ordered_json portable_settings(const RunConfig& config) {
    auto j = to_json(config);
    j.erase("output_dir");
    j["data"].erase("daily");
    j["data"].erase("monthly");
    j["evaluation"].erase("forecast_root");
    return j;
}

std::vector<std::filesystem::path> input_files(const std::string& command, const RunConfig& config) {
    std::vector<std::filesystem::path> files;
    if (command == "simulate") {
        return files;
    }
    files.push_back(resolve_data_path(config.data.daily));
    if (config.data.monthly_source == "file") {
        files.push_back(resolve_data_path(config.data.monthly));
    }
    if (command == "evaluate") {
        const auto root = resolve_data_path(config.evaluation.forecast_root);
        for (const auto& v : config.variants) {
            const auto dir = root / v;
            files.push_back(dir / "manifest.csv");
            if (std::filesystem::exists(dir)) {
                std::vector<std::filesystem::path> monthly;
                for (const auto& e : std::filesystem::directory_iterator(dir)) {
                    if (e.path().filename() != "manifest.csv") {
                        monthly.push_back(e.path());
                    }
                }
                std::sort(monthly.begin(), monthly.end());
                files.insert(files.end(), monthly.begin(), monthly.end());
            }
        }
    }
    return files;
}

std::vector<std::string> forecast_variant(const std::filesystem::path& dir, const ReturnPanel& full,
                                          const RunConfig& config, const VariantSpec& spec,
                                          std::vector<CovarianceForecast>& forecasts) {
    const ReturnPanel panel = full.with_factors(spec.factors);
    const RealizedMeasures measures = build_measures(panel);
    RollingOptions ro;
    ro.window = config.forecast.window;
    ro.refit_every = config.forecast.refit_every;
    ro.model = model_options(config, spec);
    const RollingResult result = rolling_forecasts(panel, measures, ro);
    const auto sub = std::filesystem::path("forecasts") / spec.label;
    write_forecast_store(dir / sub, spec.label, result.forecasts, panel.assets(), panel.factors());
    std::vector<std::string> labels;
    for (const auto& m : result.fit_months) {
        labels.push_back(spec.label + "@" + m.str());
    }
    const auto fits = std::filesystem::path("fits_" + spec.label + ".csv");
    write_fit_summary(dir / fits, labels, result.fits);
    forecasts = result.forecasts;
    std::vector<std::string> files{fits.string(), (sub / "manifest.csv").string()};
    for (const auto& f : result.forecasts) {
        files.push_back((sub / (f.month.str() + ".csv")).string());
    }
    return files;
}

std::vector<std::string> run_ingest(const std::filesystem::path& dir, const RunConfig& config) {
    const ReturnPanel panel = load_configured_panel(config);
    const RealizedMeasures measures = build_measures(panel);
    write_measures(dir / "measures.csv", measures);
    write_summary(dir / "summary.csv", summarize_measures(panel, measures));
    return {"measures.csv", "summary.csv"};
}

std::vector<std::string> run_estimate(const std::filesystem::path& dir, const RunConfig& config) {
    const VariantSpec spec = variant_spec(config.variant);
    const ReturnPanel panel = load_configured_panel(config).with_factors(spec.factors);
    const RealizedMeasures measures = build_measures(panel);
    const ModelOptions options = model_options(config, spec);
    const FittedModel model =
        fit_model(panel.factor_returns_monthly, panel.asset_returns_monthly, measures, options);
    std::vector<AssetModelParams> asset_params;
    std::vector<FitReport> asset_reports;
    for (const auto& a : model.assets) {
        asset_params.push_back(a.params);
        asset_reports.push_back(a.report);
    }
    write_model(dir / "parameters.csv", dir / "moments.csv", model.core.params, panel.asset_names, asset_params,
                options.estimation.phi_lower, options.estimation.phi_upper);
    std::vector<std::string> labels{spec.label, spec.label + ":core"};
    std::vector<FitReport> reports{model.report, model.core.report};
    for (std::size_t i = 0; i < asset_reports.size(); ++i) {
        labels.push_back(spec.label + ":" + panel.asset_names[i]);
        reports.push_back(asset_reports[i]);
    }
    write_fit_summary(dir / "fit_summary.csv", labels, reports);
    write_fit_stages(dir / "fit_stages.csv", spec.label, model.core.report, panel.asset_names, asset_reports);
    write_matrix(dir / "residual_covariance.csv", model.residual.sigma, panel.asset_names, panel.asset_names);
    write_eigen_table(dir / "residual_eigenvalues.csv", model.residual);
    return {"fit_stages.csv", "fit_summary.csv", "moments.csv", "parameters.csv", "residual_covariance.csv",
            "residual_eigenvalues.csv"};
}

std::vector<std::string> run_simulate(const std::filesystem::path& dir, const RunConfig& config) {
    const auto& s = config.simulation;
    DgpSpec spec = default_dgp(s.factors, s.assets, s.months, s.seed);
    spec.days_per_month = s.days_per_month;
    const SimulationResult sim = simulate(spec);
    write_panel(sim.panel, dir / "daily.csv", dir / "monthly.csv");
    write_model(dir / "dgp_parameters.csv", dir / "dgp_moments.csv", spec.core, spec.asset_names, spec.assets,
                config.estimation.phi_lower, config.estimation.phi_upper);
    return {"daily.csv", "dgp_moments.csv", "dgp_parameters.csv", "monthly.csv"};
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& stamp,
                    const RunConfig& config, std::vector<std::string>& files) {
    std::sort(files.begin(), files.end());
    nlohmann::ordered_json j;
    j["command"] = command;
    j["stamp"] = stamp;
    j["settings"] = portable_settings(config);
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        j["files"].push_back({{"path", f}, {"bytes", std::filesystem::file_size(dir / f)}});
    }
    auto out = csv::open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

}  // namespace

std::filesystem::path resolve_data_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* base = std::getenv(kDataDirVariable); base != nullptr && *base != '\0') {
            return std::filesystem::path(base) / p;
        }
    }
    return p;
}

ReturnPanel load_configured_panel(const RunConfig& config) {
    IngestionConfig ic;
    ic.factor_count = config.data.factor_count;
    ic.monthly_source = config.data.monthly_source == "compound" ? MonthlySource::Compound : MonthlySource::File;
    if (ic.monthly_source == MonthlySource::File) {
        ic.monthly_path = resolve_data_path(config.data.monthly);
    }
    if (!config.data.start.empty()) {
        ic.start = YearMonth::parse(config.data.start);
    }
    if (!config.data.end.empty()) {
        ic.end = YearMonth::parse(config.data.end);
    }
    return load_panel(resolve_data_path(config.data.daily), ic);
}

ModelOptions model_options(const RunConfig& config, const VariantSpec& variant) {
    ModelOptions o;
    auto& e = o.estimation;
    e.optimizer.starts = config.estimation.starts;
    e.optimizer.max_evaluations = config.estimation.max_evaluations;
    e.optimizer.seed = config.estimation.seed;
    e.min_months = config.estimation.min_months;
    e.symmetric = variant.symmetric;
    e.phi_lower = config.estimation.phi_lower;
    e.phi_upper = config.estimation.phi_upper;
    e.workers = config.estimation.workers;
    o.shrinkage = parse_shrinkage_method(config.forecast.shrinkage);
    return o;
}

std::vector<std::string> write_backtest_reports(const std::filesystem::path& dir, const ReturnPanel& panel,
                                                const std::map<std::string, std::vector<CovarianceForecast>>& forecasts,
                                                const std::vector<std::string>& order, const RunConfig& config) {
    const auto& first = forecasts.at(order.front());
    const auto n = static_cast<Eigen::Index>(first.size());
    const auto M = static_cast<Eigen::Index>(order.size());
    const auto N = static_cast<Eigen::Index>(panel.assets());
    if (n == 0) {
        fail(ErrorCode::Input, "backtest: no forecasts to evaluate");
    }
    std::vector<std::size_t> rows;
    for (const auto& f : first) {
        const auto it = std::find(panel.dates_monthly.begin(), panel.dates_monthly.end(), f.month);
        if (it == panel.dates_monthly.end()) {
            fail(ErrorCode::Input, "backtest: forecast month " + f.month.str() + " is not in the panel");
        }
        rows.push_back(static_cast<std::size_t>(it - panel.dates_monthly.begin()));
    }
    for (const auto& label : order) {
        const auto& seq = forecasts.at(label);
        if (seq.size() != first.size()) {
            fail(ErrorCode::Input, "backtest: variant " + label + " covers a different number of months");
        }
        for (std::size_t t = 0; t < seq.size(); ++t) {
            if (seq[t].month != first[t].month || seq[t].H_hat.rows() != N) {
                fail(ErrorCode::Input, "backtest: variant " + label + " is misaligned at " + seq[t].month.str());
            }
        }
    }

    const CovarianceProxy proxy = parse_proxy(config.evaluation.proxy);
    MatrixXd ed(n, M);
    MatrixXd fn(n, M);
    MatrixXd realized(n, N);
    for (Eigen::Index t = 0; t < n; ++t) {
        const std::size_t s = rows[static_cast<std::size_t>(t)];
        const VectorXd r = panel.asset_returns_monthly.row(static_cast<Eigen::Index>(s)).transpose();
        realized.row(t) = r.transpose();
        MatrixXd C;
        if (proxy == CovarianceProxy::OuterProduct) {
            C = r * r.transpose();
        } else {
            const auto b = static_cast<Eigen::Index>(panel.month_offsets[s]);
            const auto e = static_cast<Eigen::Index>(panel.month_offsets[s + 1]);
            C = realized_covariance(panel.asset_returns_daily.middleRows(b, e - b));
        }
        for (Eigen::Index m = 0; m < M; ++m) {
            const auto& H = forecasts.at(order[static_cast<std::size_t>(m)])[static_cast<std::size_t>(t)].H_hat;
            ed(t, m) = loss_ed(C, H);
            fn(t, m) = loss_fn(C, H);
        }
    }

    std::vector<std::string> files{"fees.csv", "losses.csv", "loss_summary.csv", "mcs.csv", "portfolio_returns.csv",
                                   "portfolio_summary.csv", "weights.csv"};
    {
        auto out = csv::open_out(dir / "losses.csv");
        out << "month,model,ed,fn\n";
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index m = 0; m < M; ++m) {
                out << first[static_cast<std::size_t>(t)].month.str() << ',' << order[static_cast<std::size_t>(m)]
                    << ',' << csv::format(ed(t, m)) << ',' << csv::format(fn(t, m)) << '\n';
            }
        }
        auto summary = csv::open_out(dir / "loss_summary.csv");
        summary << "model,ed,fn\n";
        for (Eigen::Index m = 0; m < M; ++m) {
            summary << order[static_cast<std::size_t>(m)] << ',' << csv::format(ed.col(m).mean()) << ','
                    << csv::format(fn.col(m).mean()) << '\n';
        }
    }
    {
        auto out = csv::open_out(dir / "mcs.csv");
        out << "loss,block_length,model,average_loss,p_value,included\n";
        std::vector<std::size_t> blocks{config.mcs.block_length};
        for (const auto b : config.mcs.block_lengths) {
            if (std::find(blocks.begin(), blocks.end(), b) == blocks.end()) {
                blocks.push_back(b);
            }
        }
        if (n < 12) {
            spdlog::warn("backtest: {} out-of-sample months; MCS needs at least 12 and is skipped", n);
        } else {
            for (const auto& [name, losses] : {std::pair<const char*, const MatrixXd&>{"ED", ed}, {"FN", fn}}) {
                for (const auto b : blocks) {
                    McsOptions mo;
                    mo.confidence = config.mcs.confidence;
                    mo.block_length = b;
                    mo.replications = config.mcs.replications;
                    mo.seed = config.mcs.seed;
                    mo.workers = config.estimation.workers;
                    const McsResult res = model_confidence_set(losses, order, mo);
                    for (Eigen::Index m = 0; m < M; ++m) {
                        out << name << ',' << b << ',' << order[static_cast<std::size_t>(m)] << ','
                            << csv::format(res.average_loss(m)) << ',' << csv::format(res.p_values(m)) << ','
                            << (res.included[static_cast<std::size_t>(m)] ? "true" : "false") << '\n';
                    }
                }
            }
        }
    }
    {
        auto summary = csv::open_out(dir / "portfolio_summary.csv");
        summary << "model,constraint,ar,sd,ir,to,sp\n";
        auto returns = csv::open_out(dir / "portfolio_returns.csv");
        returns << "month,model,constraint,return,cumulative\n";
        auto weights_out = csv::open_out(dir / "weights.csv");
        weights_out << "month,model,constraint,asset,weight\n";
        auto fees = csv::open_out(dir / "fees.csv");
        fees << "constraint,gamma,from,to,fee_bps\n";
        for (const bool long_only : {false, true}) {
            const char* constraint = long_only ? "long_only" : "unconstrained";
            std::vector<VectorXd> model_returns;
            for (Eigen::Index m = 0; m < M; ++m) {
                const auto& label = order[static_cast<std::size_t>(m)];
                MatrixXd w(n, N);
                for (Eigen::Index t = 0; t < n; ++t) {
                    const auto& H = forecasts.at(label)[static_cast<std::size_t>(t)].H_hat;
                    w.row(t) = (long_only ? gmvp_weights_long_only(H) : gmvp_weights(H)).transpose();
                }
                const PortfolioTrack track = portfolio_track(w, realized);
                const auto& s = track.summary;
                summary << label << ',' << constraint << ',' << csv::format(s.ar) << ',' << csv::format(s.sd) << ','
                        << csv::format(s.ir) << ',' << csv::format(s.to) << ',' << csv::format(s.sp) << '\n';
                double value = 1.0;
                for (Eigen::Index t = 0; t < n; ++t) {
                    const std::string month = first[static_cast<std::size_t>(t)].month.str();
                    value *= 1.0 + track.returns(t);
                    returns << month << ',' << label << ',' << constraint << ',' << csv::format(track.returns(t))
                            << ',' << csv::format(value) << '\n';
                    for (Eigen::Index i = 0; i < N; ++i) {
                        weights_out << month << ',' << label << ',' << constraint << ','
                                    << panel.asset_names[static_cast<std::size_t>(i)] << ',' << csv::format(w(t, i))
                                    << '\n';
                    }
                }
                model_returns.push_back(track.returns);
            }
            for (const double gamma : config.evaluation.gammas) {
                for (Eigen::Index a = 0; a < M; ++a) {
                    for (Eigen::Index b = 0; b < M; ++b) {
                        if (a == b) {
                            continue;
                        }
                        const double fee = utility_fee(model_returns[static_cast<std::size_t>(a)],
                                                       model_returns[static_cast<std::size_t>(b)], gamma);
                        fees << constraint << ',' << csv::format(gamma) << ',' << order[static_cast<std::size_t>(a)]
                             << ',' << order[static_cast<std::size_t>(b)] << ',' << csv::format(fee * kBasisPoints)
                             << '\n';
                    }
                }
            }
        }
    }
    return files;
}

RunResult run(const std::string& command, const RunConfig& config) {
    static const std::vector<std::string> commands{"ingest", "estimate", "forecast", "backtest", "simulate",
                                                   "evaluate"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
        fail(ErrorCode::Config, "unknown command '" + command + "'");
    }
    const auto problems = validate(config);
    if (!problems.empty()) {
        std::string msg = std::to_string(problems.size()) + " config error(s)";
        for (const auto& p : problems) {
            msg += "\n  " + p;
        }
        fail(ErrorCode::Config, msg);
    }
    if (command != "simulate" && config.data.daily.empty()) {
        fail(ErrorCode::Config, "data.daily: required for " + command);
    }
    if (command != "simulate" && config.data.monthly_source == "file" && config.data.monthly.empty()) {
        fail(ErrorCode::Config, "data.monthly: required when data.monthly_source is file");
    }
    if (command == "evaluate" && config.evaluation.forecast_root.empty()) {
        fail(ErrorCode::Config, "evaluation.forecast_root: required for evaluate");
    }

    std::uint64_t h = fnv1a(command + "\n" + portable_settings(config).dump());
    for (const auto& f : input_files(command, config)) {
        h = fnv1a(read_bytes(f), h);
    }
    const std::string stamp = hex(h);
    RunResult result;
    result.run_dir = std::filesystem::path(config.output_dir) / (command + "-" + stamp.substr(0, 12));
    std::filesystem::create_directories(result.run_dir);
    const auto& dir = result.run_dir;
    spdlog::info("{}: writing to {}", command, dir.string());

    std::vector<std::string> files;
    if (command == "ingest") {
        files = run_ingest(dir, config);
    } else if (command == "estimate") {
        files = run_estimate(dir, config);
    } else if (command == "simulate") {
        files = run_simulate(dir, config);
    } else if (command == "forecast") {
        const ReturnPanel panel = load_configured_panel(config);
        std::vector<CovarianceForecast> unused;
        files = forecast_variant(dir, panel, config, variant_spec(config.variant), unused);
    } else if (command == "backtest") {
        const ReturnPanel panel = load_configured_panel(config);
        std::map<std::string, std::vector<CovarianceForecast>> forecasts;
        for (const auto& v : config.variants) {
            const auto f = forecast_variant(dir, panel, config, variant_spec(v), forecasts[v]);
            files.insert(files.end(), f.begin(), f.end());
        }
        const auto f = write_backtest_reports(dir, panel, forecasts, config.variants, config);
        files.insert(files.end(), f.begin(), f.end());
    } else {
        const ReturnPanel panel = load_configured_panel(config);
        const auto root = resolve_data_path(config.evaluation.forecast_root);
        std::map<std::string, std::vector<CovarianceForecast>> forecasts;
        for (const auto& v : config.variants) {
            forecasts[v] = read_forecast_store(root / v).forecasts;
        }
        files = write_backtest_reports(dir, panel, forecasts, config.variants, config);
    }
    write_manifest(dir, command, stamp, config, files);
    result.files = files;
    return result;
}

}  // namespace hdh
