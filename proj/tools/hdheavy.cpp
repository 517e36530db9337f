#include "hdheavy/common.hpp"
#include "hdheavy/config.hpp"
#include "hdheavy/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>
#include <utility>

namespace {

constexpr const char* kDescription = R"(hdheavy - hierarchical factor HEAVY covariance models

SYNOPSIS
    hdheavy <command> [--config FILE] [options]

COMMANDS
    ingest        build monthly realized measures from the daily panel
    estimate      fit the selected variant; writes parameters, fit reports, residual covariance
    forecast      rolling one-step covariance forecasts for the selected variant
    backtest      forecasts for every listed variant plus losses, MCS, portfolios and fees
    evaluate      losses, MCS, portfolios and fees from stored forecasts (evaluation.forecast_root)
    simulate      draw a synthetic panel from the default data-generating process
    print-config  print the effective configuration including every default

ENVIRONMENT
    HDHEAVY_DATA_DIR  base directory for relative data paths in the config

OUTPUT
    <output_dir>/<command>-<stamp>/ with manifest.json. The stamp hashes the settings and
    input bytes, so identical inputs reproduce the same directory and byte-identical files.

EXIT STATUS
    0 success, 2 configuration error, 1 any other failure. Errors are printed to stderr as
    one JSON object {"error": <code>, "message": <text>}.)";

int report(std::string_view code, const std::string& message, int status) {
    nlohmann::ordered_json j;
    j["error"] = code;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{kDescription, "hdheavy"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<std::string> variant;
    std::optional<unsigned> workers;
    std::optional<std::string> daily;
    std::optional<std::string> monthly;
    std::optional<std::uint64_t> seed;
    std::string log_level = "warn";
    app.add_option("-c,--config", config_path, "JSON config file (comments allowed)");
    app.add_option("-o,--output-dir", output_dir, "root directory for run outputs");
    app.add_option("--variant", variant, "model variant: 4F, FF, M or SYM");
    app.add_option("-j,--workers", workers, "worker threads for estimation and bootstrap");
    app.add_option("--daily", daily, "daily returns CSV");
    app.add_option("--monthly", monthly, "monthly returns CSV");
    app.add_option("--seed", seed, "seed for simulation, optimizer restarts and bootstrap");
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    const std::pair<const char*, const char*> commands[] = {
        {"ingest", "realized measures and summary statistics"},
        {"estimate", "fit the selected variant"},
        {"forecast", "rolling one-step forecasts for the selected variant"},
        {"backtest", "forecasts for every variant plus evaluation reports"},
        {"evaluate", "evaluation reports from stored forecasts"},
        {"simulate", "synthetic panel from the default process"},
        {"print-config", "effective configuration as JSON"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("config", e.what(), 2);
    }
    spdlog::set_level(spdlog::level::from_str(log_level));
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        hdh::RunConfig config = config_path.empty() ? hdh::RunConfig{} : hdh::load_config(config_path);
        if (output_dir) {
            config.output_dir = *output_dir;
        }
        if (variant) {
            config.variant = *variant;
        }
        if (workers) {
            config.estimation.workers = *workers;
        }
        if (daily) {
            config.data.daily = *daily;
        }
        if (monthly) {
            config.data.monthly = *monthly;
        }
        if (seed) {
            config.estimation.seed = *seed;
            config.mcs.seed = *seed;
            config.simulation.seed = *seed;
        }
        if (command == "print-config") {
            const auto problems = hdh::validate(config);
            if (!problems.empty()) {
                std::string msg = std::to_string(problems.size()) + " config error(s)";
                for (const auto& p : problems) {
                    msg += "\n  " + p;
                }
                hdh::fail(hdh::ErrorCode::Config, msg);
            }
            std::cout << hdh::to_json(config).dump(2) << '\n';
            return 0;
        }
        const hdh::RunResult result = hdh::run(command, config);
        std::cout << result.run_dir.string() << '\n';
        return 0;
    } catch (const hdh::Error& e) {
        const bool config_error = e.code() == hdh::ErrorCode::Config;
        return report(hdh::to_string(e.code()), e.what(), config_error ? 2 : 1);
    } catch (const std::exception& e) {
        return report("internal", e.what(), 1);
    }
}
