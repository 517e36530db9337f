#include "hdheavy/config.hpp"

#include "hdheavy/calendar.hpp"
#include "hdheavy/common.hpp"
#include "hdheavy/csv.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hdh {

VariantSpec variant_spec(std::string_view label) {
    if (label == "4F") {
        return {"4F", 4, false};
    }
    if (label == "FF") {
        return {"FF", 3, false};
    }
    if (label == "M") {
        return {"M", 1, false};
    }
    if (label == "SYM") {
        return {"SYM", 4, true};
    }
    fail(ErrorCode::Config, "unknown variant '" + std::string(label) + "' (expected 4F, FF, M or SYM)");
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["schema_version"] = c.schema_version;
    j["variant"] = c.variant;
    j["variants"] = c.variants;
    j["output_dir"] = c.output_dir;
    j["data"] = {{"daily", c.data.daily},
                 {"monthly", c.data.monthly},
                 {"monthly_source", c.data.monthly_source},
                 {"factor_count", c.data.factor_count},
                 {"start", c.data.start},
                 {"end", c.data.end}};
    j["estimation"] = {{"starts", c.estimation.starts},
                       {"max_evaluations", c.estimation.max_evaluations},
                       {"min_months", c.estimation.min_months},
                       {"workers", c.estimation.workers},
                       {"phi_lower", c.estimation.phi_lower},
                       {"phi_upper", c.estimation.phi_upper},
                       {"seed", c.estimation.seed}};
    j["forecast"] = {{"window", c.forecast.window},
                     {"refit_every", c.forecast.refit_every},
                     {"shrinkage", c.forecast.shrinkage}};
    j["evaluation"] = {{"proxy", c.evaluation.proxy},
                       {"gammas", c.evaluation.gammas},
                       {"forecast_root", c.evaluation.forecast_root}};
    j["mcs"] = {{"confidence", c.mcs.confidence},
                {"block_length", c.mcs.block_length},
                {"block_lengths", c.mcs.block_lengths},
                {"replications", c.mcs.replications},
                {"seed", c.mcs.seed}};
    j["simulation"] = {{"factors", c.simulation.factors},
                       {"assets", c.simulation.assets},
                       {"months", c.simulation.months},
                       {"days_per_month", c.simulation.days_per_month},
                       {"seed", c.simulation.seed}};
    return j;
}

namespace {

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    template <class T>
    void get(const nlohmann::json& obj, const std::string& section, const char* key, T& out) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            return;
        }
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            errors_.push_back(where(section, key) + ": wrong type (" + std::string(it->type_name()) + ")");
        }
    }

    void unsigned_get(const nlohmann::json& obj, const std::string& section, const char* key, std::size_t& out) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            return;
        }
        if (!it->is_number_unsigned()) {
            errors_.push_back(where(section, key) + ": expected a non-negative integer");
            return;
        }
        out = it->get<std::size_t>();
    }

    void unknown_keys(const nlohmann::json& obj, const std::string& section, const std::set<std::string>& known) {
        for (const auto& [k, v] : obj.items()) {
            (void)v;
            if (known.count(k) == 0) {
                errors_.push_back(where(section, k.c_str()) + ": unknown key");
            }
        }
    }

    const nlohmann::json* section(const nlohmann::json& root, const char* name) {
        const auto it = root.find(name);
        if (it == root.end()) {
            return nullptr;
        }
        if (!it->is_object()) {
            errors_.push_back(std::string(name) + ": expected an object");
            return nullptr;
        }
        return &*it;
    }

    static std::string where(const std::string& section, const char* key) {
        return section.empty() ? std::string(key) : section + "." + key;
    }

private:
    std::vector<std::string>& errors_;
};

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c;
    std::vector<std::string> errors;
    if (!j.is_object()) {
        fail(ErrorCode::Config, "config: top level must be an object");
    }
    Reader r(errors);
    r.unknown_keys(j, "", {"schema_version", "variant", "variants", "output_dir", "data", "estimation", "forecast",
                           "evaluation", "mcs", "simulation"});
    r.get(j, "", "schema_version", c.schema_version);
    r.get(j, "", "variant", c.variant);
    r.get(j, "", "variants", c.variants);
    r.get(j, "", "output_dir", c.output_dir);
    if (const auto* s = r.section(j, "data")) {
        r.unknown_keys(*s, "data", {"daily", "monthly", "monthly_source", "factor_count", "start", "end"});
        r.get(*s, "data", "daily", c.data.daily);
        r.get(*s, "data", "monthly", c.data.monthly);
        r.get(*s, "data", "monthly_source", c.data.monthly_source);
        r.unsigned_get(*s, "data", "factor_count", c.data.factor_count);
        r.get(*s, "data", "start", c.data.start);
        r.get(*s, "data", "end", c.data.end);
    }
    if (const auto* s = r.section(j, "estimation")) {
        r.unknown_keys(*s, "estimation",
                       {"starts", "max_evaluations", "min_months", "workers", "phi_lower", "phi_upper", "seed"});
        r.get(*s, "estimation", "starts", c.estimation.starts);
        r.get(*s, "estimation", "max_evaluations", c.estimation.max_evaluations);
        r.unsigned_get(*s, "estimation", "min_months", c.estimation.min_months);
        r.get(*s, "estimation", "workers", c.estimation.workers);
        r.get(*s, "estimation", "phi_lower", c.estimation.phi_lower);
        r.get(*s, "estimation", "phi_upper", c.estimation.phi_upper);
        r.get(*s, "estimation", "seed", c.estimation.seed);
    }
    if (const auto* s = r.section(j, "forecast")) {
        r.unknown_keys(*s, "forecast", {"window", "refit_every", "shrinkage"});
        r.unsigned_get(*s, "forecast", "window", c.forecast.window);
        r.unsigned_get(*s, "forecast", "refit_every", c.forecast.refit_every);
        r.get(*s, "forecast", "shrinkage", c.forecast.shrinkage);
    }
    if (const auto* s = r.section(j, "evaluation")) {
        r.unknown_keys(*s, "evaluation", {"proxy", "gammas", "forecast_root"});
        r.get(*s, "evaluation", "proxy", c.evaluation.proxy);
        r.get(*s, "evaluation", "gammas", c.evaluation.gammas);
        r.get(*s, "evaluation", "forecast_root", c.evaluation.forecast_root);
    }
    if (const auto* s = r.section(j, "mcs")) {
        r.unknown_keys(*s, "mcs", {"confidence", "block_length", "block_lengths", "replications", "seed"});
        r.get(*s, "mcs", "confidence", c.mcs.confidence);
        r.unsigned_get(*s, "mcs", "block_length", c.mcs.block_length);
        r.get(*s, "mcs", "block_lengths", c.mcs.block_lengths);
        r.unsigned_get(*s, "mcs", "replications", c.mcs.replications);
        r.get(*s, "mcs", "seed", c.mcs.seed);
    }
    if (const auto* s = r.section(j, "simulation")) {
        r.unknown_keys(*s, "simulation", {"factors", "assets", "months", "days_per_month", "seed"});
        r.unsigned_get(*s, "simulation", "factors", c.simulation.factors);
        r.unsigned_get(*s, "simulation", "assets", c.simulation.assets);
        r.unsigned_get(*s, "simulation", "months", c.simulation.months);
        r.unsigned_get(*s, "simulation", "days_per_month", c.simulation.days_per_month);
        r.get(*s, "simulation", "seed", c.simulation.seed);
    }
    const auto semantic = validate(c);
    errors.insert(errors.end(), semantic.begin(), semantic.end());
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << errors.size() << " config error(s)";
        for (const auto& e : errors) {
            msg << "\n  " << e;
        }
        fail(ErrorCode::Config, msg.str());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    auto in = csv::open_in(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Config, path + ": " + e.what());
    }
    return parse_config(j);
}

std::vector<std::string> validate(const RunConfig& c) {
    std::vector<std::string> e;
    if (c.schema_version != kSchemaVersion) {
        e.push_back("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                    std::to_string(c.schema_version));
    }
    const auto check_variant = [&](const std::string& field, const std::string& v) {
        try {
            const auto spec = variant_spec(v);
            if (spec.factors > c.data.factor_count) {
                e.push_back(field + ": variant " + v + " needs " + std::to_string(spec.factors) +
                            " factors but data.factor_count is " + std::to_string(c.data.factor_count));
            }
        } catch (const Error& err) {
            e.push_back(field + ": " + err.what());
        }
    };
    check_variant("variant", c.variant);
    if (c.variants.empty()) {
        e.push_back("variants: at least one variant required");
    }
    std::set<std::string> seen;
    for (const auto& v : c.variants) {
        check_variant("variants", v);
        if (!seen.insert(v).second) {
            e.push_back("variants: duplicate entry '" + v + "'");
        }
    }
    if (c.output_dir.empty()) {
        e.push_back("output_dir: must not be empty");
    }
    if (c.data.monthly_source != "file" && c.data.monthly_source != "compound") {
        e.push_back("data.monthly_source: expected file or compound");
    }
    if (c.data.factor_count == 0) {
        e.push_back("data.factor_count: must be positive");
    }
    for (const auto* field : {&c.data.start, &c.data.end}) {
        if (!field->empty()) {
            try {
                (void)YearMonth::parse(*field);
            } catch (const Error&) {
                e.push_back(std::string(field == &c.data.start ? "data.start" : "data.end") + ": expected YYYY-MM");
            }
        }
    }
    if (c.estimation.starts < 1) {
        e.push_back("estimation.starts: must be at least 1");
    }
    if (c.estimation.max_evaluations < 10) {
        e.push_back("estimation.max_evaluations: must be at least 10");
    }
    if (c.estimation.min_months < 2) {
        e.push_back("estimation.min_months: must be at least 2");
    }
    if (c.estimation.workers < 1) {
        e.push_back("estimation.workers: must be at least 1");
    }
    if (!(c.estimation.phi_upper > c.estimation.phi_lower)) {
        e.push_back("estimation.phi_upper: must exceed phi_lower");
    }
    if (c.forecast.window < c.estimation.min_months) {
        e.push_back("forecast.window: shorter than estimation.min_months");
    }
    if (c.forecast.refit_every == 0) {
        e.push_back("forecast.refit_every: must be positive");
    }
    if (c.forecast.shrinkage != "nonlinear" && c.forecast.shrinkage != "linear") {
        e.push_back("forecast.shrinkage: expected nonlinear or linear");
    }
    if (c.evaluation.proxy != "outer" && c.evaluation.proxy != "realized") {
        e.push_back("evaluation.proxy: expected outer or realized");
    }
    for (const double g : c.evaluation.gammas) {
        if (!(g > 0.0)) {
            e.push_back("evaluation.gammas: every gamma must be positive");
            break;
        }
    }
    if (!(c.mcs.confidence > 0.0 && c.mcs.confidence < 1.0)) {
        e.push_back("mcs.confidence: must lie in (0, 1)");
    }
    if (c.mcs.block_length == 0) {
        e.push_back("mcs.block_length: must be positive");
    }
    for (const auto b : c.mcs.block_lengths) {
        if (b == 0) {
            e.push_back("mcs.block_lengths: entries must be positive");
            break;
        }
    }
    if (c.mcs.replications < 100) {
        e.push_back("mcs.replications: must be at least 100");
    }
    if (c.simulation.factors == 0 || c.simulation.assets == 0) {
        e.push_back("simulation: factors and assets must be positive");
    }
    if (c.simulation.months < 2) {
        e.push_back("simulation.months: must be at least 2");
    }
    if (c.simulation.days_per_month < 2 || c.simulation.days_per_month > 28) {
        e.push_back("simulation.days_per_month: must lie in [2, 28]");
    }
    return e;
}

}  // namespace hdh
