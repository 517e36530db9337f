#include "hdheavy/serialization.hpp"

#include "hdheavy/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace hdh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCap = 0.999;

std::string fmt(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return csv::format(v);
}

double parse_double(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
    if (cell == "inf") {
        return kInf;
    }
    if (cell == "-inf") {
        return -kInf;
    }
    const auto v = csv::parse_number(cell);
    if (!v) {
        fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line) + ": missing number");
    }
    return *v;
}

std::size_t parse_index(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line) + ": bad index '" + cell + "'");
    }
    return v;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, const std::string& header) {
    auto in = csv::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != header) {
        fail(ErrorCode::Schema, path.string() + ": expected header '" + header + "'");
    }
    std::vector<std::vector<std::string>> rows;
    const std::size_t width = csv::split(header).size();
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        auto cells = csv::split(line);
        if (cells.size() != width) {
            fail(ErrorCode::Schema, path.string() + ":" + std::to_string(number) + ": expected " +
                                        std::to_string(width) + " columns");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

const char* bool_text(bool b) {
    return b ? "true" : "false";
}

}  // namespace

std::vector<ParameterRecord> core_parameter_records(const CoreModelParams& p) {
    std::vector<ParameterRecord> r;
    const std::size_t K = p.factors();
    const auto per_factor = [&](const char* name, const VectorXd& v, double lo, double hi) {
        for (std::size_t k = 0; k < K; ++k) {
            r.push_back({"core", name, k, v(static_cast<Eigen::Index>(k)), lo, hi});
        }
    };
    per_factor("w_h", p.w_h, 0.0, kInf);
    per_factor("a_h_pos", p.a_h_pos, 0.0, 1.0);
    per_factor("a_h_neg", p.a_h_neg, 0.0, 1.0);
    per_factor("b_h", p.b_h, 0.0, kCap);
    r.push_back({"core", "alpha_R", std::nullopt, p.alpha_R, 0.0, 1.0});
    r.push_back({"core", "beta_R", std::nullopt, p.beta_R, 0.0, kCap});
    per_factor("w_m", p.w_m, 0.0, kInf);
    per_factor("a_m_pos", p.a_m_pos, 0.0, 1.0);
    per_factor("a_m_neg", p.a_m_neg, 0.0, 1.0);
    per_factor("b_m", p.b_m, 0.0, kCap);
    r.push_back({"core", "alpha_P", std::nullopt, p.alpha_P, 0.0, 1.0});
    r.push_back({"core", "beta_P", std::nullopt, p.beta_P, 0.0, kCap});
    return r;
}

std::vector<ParameterRecord> asset_parameter_records(const std::string& ticker, const AssetModelParams& p,
                                                     double phi_lower, double phi_upper) {
    return {
        {ticker, "c_h", std::nullopt, p.c_h, 0.0, kInf},
        {ticker, "a_h_pos", std::nullopt, p.a_h_pos, 0.0, 1.0},
        {ticker, "a_h_neg", std::nullopt, p.a_h_neg, 0.0, 1.0},
        {ticker, "b_h", std::nullopt, p.b_h, 0.0, kCap},
        {ticker, "c_m", std::nullopt, p.c_m, 0.0, kInf},
        {ticker, "a_m_pos", std::nullopt, p.a_m_pos, 0.0, 1.0},
        {ticker, "a_m_neg", std::nullopt, p.a_m_neg, 0.0, 1.0},
        {ticker, "b_m", std::nullopt, p.b_m, 0.0, kCap},
        {ticker, "phi_R", std::nullopt, p.phi_R, phi_lower, phi_upper},
        {ticker, "alpha_R", std::nullopt, p.alpha_R, 0.0, 1.0},
        {ticker, "beta_R", std::nullopt, p.beta_R, 0.0, kCap},
        {ticker, "phi_P", std::nullopt, p.phi_P, phi_lower, phi_upper},
        {ticker, "alpha_P", std::nullopt, p.alpha_P, 0.0, 1.0},
        {ticker, "beta_P", std::nullopt, p.beta_P, 0.0, kCap},
    };
}

void write_parameter_records(const std::filesystem::path& path, const std::vector<ParameterRecord>& records) {
    auto out = csv::open_out(path);
    out << "block,name,index,value,lower,upper\n";
    for (const auto& r : records) {
        out << r.block << ',' << r.name << ',' << (r.index ? std::to_string(*r.index) : std::string()) << ','
            << fmt(r.value) << ',' << fmt(r.lower) << ',' << fmt(r.upper) << '\n';
    }
}

std::vector<ParameterRecord> read_parameter_records(const std::filesystem::path& path) {
    std::vector<ParameterRecord> records;
    std::size_t line = 1;
    for (const auto& c : read_rows(path, "block,name,index,value,lower,upper")) {
        ++line;
        ParameterRecord r;
        r.block = c[0];
        r.name = c[1];
        if (!c[2].empty()) {
            r.index = parse_index(c[2], path, line);
        }
        r.value = parse_double(c[3], path, line);
        r.lower = parse_double(c[4], path, line);
        r.upper = parse_double(c[5], path, line);
        records.push_back(std::move(r));
    }
    return records;
}

void write_model(const std::filesystem::path& parameters_path, const std::filesystem::path& moments_path,
                 const CoreModelParams& core, const std::vector<std::string>& asset_names, const std::vector<AssetModelParams>& assets,
                 double phi_lower, double phi_upper) {
    auto records = core_parameter_records(core);
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto a = asset_parameter_records(asset_names[i], assets[i], phi_lower, phi_upper);
        records.insert(records.end(), a.begin(), a.end());
    }
    write_parameter_records(parameters_path, records);

    auto out = csv::open_out(moments_path);
    out << "block,name,row,col,value\n";
    out << "core,symmetric,0,0," << (core.symmetric ? 1 : 0) << '\n';
    const auto matrix = [&](const std::string& block, const char* name, const MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                out << block << ',' << name << ',' << i << ',' << j << ',' << fmt(m(i, j)) << '\n';
            }
        }
    };
    matrix("core", "R_bar", core.R_bar);
    matrix("core", "P_bar", core.P_bar);
    matrix("core", "h_init", core.h_init);
    matrix("core", "m_init", core.m_init);
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& a = assets[i];
        matrix(asset_names[i], "h_init", MatrixXd::Constant(1, 1, a.h_init));
        matrix(asset_names[i], "m_init", MatrixXd::Constant(1, 1, a.m_init));
        matrix(asset_names[i], "rho_init", a.rho_init);
        matrix(asset_names[i], "p_init", a.p_init);
    }
}

StoredModel read_model(const std::filesystem::path& parameters_path, const std::filesystem::path& moments_path) {
    StoredModel model;
    std::map<std::string, std::size_t> asset_index;
    auto& c = model.core;
    std::size_t K = 0;
    const auto records = read_parameter_records(parameters_path);
    for (const auto& r : records) {
        if (r.block == "core" && r.index) {
            K = std::max(K, *r.index + 1);
        }
    }
    const auto Ki = static_cast<Eigen::Index>(K);
    for (VectorXd* v : {&c.w_h, &c.a_h_pos, &c.a_h_neg, &c.b_h, &c.w_m, &c.a_m_pos, &c.a_m_neg, &c.b_m, &c.h_init,
                        &c.m_init}) {
        v->setZero(Ki);
    }
    c.R_bar = MatrixXd::Identity(Ki, Ki);
    c.P_bar = MatrixXd::Identity(Ki, Ki);
    const std::map<std::string, VectorXd*> core_vectors{{"w_h", &c.w_h},         {"a_h_pos", &c.a_h_pos},
                                                        {"a_h_neg", &c.a_h_neg}, {"b_h", &c.b_h},
                                                        {"w_m", &c.w_m},         {"a_m_pos", &c.a_m_pos},
                                                        {"a_m_neg", &c.a_m_neg}, {"b_m", &c.b_m}};
    const std::map<std::string, double*> core_scalars{
        {"alpha_R", &c.alpha_R}, {"beta_R", &c.beta_R}, {"alpha_P", &c.alpha_P}, {"beta_P", &c.beta_P}};
    const auto asset = [&](const std::string& name) -> AssetModelParams& {
        auto it = asset_index.find(name);
        if (it == asset_index.end()) {
            it = asset_index.emplace(name, model.assets.size()).first;
            model.asset_names.push_back(name);
            model.assets.emplace_back();
        }
        return model.assets[it->second];
    };
    for (const auto& r : records) {
        if (r.block == "core") {
            if (r.index) {
                const auto it = core_vectors.find(r.name);
                if (it == core_vectors.end()) {
                    fail(ErrorCode::Schema, "unknown core parameter '" + r.name + "'");
                }
                (*it->second)(static_cast<Eigen::Index>(*r.index)) = r.value;
            } else {
                const auto it = core_scalars.find(r.name);
                if (it == core_scalars.end()) {
                    fail(ErrorCode::Schema, "unknown core parameter '" + r.name + "'");
                }
                *it->second = r.value;
            }
            continue;
        }
        AssetModelParams& a = asset(r.block);
        const std::map<std::string, double*> fields{
            {"c_h", &a.c_h},         {"a_h_pos", &a.a_h_pos}, {"a_h_neg", &a.a_h_neg}, {"b_h", &a.b_h},
            {"c_m", &a.c_m},         {"a_m_pos", &a.a_m_pos}, {"a_m_neg", &a.a_m_neg}, {"b_m", &a.b_m},
            {"phi_R", &a.phi_R},     {"alpha_R", &a.alpha_R}, {"beta_R", &a.beta_R},   {"phi_P", &a.phi_P},
            {"alpha_P", &a.alpha_P}, {"beta_P", &a.beta_P}};
        const auto it = fields.find(r.name);
        if (it == fields.end()) {
            fail(ErrorCode::Schema, "unknown asset parameter '" + r.name + "'");
        }
        *it->second = r.value;
    }
    for (auto& a : model.assets) {
        a.rho_init.setZero(Ki);
        a.p_init.setZero(Ki);
    }

    std::size_t line = 1;
    for (const auto& row : read_rows(moments_path, "block,name,row,col,value")) {
        ++line;
        const auto i = static_cast<Eigen::Index>(parse_index(row[2], moments_path, line));
        const auto j = static_cast<Eigen::Index>(parse_index(row[3], moments_path, line));
        const double v = parse_double(row[4], moments_path, line);
        const auto check = [&](Eigen::Index rows, Eigen::Index cols) {
            if (i >= rows || j >= cols) {
                fail(ErrorCode::Schema, moments_path.string() + ":" + std::to_string(line) + ": index out of range");
            }
        };
        const std::string& name = row[1];
        if (row[0] == "core") {
            if (name == "symmetric") {
                c.symmetric = v != 0.0;
            } else if (name == "R_bar" || name == "P_bar") {
                check(Ki, Ki);
                (name == "R_bar" ? c.R_bar : c.P_bar)(i, j) = v;
            } else if (name == "h_init" || name == "m_init") {
                check(Ki, 1);
                (name == "h_init" ? c.h_init : c.m_init)(i) = v;
            } else {
                fail(ErrorCode::Schema, "unknown core moment '" + name + "'");
            }
            continue;
        }
        AssetModelParams& a = asset(row[0]);
        if (name == "h_init") {
            a.h_init = v;
        } else if (name == "m_init") {
            a.m_init = v;
        } else if (name == "rho_init" || name == "p_init") {
            check(Ki, 1);
            (name == "rho_init" ? a.rho_init : a.p_init)(i) = v;
        } else {
            fail(ErrorCode::Schema, "unknown asset moment '" + name + "'");
        }
    }
    for (auto& a : model.assets) {
        a.symmetric = c.symmetric;
    }
    return model;
}

void write_fit_summary(const std::filesystem::path& path, const std::vector<std::string>& labels,
                       const std::vector<FitReport>& reports) {
    auto out = csv::open_out(path);
    out << "model,llf,aic,bic,parameters,observations,converged\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out << labels[i] << ',' << fmt(r.llf) << ',' << fmt(r.aic()) << ',' << fmt(r.bic()) << ',' << r.parameters
            << ',' << r.observations << ',' << bool_text(r.converged) << '\n';
    }
}

void write_fit_stages(const std::filesystem::path& path, const std::string& label, const FitReport& core,
                      const std::vector<std::string>& asset_names, const std::vector<FitReport>& assets) {
    auto out = csv::open_out(path);
    out << "model,block,stage,llf,start_llf,parameters,evaluations,converged\n";
    const auto emit = [&](const std::string& block, const FitReport& r) {
        for (const auto& s : r.stages) {
            out << label << ',' << block << ',' << s.name << ',' << fmt(s.llf) << ',' << fmt(s.start_llf) << ','
                << s.parameters << ',' << s.evaluations << ',' << bool_text(s.converged) << '\n';
        }
    };
    emit("core", core);
    for (std::size_t i = 0; i < assets.size(); ++i) {
        emit(asset_names[i], assets[i]);
    }
}

void write_matrix(const std::filesystem::path& path, const MatrixXd& m, const std::vector<std::string>& row_names,
                  const std::vector<std::string>& col_names) {
    auto out = csv::open_out(path);
    out << "name";
    for (const auto& c : col_names) {
        out << ',' << c;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << row_names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << ',' << fmt(m(i, j));
        }
        out << '\n';
    }
}

void write_eigen_table(const std::filesystem::path& path, const ResidualCovariance& residual) {
    auto out = csv::open_out(path);
    out << "index,original,shrunk\n";
    for (Eigen::Index i = 0; i < residual.eigen_original.size(); ++i) {
        out << i << ',' << fmt(residual.eigen_original(i)) << ',' << fmt(residual.eigen_shrunk(i)) << '\n';
    }
}

void write_forecast_store(const std::filesystem::path& directory, const std::string& variant,
                          const std::vector<CovarianceForecast>& forecasts, std::size_t assets, std::size_t factors) {
    auto manifest = csv::open_out(directory / "manifest.csv");
    manifest << "month,variant,file,assets,factors,refit,carried_forward\n";
    for (const auto& f : forecasts) {
        const std::string file = f.month.str() + ".csv";
        manifest << f.month.str() << ',' << variant << ',' << file << ',' << assets << ',' << factors << ','
                 << bool_text(f.refit) << ',' << bool_text(f.carried_forward) << '\n';
        auto out = csv::open_out(directory / file);
        out << "block,row,col,value\n";
        const auto lower = [&](const char* block, const MatrixXd& m) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                for (Eigen::Index i = j; i < m.rows(); ++i) {
                    out << block << ',' << i << ',' << j << ',' << fmt(m(i, j)) << '\n';
                }
            }
        };
        lower("H", f.H_hat);
        lower("Hc", f.H_factor);
        for (Eigen::Index i = 0; i < f.B_next.rows(); ++i) {
            for (Eigen::Index k = 0; k < f.B_next.cols(); ++k) {
                out << "B," << i << ',' << k << ',' << fmt(f.B_next(i, k)) << '\n';
            }
        }
        lower("Sigma", f.sigma_resid);
    }
}

ForecastStore read_forecast_store(const std::filesystem::path& directory) {
    ForecastStore store;
    const auto manifest = directory / "manifest.csv";
    std::size_t line = 1;
    for (const auto& row : read_rows(manifest, "month,variant,file,assets,factors,refit,carried_forward")) {
        ++line;
        store.variant = row[1];
        const auto N = static_cast<Eigen::Index>(parse_index(row[3], manifest, line));
        const auto K = static_cast<Eigen::Index>(parse_index(row[4], manifest, line));
        CovarianceForecast f;
        f.month = YearMonth::parse(row[0]);
        f.refit = row[5] == "true";
        f.carried_forward = row[6] == "true";
        f.H_hat = MatrixXd::Zero(N, N);
        f.H_factor = MatrixXd::Zero(K, K);
        f.B_next = MatrixXd::Zero(N, K);
        f.sigma_resid = MatrixXd::Zero(N, N);
        const auto path = directory / row[2];
        std::size_t inner = 1;
        for (const auto& cell : read_rows(path, "block,row,col,value")) {
            ++inner;
            const auto i = static_cast<Eigen::Index>(parse_index(cell[1], path, inner));
            const auto j = static_cast<Eigen::Index>(parse_index(cell[2], path, inner));
            const double v = parse_double(cell[3], path, inner);
            MatrixXd* target = nullptr;
            bool symmetric = true;
            if (cell[0] == "H") {
                target = &f.H_hat;
            } else if (cell[0] == "Hc") {
                target = &f.H_factor;
            } else if (cell[0] == "Sigma") {
                target = &f.sigma_resid;
            } else if (cell[0] == "B") {
                target = &f.B_next;
                symmetric = false;
            } else {
                fail(ErrorCode::Schema, path.string() + ": unknown block '" + cell[0] + "'");
            }
            if (i >= target->rows() || j >= target->cols()) {
                fail(ErrorCode::Schema, path.string() + ":" + std::to_string(inner) + ": index out of range");
            }
            (*target)(i, j) = v;
            if (symmetric) {
                (*target)(j, i) = v;
            }
        }
        store.forecasts.push_back(std::move(f));
    }
    return store;
}

}  // namespace hdh
