#include "hdheavy/panel.hpp"

#include "hdheavy/csv.hpp"

#include <fstream>
#include <istream>
#include <map>

namespace hdh {

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::string> keys;
    std::vector<std::size_t> line_numbers;
    std::vector<std::vector<std::optional<double>>> rows;
};

Table read_table(std::istream& in, const std::string& label) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto cells = csv::split(line);
        if (table.header.empty()) {
            if (cells.empty() || cells.front() != "date") {
                fail(ErrorCode::Schema, label + " line " + std::to_string(line_no) + ": header must start with 'date'");
            }
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            fail(ErrorCode::Schema, label + " line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(table.header.size()) + " columns, found " +
                                        std::to_string(cells.size()));
        }
        std::vector<std::optional<double>> values;
        values.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            try {
                values.push_back(csv::parse_number(cells[c]));
            } catch (const Error&) {
                fail(ErrorCode::Parse, label + " line " + std::to_string(line_no) + ", column '" +
                                           table.header[c] + "': not a number '" + cells[c] + "'");
            }
        }
        table.keys.push_back(cells.front());
        table.line_numbers.push_back(line_no);
        table.rows.push_back(std::move(values));
    }
    if (table.header.empty()) {
        fail(ErrorCode::Schema, label + ": empty file");
    }
    return table;
}

bool in_window(const YearMonth& ym, const IngestionConfig& config) {
    return (!config.start || ym >= *config.start) && (!config.end || ym <= *config.end);
}

double require_value(const Table& table, std::size_t row, std::size_t col, const std::string& label) {
    const auto& v = table.rows[row][col];
    if (!v) {
        fail(ErrorCode::Gap, label + " line " + std::to_string(table.line_numbers[row]) + ", column '" +
                                 table.header[col + 1] + "': missing value inside the sample window");
    }
    return *v;
}

}  // namespace

void ReturnPanel::validate() const {
    const std::size_t T = months();
    const std::size_t K = factors();
    const std::size_t N = assets();
    if (T == 0) {
        fail(ErrorCode::Input, "panel has no months");
    }
    if (month_offsets.size() != T + 1 || month_offsets.front() != 0 || month_offsets.back() != days()) {
        fail(ErrorCode::Dimension, "month offsets do not cover the daily rows");
    }
    if (static_cast<std::size_t>(factor_returns_daily.rows()) != days() ||
        static_cast<std::size_t>(factor_returns_daily.cols()) != K ||
        static_cast<std::size_t>(asset_returns_daily.rows()) != days() ||
        static_cast<std::size_t>(asset_returns_daily.cols()) != N ||
        static_cast<std::size_t>(factor_returns_monthly.rows()) != T ||
        static_cast<std::size_t>(factor_returns_monthly.cols()) != K ||
        static_cast<std::size_t>(asset_returns_monthly.rows()) != T ||
        static_cast<std::size_t>(asset_returns_monthly.cols()) != N) {
        fail(ErrorCode::Dimension, "panel matrices disagree with the calendar");
    }
    for (std::size_t t = 0; t < T; ++t) {
        if (days_in_month(t) < 2) {
            fail(ErrorCode::DegenerateMonth,
                 "month " + dates_monthly[t].str() + " has fewer than 2 daily observations");
        }
        if (t > 0 && dates_monthly[t] != dates_monthly[t - 1].next()) {
            fail(ErrorCode::Gap, "month " + dates_monthly[t - 1].next().str() + " is missing from the sample");
        }
        for (std::size_t d = month_offsets[t]; d < month_offsets[t + 1]; ++d) {
            if (dates_daily[d].year_month() != dates_monthly[t]) {
                fail(ErrorCode::Schema, "daily date " + dates_daily[d].str() + " filed under month " +
                                            dates_monthly[t].str());
            }
            if (d > 0 && !(dates_daily[d - 1] < dates_daily[d])) {
                fail(ErrorCode::Schema, "daily dates are not strictly increasing at " + dates_daily[d].str());
            }
        }
    }
    if (!factor_returns_daily.allFinite() || !asset_returns_daily.allFinite() ||
        !factor_returns_monthly.allFinite() || !asset_returns_monthly.allFinite()) {
        fail(ErrorCode::Gap, "panel contains non-finite returns");
    }
}

ReturnPanel ReturnPanel::with_factors(std::size_t k) const {
    if (k == 0 || k > factors()) {
        fail(ErrorCode::Input, "cannot select " + std::to_string(k) + " factors from a panel with " +
                                   std::to_string(factors()));
    }
    ReturnPanel out = *this;
    out.factor_names.resize(k);
    out.factor_returns_daily = factor_returns_daily.leftCols(static_cast<Eigen::Index>(k));
    out.factor_returns_monthly = factor_returns_monthly.leftCols(static_cast<Eigen::Index>(k));
    return out;
}

ReturnPanel ReturnPanel::slice(std::size_t first, std::size_t count) const {
    if (first + count > months() || count == 0) {
        fail(ErrorCode::Input, "month slice out of range");
    }
    ReturnPanel out;
    out.factor_names = factor_names;
    out.asset_names = asset_names;
    out.dates_monthly.assign(dates_monthly.begin() + static_cast<std::ptrdiff_t>(first),
                             dates_monthly.begin() + static_cast<std::ptrdiff_t>(first + count));
    const std::size_t d0 = month_offsets[first];
    const std::size_t d1 = month_offsets[first + count];
    out.dates_daily.assign(dates_daily.begin() + static_cast<std::ptrdiff_t>(d0),
                           dates_daily.begin() + static_cast<std::ptrdiff_t>(d1));
    for (std::size_t t = first; t <= first + count; ++t) {
        out.month_offsets.push_back(month_offsets[t] - d0);
    }
    const auto rd = static_cast<Eigen::Index>(d1 - d0);
    const auto rm = static_cast<Eigen::Index>(count);
    out.factor_returns_daily = factor_returns_daily.middleRows(static_cast<Eigen::Index>(d0), rd);
    out.asset_returns_daily = asset_returns_daily.middleRows(static_cast<Eigen::Index>(d0), rd);
    out.factor_returns_monthly = factor_returns_monthly.middleRows(static_cast<Eigen::Index>(first), rm);
    out.asset_returns_monthly = asset_returns_monthly.middleRows(static_cast<Eigen::Index>(first), rm);
    return out;
}

MatrixXd compound_monthly(const MatrixXd& daily, const std::vector<std::size_t>& month_offsets) {
    const auto T = static_cast<Eigen::Index>(month_offsets.size() - 1);
    MatrixXd out(T, daily.cols());
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index c = 0; c < daily.cols(); ++c) {
            double growth = 1.0;
            for (std::size_t d = month_offsets[static_cast<std::size_t>(t)];
                 d < month_offsets[static_cast<std::size_t>(t) + 1]; ++d) {
                growth *= 1.0 + daily(static_cast<Eigen::Index>(d), c);
            }
            out(t, c) = growth - 1.0;
        }
    }
    return out;
}

ReturnPanel parse_panel(std::istream& daily, std::istream* monthly, const IngestionConfig& config) {
    const Table table = read_table(daily, "daily CSV");
    const std::size_t n_series = table.header.size() - 1;
    if (config.factor_count == 0 || config.factor_count >= n_series) {
        fail(ErrorCode::Schema, "daily CSV has " + std::to_string(n_series) +
                                    " return columns; need factor_count (" + std::to_string(config.factor_count) +
                                    ") factors plus at least one asset");
    }
    const std::size_t K = config.factor_count;
    const std::size_t N = n_series - K;

    ReturnPanel panel;
    panel.factor_names.assign(table.header.begin() + 1, table.header.begin() + 1 + static_cast<std::ptrdiff_t>(K));
    panel.asset_names.assign(table.header.begin() + 1 + static_cast<std::ptrdiff_t>(K), table.header.end());

    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        Date date;
        try {
            date = Date::parse(table.keys[r]);
        } catch (const Error& e) {
            fail(ErrorCode::Parse, "daily CSV line " + std::to_string(table.line_numbers[r]) + ", column 'date': " +
                                       e.what());
        }
        if (!in_window(date.year_month(), config)) {
            continue;
        }
        if (!panel.dates_daily.empty() && !(panel.dates_daily.back() < date)) {
            fail(ErrorCode::Schema, "daily CSV line " + std::to_string(table.line_numbers[r]) +
                                        ": dates must be strictly increasing");
        }
        if (panel.dates_monthly.empty() || panel.dates_monthly.back() != date.year_month()) {
            if (!panel.dates_monthly.empty() && date.year_month() != panel.dates_monthly.back().next()) {
                fail(ErrorCode::Gap, "daily CSV line " + std::to_string(table.line_numbers[r]) + ": month " +
                                         panel.dates_monthly.back().next().str() + " has no observations");
            }
            panel.dates_monthly.push_back(date.year_month());
            panel.month_offsets.push_back(panel.dates_daily.size());
        }
        panel.dates_daily.push_back(date);
        kept.push_back(r);
    }
    if (kept.empty()) {
        fail(ErrorCode::Input, "no daily rows inside the sample window");
    }
    panel.month_offsets.push_back(panel.dates_daily.size());

    const auto Td = static_cast<Eigen::Index>(kept.size());
    panel.factor_returns_daily.resize(Td, static_cast<Eigen::Index>(K));
    panel.asset_returns_daily.resize(Td, static_cast<Eigen::Index>(N));
    for (Eigen::Index d = 0; d < Td; ++d) {
        const std::size_t r = kept[static_cast<std::size_t>(d)];
        for (std::size_t c = 0; c < n_series; ++c) {
            const double v = require_value(table, r, c, "daily CSV");
            if (c < K) {
                panel.factor_returns_daily(d, static_cast<Eigen::Index>(c)) = v;
            } else {
                panel.asset_returns_daily(d, static_cast<Eigen::Index>(c - K)) = v;
            }
        }
    }
    for (std::size_t t = 0; t < panel.months(); ++t) {
        if (panel.days_in_month(t) < 2) {
            fail(ErrorCode::DegenerateMonth,
                 "month " + panel.dates_monthly[t].str() + " has fewer than 2 daily observations");
        }
    }

    if (config.monthly_source == MonthlySource::Compound) {
        panel.factor_returns_monthly = compound_monthly(panel.factor_returns_daily, panel.month_offsets);
        panel.asset_returns_monthly = compound_monthly(panel.asset_returns_daily, panel.month_offsets);
    } else {
        if (monthly == nullptr) {
            fail(ErrorCode::Config, "monthly returns are read from file but no monthly CSV was given");
        }
        const Table mt = read_table(*monthly, "monthly CSV");
        if (mt.header != table.header) {
            fail(ErrorCode::Schema, "monthly CSV header must match the daily CSV header");
        }
        std::map<YearMonth, std::size_t> by_month;
        for (std::size_t r = 0; r < mt.rows.size(); ++r) {
            YearMonth ym;
            try {
                ym = YearMonth::parse(mt.keys[r]);
            } catch (const Error& e) {
                fail(ErrorCode::Parse, "monthly CSV line " + std::to_string(mt.line_numbers[r]) +
                                           ", column 'date': " + e.what());
            }
            if (!in_window(ym, config)) {
                continue;
            }
            if (!by_month.emplace(ym, r).second) {
                fail(ErrorCode::Schema, "monthly CSV line " + std::to_string(mt.line_numbers[r]) + ": duplicate month " +
                                            ym.str());
            }
        }
        if (by_month.size() != panel.months()) {
            fail(ErrorCode::Schema, "monthly CSV covers " + std::to_string(by_month.size()) +
                                        " months inside the window but the daily CSV covers " +
                                        std::to_string(panel.months()));
        }
        const auto T = static_cast<Eigen::Index>(panel.months());
        panel.factor_returns_monthly.resize(T, static_cast<Eigen::Index>(K));
        panel.asset_returns_monthly.resize(T, static_cast<Eigen::Index>(N));
        for (Eigen::Index t = 0; t < T; ++t) {
            const auto& ym = panel.dates_monthly[static_cast<std::size_t>(t)];
            const auto it = by_month.find(ym);
            if (it == by_month.end()) {
                fail(ErrorCode::Schema, "monthly CSV has no row for month " + ym.str());
            }
            for (std::size_t c = 0; c < n_series; ++c) {
                const double v = require_value(mt, it->second, c, "monthly CSV");
                if (c < K) {
                    panel.factor_returns_monthly(t, static_cast<Eigen::Index>(c)) = v;
                } else {
                    panel.asset_returns_monthly(t, static_cast<Eigen::Index>(c - K)) = v;
                }
            }
        }
    }
    panel.validate();
    return panel;
}

ReturnPanel load_panel(const std::filesystem::path& daily_path, const IngestionConfig& config) {
    auto daily = csv::open_in(daily_path);
    if (config.monthly_source == MonthlySource::File) {
        if (config.monthly_path.empty()) {
            fail(ErrorCode::Config, "monthly_source is 'file' but no monthly path was configured");
        }
        auto monthly = csv::open_in(config.monthly_path);
        return parse_panel(daily, &monthly, config);
    }
    return parse_panel(daily, nullptr, config);
}

void write_panel(const ReturnPanel& panel, const std::filesystem::path& daily_path,
                 const std::filesystem::path& monthly_path) {
    std::string header = "date";
    for (const auto& n : panel.factor_names) {
        header += "," + n;
    }
    for (const auto& n : panel.asset_names) {
        header += "," + n;
    }
    auto daily = csv::open_out(daily_path);
    daily << header << '\n';
    for (std::size_t d = 0; d < panel.days(); ++d) {
        daily << panel.dates_daily[d].str();
        const auto row = static_cast<Eigen::Index>(d);
        for (Eigen::Index c = 0; c < panel.factor_returns_daily.cols(); ++c) {
            daily << ',' << csv::format(panel.factor_returns_daily(row, c));
        }
        for (Eigen::Index c = 0; c < panel.asset_returns_daily.cols(); ++c) {
            daily << ',' << csv::format(panel.asset_returns_daily(row, c));
        }
        daily << '\n';
    }
    auto monthly = csv::open_out(monthly_path);
    monthly << header << '\n';
    for (std::size_t t = 0; t < panel.months(); ++t) {
        monthly << panel.dates_monthly[t].str();
        const auto row = static_cast<Eigen::Index>(t);
        for (Eigen::Index c = 0; c < panel.factor_returns_monthly.cols(); ++c) {
            monthly << ',' << csv::format(panel.factor_returns_monthly(row, c));
        }
        for (Eigen::Index c = 0; c < panel.asset_returns_monthly.cols(); ++c) {
            monthly << ',' << csv::format(panel.asset_returns_monthly(row, c));
        }
        monthly << '\n';
    }
}

}  // namespace hdh
