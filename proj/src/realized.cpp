#include "hdheavy/realized.hpp"

#include "hdheavy/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace hdh {

namespace {

void require_observations(std::size_t n) {
    if (n < 2) {
        fail(ErrorCode::DegenerateMonth, "need at least 2 daily observations, got " + std::to_string(n));
    }
}

std::span<const double> column_days(const MatrixXd& daily, Eigen::Index col, std::size_t begin, std::size_t end) {
    return {daily.data() + col * daily.rows() + static_cast<Eigen::Index>(begin), end - begin};
}

std::vector<std::size_t> sorted_order(const std::vector<std::string>& names) {
    std::vector<std::size_t> idx(names.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    return idx;
}

MatrixXd take_rows(const MatrixXd& m, std::size_t first, std::size_t count) {
    return m.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
}

}  // namespace

Semivariances signed_semivariances(std::span<const double> daily) {
    require_observations(daily.size());
    Semivariances s;
    for (double r : daily) {
        if (r > 0.0) {
            s.pos += r * r;
        } else {
            s.neg += r * r;
        }
    }
    return s;
}

double realized_variance(std::span<const double> daily) {
    const auto s = signed_semivariances(daily);
    return s.pos + s.neg;
}

MatrixXd realized_covariance(const Eigen::Ref<const MatrixXd>& daily) {
    require_observations(static_cast<std::size_t>(daily.rows()));
    const Eigen::Index d = daily.cols();
    MatrixXd rc = MatrixXd::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < daily.rows(); ++j) {
                sum += daily(j, a) * daily(j, b);
            }
            rc(a, b) = sum;
            rc(b, a) = sum;
        }
    }
    // Same accumulation as realized_variance so the diagonal matches it bit for bit.
    for (Eigen::Index a = 0; a < d; ++a) {
        double pos = 0.0;
        double neg = 0.0;
        for (Eigen::Index j = 0; j < daily.rows(); ++j) {
            const double r = daily(j, a);
            (r > 0.0 ? pos : neg) += r * r;
        }
        rc(a, a) = pos + neg;
    }
    return rc;
}

MatrixXd realized_correlation_matrix(const Eigen::Ref<const MatrixXd>& daily) {
    const MatrixXd rc = realized_covariance(daily);
    for (Eigen::Index a = 0; a < rc.rows(); ++a) {
        if (!(rc(a, a) > 0.0)) {
            fail(ErrorCode::DegenerateMonth,
                 "series " + std::to_string(a) + " has zero realized variance; correlation undefined");
        }
    }
    return to_correlation(rc);
}

RealizedMeasures RealizedMeasures::slice(std::size_t first, std::size_t count) const {
    if (first + count > months_count() || count == 0) {
        fail(ErrorCode::Input, "measure slice out of range");
    }
    RealizedMeasures out;
    out.months.assign(months.begin() + static_cast<std::ptrdiff_t>(first),
                      months.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.factor_names = factor_names;
    out.asset_names = asset_names;
    out.rv_factors = take_rows(rv_factors, first, count);
    out.semivar_pos = take_rows(semivar_pos, first, count);
    out.semivar_neg = take_rows(semivar_neg, first, count);
    out.rc_factors.assign(rc_factors.begin() + static_cast<std::ptrdiff_t>(first),
                          rc_factors.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.rl_factors.assign(rl_factors.begin() + static_cast<std::ptrdiff_t>(first),
                          rl_factors.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.rv_assets = take_rows(rv_assets, first, count);
    out.semivar_pos_assets = take_rows(semivar_pos_assets, first, count);
    out.semivar_neg_assets = take_rows(semivar_neg_assets, first, count);
    for (const auto& m : rc_asset_factor) {
        out.rc_asset_factor.push_back(take_rows(m, first, count));
    }
    for (const auto& m : rl_asset_factor) {
        out.rl_asset_factor.push_back(take_rows(m, first, count));
    }
    out.gjr_pos_factors = take_rows(gjr_pos_factors, first, count);
    out.gjr_neg_factors = take_rows(gjr_neg_factors, first, count);
    out.gjr_pos_assets = take_rows(gjr_pos_assets, first, count);
    out.gjr_neg_assets = take_rows(gjr_neg_assets, first, count);
    return out;
}

RealizedMeasures build_measures(const ReturnPanel& panel) {
    const auto T = static_cast<Eigen::Index>(panel.months());
    const auto K = static_cast<Eigen::Index>(panel.factors());
    const auto N = static_cast<Eigen::Index>(panel.assets());

    RealizedMeasures m;
    m.months = panel.dates_monthly;
    m.factor_names = panel.factor_names;
    m.asset_names = panel.asset_names;
    m.rv_factors.resize(T, K);
    m.semivar_pos.resize(T, K);
    m.semivar_neg.resize(T, K);
    m.rv_assets.resize(T, N);
    m.semivar_pos_assets.resize(T, N);
    m.semivar_neg_assets.resize(T, N);
    m.rc_asset_factor.assign(static_cast<std::size_t>(N), MatrixXd(T, K));
    m.rl_asset_factor.assign(static_cast<std::size_t>(N), MatrixXd(T, K));
    m.rc_factors.reserve(static_cast<std::size_t>(T));
    m.rl_factors.reserve(static_cast<std::size_t>(T));

    for (Eigen::Index t = 0; t < T; ++t) {
        const std::size_t b = panel.month_offsets[static_cast<std::size_t>(t)];
        const std::size_t e = panel.month_offsets[static_cast<std::size_t>(t) + 1];
        const auto label = panel.dates_monthly[static_cast<std::size_t>(t)].str();
        try {
            for (Eigen::Index k = 0; k < K; ++k) {
                const auto s = signed_semivariances(column_days(panel.factor_returns_daily, k, b, e));
                m.semivar_pos(t, k) = s.pos;
                m.semivar_neg(t, k) = s.neg;
                m.rv_factors(t, k) = s.pos + s.neg;
            }
            for (Eigen::Index i = 0; i < N; ++i) {
                const auto s = signed_semivariances(column_days(panel.asset_returns_daily, i, b, e));
                m.semivar_pos_assets(t, i) = s.pos;
                m.semivar_neg_assets(t, i) = s.neg;
                m.rv_assets(t, i) = s.pos + s.neg;
            }
        } catch (const Error& err) {
            fail(ErrorCode::DegenerateMonth, "month " + label + ": " + err.what());
        }

        const auto rows = static_cast<Eigen::Index>(e - b);
        const auto factor_block = panel.factor_returns_daily.middleRows(static_cast<Eigen::Index>(b), rows);
        MatrixXd rc = realized_covariance(factor_block);
        for (Eigen::Index k = 0; k < K; ++k) {
            if (!(rc(k, k) > 0.0)) {
                fail(ErrorCode::DegenerateMonth, "month " + label + ": factor '" +
                                                     panel.factor_names[static_cast<std::size_t>(k)] +
                                                     "' has zero realized variance");
            }
        }
        m.rl_factors.push_back(to_correlation(rc));
        m.rc_factors.push_back(std::move(rc));

        for (Eigen::Index i = 0; i < N; ++i) {
            const double vi = m.rv_assets(t, i);
            if (!(vi > 0.0)) {
                fail(ErrorCode::DegenerateMonth, "month " + label + ": asset '" +
                                                     panel.asset_names[static_cast<std::size_t>(i)] +
                                                     "' has zero realized variance");
            }
            auto& rc_i = m.rc_asset_factor[static_cast<std::size_t>(i)];
            auto& rl_i = m.rl_asset_factor[static_cast<std::size_t>(i)];
            for (Eigen::Index k = 0; k < K; ++k) {
                double sum = 0.0;
                for (Eigen::Index j = 0; j < rows; ++j) {
                    sum += panel.asset_returns_daily(static_cast<Eigen::Index>(b) + j, i) *
                           panel.factor_returns_daily(static_cast<Eigen::Index>(b) + j, k);
                }
                rc_i(t, k) = sum;
                rl_i(t, k) = sum / std::sqrt(vi * m.rv_factors(t, k));
            }
        }
    }

    const auto gjr = [](const MatrixXd& rv, const MatrixXd& monthly, bool positive) {
        MatrixXd out = rv;
        for (Eigen::Index t = 0; t < rv.rows(); ++t) {
            for (Eigen::Index c = 0; c < rv.cols(); ++c) {
                const bool up = monthly(t, c) > 0.0;
                out(t, c) = up == positive ? rv(t, c) : 0.0;
            }
        }
        return out;
    };
    m.gjr_pos_factors = gjr(m.rv_factors, panel.factor_returns_monthly, true);
    m.gjr_neg_factors = gjr(m.rv_factors, panel.factor_returns_monthly, false);
    m.gjr_pos_assets = gjr(m.rv_assets, panel.asset_returns_monthly, true);
    m.gjr_neg_assets = gjr(m.rv_assets, panel.asset_returns_monthly, false);
    return m;
}

std::vector<SummaryRow> summarize_measures(const ReturnPanel& panel, const RealizedMeasures& m) {
    std::vector<SummaryRow> rows;
    const auto add = [&](const std::string& series, const std::string& stat, const VectorXd& x) {
        rows.push_back({series, stat, mean(x) * kAnnualizedPercent, stddev(x) * kAnnualizedPercent});
    };
    const auto add_group = [&](const std::vector<std::string>& names, const MatrixXd& monthly, const MatrixXd& rv,
                               const MatrixXd& pos, const MatrixXd& neg, const MatrixXd& gp, const MatrixXd& gn) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            const auto j = static_cast<Eigen::Index>(c);
            add(names[c], "r2", monthly.col(j).array().square().matrix());
            add(names[c], "RV", rv.col(j));
            add(names[c], "P", pos.col(j));
            add(names[c], "N", neg.col(j));
            add(names[c], "GJR_P", gp.col(j));
            add(names[c], "GJR_N", gn.col(j));
        }
    };
    add_group(m.factor_names, panel.factor_returns_monthly, m.rv_factors, m.semivar_pos, m.semivar_neg,
              m.gjr_pos_factors, m.gjr_neg_factors);
    add_group(m.asset_names, panel.asset_returns_monthly, m.rv_assets, m.semivar_pos_assets, m.semivar_neg_assets,
              m.gjr_pos_assets, m.gjr_neg_assets);

    const std::size_t K = m.factors();
    if (K > 1) {
        double mean_sum = 0.0;
        double sd_sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < K; ++a) {
            for (std::size_t b = a + 1; b < K; ++b) {
                VectorXd series(static_cast<Eigen::Index>(m.months_count()));
                for (std::size_t t = 0; t < m.months_count(); ++t) {
                    series(static_cast<Eigen::Index>(t)) =
                        m.rl_factors[t](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                }
                mean_sum += mean(series);
                sd_sum += stddev(series);
                ++pairs;
            }
        }
        rows.push_back({"factors", "RL", mean_sum / static_cast<double>(pairs), sd_sum / static_cast<double>(pairs)});
    }
    return rows;
}

void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    auto out = csv::open_out(path);
    out << "series,statistic,mean,sd\n";
    for (const auto& r : rows) {
        out << r.series << ',' << r.statistic << ',' << csv::format(r.mean) << ',' << csv::format(r.sd) << '\n';
    }
}

void write_measures(const std::filesystem::path& path, const RealizedMeasures& m) {
    const auto fo = sorted_order(m.factor_names);
    const auto ao = sorted_order(m.asset_names);
    auto out = csv::open_out(path);
    out << "month";
    for (auto k : fo) {
        const auto& f = m.factor_names[k];
        out << ",rv:" << f << ",rvpos:" << f << ",rvneg:" << f << ",gjrpos:" << f << ",gjrneg:" << f;
    }
    for (std::size_t a = 0; a < fo.size(); ++a) {
        for (std::size_t b = a; b < fo.size(); ++b) {
            out << ",rc:" << m.factor_names[fo[a]] << ':' << m.factor_names[fo[b]];
        }
    }
    for (auto i : ao) {
        const auto& n = m.asset_names[i];
        out << ",rv:" << n << ",rvpos:" << n << ",rvneg:" << n << ",gjrpos:" << n << ",gjrneg:" << n;
        for (auto k : fo) {
            out << ",rc:" << n << ':' << m.factor_names[k];
        }
    }
    out << '\n';
    for (std::size_t tt = 0; tt < m.months_count(); ++tt) {
        const auto t = static_cast<Eigen::Index>(tt);
        out << m.months[tt].str();
        for (auto kk : fo) {
            const auto k = static_cast<Eigen::Index>(kk);
            out << ',' << csv::format(m.rv_factors(t, k)) << ',' << csv::format(m.semivar_pos(t, k)) << ','
                << csv::format(m.semivar_neg(t, k)) << ',' << csv::format(m.gjr_pos_factors(t, k)) << ','
                << csv::format(m.gjr_neg_factors(t, k));
        }
        for (std::size_t a = 0; a < fo.size(); ++a) {
            for (std::size_t b = a; b < fo.size(); ++b) {
                out << ',' << csv::format(m.rc_factors[tt](static_cast<Eigen::Index>(fo[a]), static_cast<Eigen::Index>(fo[b])));
            }
        }
        for (auto ii : ao) {
            const auto i = static_cast<Eigen::Index>(ii);
            out << ',' << csv::format(m.rv_assets(t, i)) << ',' << csv::format(m.semivar_pos_assets(t, i)) << ','
                << csv::format(m.semivar_neg_assets(t, i)) << ',' << csv::format(m.gjr_pos_assets(t, i)) << ','
                << csv::format(m.gjr_neg_assets(t, i));
            for (auto kk : fo) {
                out << ',' << csv::format(m.rc_asset_factor[ii](t, static_cast<Eigen::Index>(kk)));
            }
        }
        out << '\n';
    }
}

RealizedMeasures read_measures(const std::filesystem::path& path, const std::vector<std::string>& factor_names,
                               const std::vector<std::string>& asset_names) {
    auto in = csv::open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        fail(ErrorCode::Schema, "measures cache '" + path.string() + "' is empty");
    }
    const auto header = csv::split(line);
    std::map<std::string, std::size_t> column;
    for (std::size_t c = 1; c < header.size(); ++c) {
        column[header[c]] = c;
    }
    const auto col = [&](const std::string& name) {
        const auto it = column.find(name);
        if (it == column.end()) {
            fail(ErrorCode::Schema, "measures cache lacks column '" + name + "'");
        }
        return it->second;
    };

    std::vector<std::vector<double>> rows;
    RealizedMeasures m;
    m.factor_names = factor_names;
    m.asset_names = asset_names;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = csv::split(line);
        if (cells.size() != header.size()) {
            fail(ErrorCode::Schema, "measures cache line " + std::to_string(line_no) + ": wrong column count");
        }
        m.months.push_back(YearMonth::parse(cells[0]));
        std::vector<double> values(cells.size(), 0.0);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto v = csv::parse_number(cells[c]);
            if (!v) {
                fail(ErrorCode::Gap, "measures cache line " + std::to_string(line_no) + ", column '" + header[c] +
                                         "': missing value");
            }
            values[c] = *v;
        }
        rows.push_back(std::move(values));
    }

    const auto T = static_cast<Eigen::Index>(rows.size());
    const auto K = static_cast<Eigen::Index>(factor_names.size());
    const auto N = static_cast<Eigen::Index>(asset_names.size());
    const auto fill = [&](MatrixXd& target, const std::vector<std::string>& names, const std::string& prefix) {
        target.resize(T, static_cast<Eigen::Index>(names.size()));
        for (std::size_t c = 0; c < names.size(); ++c) {
            const auto src = col(prefix + names[c]);
            for (Eigen::Index t = 0; t < T; ++t) {
                target(t, static_cast<Eigen::Index>(c)) = rows[static_cast<std::size_t>(t)][src];
            }
        }
    };
    fill(m.rv_factors, factor_names, "rv:");
    fill(m.semivar_pos, factor_names, "rvpos:");
    fill(m.semivar_neg, factor_names, "rvneg:");
    fill(m.gjr_pos_factors, factor_names, "gjrpos:");
    fill(m.gjr_neg_factors, factor_names, "gjrneg:");
    fill(m.rv_assets, asset_names, "rv:");
    fill(m.semivar_pos_assets, asset_names, "rvpos:");
    fill(m.semivar_neg_assets, asset_names, "rvneg:");
    fill(m.gjr_pos_assets, asset_names, "gjrpos:");
    fill(m.gjr_neg_assets, asset_names, "gjrneg:");

    const auto pair_col = [&](const std::string& a, const std::string& b) {
        const auto it = column.find("rc:" + a + ':' + b);
        return it != column.end() ? it->second : col("rc:" + b + ':' + a);
    };
    for (Eigen::Index t = 0; t < T; ++t) {
        MatrixXd rc(K, K);
        for (Eigen::Index a = 0; a < K; ++a) {
            for (Eigen::Index b = 0; b < K; ++b) {
                rc(a, b) = rows[static_cast<std::size_t>(t)][pair_col(factor_names[static_cast<std::size_t>(a)],
                                                                      factor_names[static_cast<std::size_t>(b)])];
            }
        }
        m.rl_factors.push_back(to_correlation(rc));
        m.rc_factors.push_back(std::move(rc));
    }
    for (Eigen::Index i = 0; i < N; ++i) {
        MatrixXd rc(T, K);
        MatrixXd rl(T, K);
        for (Eigen::Index k = 0; k < K; ++k) {
            const auto src = col("rc:" + asset_names[static_cast<std::size_t>(i)] + ':' +
                                 factor_names[static_cast<std::size_t>(k)]);
            for (Eigen::Index t = 0; t < T; ++t) {
                rc(t, k) = rows[static_cast<std::size_t>(t)][src];
                rl(t, k) = rc(t, k) / std::sqrt(m.rv_assets(t, i) * m.rv_factors(t, k));
            }
        }
        m.rc_asset_factor.push_back(std::move(rc));
        m.rl_asset_factor.push_back(std::move(rl));
    }
    return m;
}

}  // namespace hdh
