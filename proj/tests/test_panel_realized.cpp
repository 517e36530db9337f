#include "expect_error.hpp"
#include "support.hpp"

#include "hdheavy/panel.hpp"
#include "hdheavy/realized.hpp"

#include <filesystem>
#include <sstream>

using namespace hdh;

namespace {

std::string daily_csv(int months, int days, double scale = 0.01) {
    std::ostringstream out;
    out << "date,MKT,A,B\n";
    int k = 0;
    for (int m = 1; m <= months; ++m) {
        for (int d = 1; d <= days; ++d, ++k) {
            out << "2001-" << (m < 10 ? "0" : "") << m << "-" << (d < 10 ? "0" : "") << d << ","
                << scale * std::sin(k + 1.0) << "," << scale * std::cos(2.0 * k) << "," << scale * std::sin(3.0 * k + 0.5)
                << "\n";
        }
    }
    return out.str();
}

ReturnPanel parse_compound(const std::string& text, std::size_t factors = 1) {
    std::istringstream in(text);
    IngestionConfig c;
    c.factor_count = factors;
    c.monthly_source = MonthlySource::Compound;
    return parse_panel(in, nullptr, c);
}

}  // namespace

TEST(Ingestion, CountsMonthsAndDays) {
    const ReturnPanel p = parse_compound(daily_csv(2, 20));
    EXPECT_EQ(p.months(), 2u);
    EXPECT_EQ(p.days(), 40u);
    EXPECT_EQ(p.factors(), 1u);
    EXPECT_EQ(p.assets(), 2u);
    EXPECT_EQ(p.days_in_month(0) + p.days_in_month(1), p.days());
}

TEST(Ingestion, ZeroDailyReturnsCompoundToZero) {
    const MatrixXd zeros = MatrixXd::Zero(40, 3);
    EXPECT_TRUE(compound_monthly(zeros, {0, 20, 40}).isZero(0.0));
}

TEST(Ingestion, CompoundingMatchesBruteForceProduct) {
    const ReturnPanel p = parse_compound(daily_csv(3, 21, 0.02));
    for (std::size_t t = 0; t < p.months(); ++t) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            long double prod = 1.0L;
            for (std::size_t d = p.month_offsets[t]; d < p.month_offsets[t + 1]; ++d) {
                prod *= 1.0L + p.asset_returns_daily(static_cast<Eigen::Index>(d), j);
            }
            EXPECT_NEAR(p.asset_returns_monthly(static_cast<Eigen::Index>(t), j), static_cast<double>(prod - 1.0L),
                        1e-15);
        }
    }
}

TEST(Ingestion, ReadsMonthlyFileAndChecksAlignment) {
    std::istringstream daily(daily_csv(2, 5));
    std::istringstream monthly("date,MKT,A,B\n2001-01,0.1,0.2,0.3\n2001-02,-0.1,-0.2,-0.3\n");
    IngestionConfig c;
    const ReturnPanel p = parse_panel(daily, &monthly, c);
    EXPECT_DOUBLE_EQ(p.factor_returns_monthly(1, 0), -0.1);
    EXPECT_DOUBLE_EQ(p.asset_returns_monthly(0, 1), 0.3);

    std::istringstream daily2(daily_csv(2, 5));
    std::istringstream short_monthly("date,MKT,A,B\n2001-01,0.1,0.2,0.3\n");
    EXPECT_HDH_ERROR(parse_panel(daily2, &short_monthly, c), ErrorCode::Schema);
}

TEST(Ingestion, SchemaAndGapErrors) {
    EXPECT_HDH_ERROR(parse_compound("day,MKT,A\n2001-01-01,0.1,0.2\n"), ErrorCode::Schema);
    EXPECT_HDH_ERROR(parse_compound("date,MKT,A\n2001-01-01,0.1\n"), ErrorCode::Schema);
    EXPECT_HDH_ERROR(parse_compound("date,MKT,A\n2001-01-01,0.1,\n2001-01-02,0.1,0.2\n"), ErrorCode::Gap);
    EXPECT_HDH_ERROR(parse_compound("date,MKT,A\n2001-01-01,0.1,x\n"), ErrorCode::Parse);
    // March missing between February and April.
    std::string text = "date,MKT,A\n";
    for (const char* m : {"01", "02", "04"}) {
        text += std::string("2001-") + m + "-01,0.01,0.02\n2001-" + m + "-02,-0.01,0.03\n";
    }
    EXPECT_HDH_ERROR(parse_compound(text), ErrorCode::Gap);
}

TEST(Ingestion, WindowSelection) {
    std::istringstream in(daily_csv(4, 5));
    IngestionConfig c;
    c.monthly_source = MonthlySource::Compound;
    c.start = YearMonth{2001, 2};
    c.end = YearMonth{2001, 3};
    const ReturnPanel p = parse_panel(in, nullptr, c);
    ASSERT_EQ(p.months(), 2u);
    EXPECT_EQ(p.dates_monthly.front().str(), "2001-02");
}

TEST(Ingestion, PanelRoundTripsThroughFiles) {
    const ReturnPanel p = support::random_panel(2, 3, 6, 42);
    const auto dir = std::filesystem::temp_directory_path() / "hdheavy-panel-roundtrip";
    std::filesystem::create_directories(dir);
    write_panel(p, dir / "d.csv", dir / "m.csv");
    IngestionConfig c;
    c.factor_count = 2;
    c.monthly_path = dir / "m.csv";
    const ReturnPanel q = load_panel(dir / "d.csv", c);
    EXPECT_EQ(q.factor_returns_daily, p.factor_returns_daily);
    EXPECT_EQ(q.asset_returns_monthly, p.asset_returns_monthly);
    EXPECT_EQ(q.asset_names, p.asset_names);
    std::filesystem::remove_all(dir);
}

TEST(Realized, TwoTermExamples) {
    const std::vector<double> x{0.01, -0.02};
    EXPECT_NEAR(realized_variance(x), 0.0005, 1e-18);
    const Semivariances s = signed_semivariances(x);
    EXPECT_NEAR(s.pos, 0.0001, 1e-18);
    EXPECT_NEAR(s.neg, 0.0004, 1e-18);
    const std::vector<double> zeros{0.0, 0.0};
    EXPECT_EQ(realized_variance(zeros), 0.0);
    EXPECT_EQ(signed_semivariances(zeros).pos, 0.0);
    EXPECT_EQ(signed_semivariances(zeros).neg, 0.0);
    EXPECT_HDH_ERROR(realized_variance(std::vector<double>{0.1}), ErrorCode::DegenerateMonth);
}

TEST(Realized, VarianceMatchesExtendedPrecision) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 0.01);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(21);
        long double acc = 0.0L;
        for (auto& v : x) {
            v = z(rng);
            acc += static_cast<long double>(v) * v;
        }
        EXPECT_LE(std::abs(realized_variance(x) - static_cast<double>(acc)), 1e-15 * static_cast<double>(acc));
    }
}

TEST(Realized, CorrelationSpecialCases) {
    MatrixXd dup(4, 2);
    dup << 0.01, 0.01, -0.02, -0.02, 0.03, 0.03, 0.005, 0.005;
    EXPECT_EQ(realized_correlation_matrix(dup)(0, 1), 1.0);
    MatrixXd orth(4, 2);
    orth << 1, 0, 0, 1, -1, 0, 0, -1;
    orth *= 0.01;
    EXPECT_EQ(realized_correlation_matrix(orth)(0, 1), 0.0);
    MatrixXd flat = MatrixXd::Zero(4, 2);
    flat.col(0) = dup.col(0);
    EXPECT_HDH_ERROR(realized_correlation_matrix(flat), ErrorCode::DegenerateMonth);
}

TEST(Realized, CorrelationMatchesPairwiseOracle) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z(0.0, 0.01);
    for (int rep = 0; rep < 50; ++rep) {
        MatrixXd x(21, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x.data()[i] = z(rng);
        }
        const MatrixXd rl = realized_correlation_matrix(x);
        for (Eigen::Index i = 0; i < 3; ++i) {
            EXPECT_EQ(rl(i, i), 1.0);
            for (Eigen::Index j = 0; j < 3; ++j) {
                double sij = 0.0, sii = 0.0, sjj = 0.0;
                for (Eigen::Index d = 0; d < 21; ++d) {
                    sij += x(d, i) * x(d, j);
                    sii += x(d, i) * x(d, i);
                    sjj += x(d, j) * x(d, j);
                }
                EXPECT_NEAR(rl(i, j), sij / std::sqrt(sii * sjj), 1e-12);
            }
        }
    }
}

TEST(Realized, HandComputedTwoMonthFixture) {
    ReturnPanel p;
    p.factor_names = {"F"};
    p.asset_names = {"A"};
    p.dates_daily = {{2001, 1, 2}, {2001, 1, 3}, {2001, 2, 1}, {2001, 2, 2}};
    p.dates_monthly = {{2001, 1}, {2001, 2}};
    p.month_offsets = {0, 2, 4};
    p.factor_returns_daily.resize(4, 1);
    p.factor_returns_daily << 0.01, -0.02, 0.03, 0.0;
    p.asset_returns_daily.resize(4, 1);
    p.asset_returns_daily << 0.02, 0.01, -0.01, 0.02;
    p.factor_returns_monthly = MatrixXd::Zero(2, 1);
    p.asset_returns_monthly = MatrixXd::Zero(2, 1);
    const RealizedMeasures m = build_measures(p);
    EXPECT_NEAR(m.rv_factors(0, 0), 0.0005, 1e-18);
    EXPECT_NEAR(m.semivar_pos(0, 0), 0.0001, 1e-18);
    EXPECT_NEAR(m.semivar_neg(0, 0), 0.0004, 1e-18);
    EXPECT_NEAR(m.rv_factors(1, 0), 0.0009, 1e-18);
    EXPECT_NEAR(m.semivar_neg(1, 0), 0.0, 1e-18);
    EXPECT_NEAR(m.rv_assets(0, 0), 0.0005, 1e-18);
    // 0.01*0.02 + (-0.02)(0.01) = 0; 0.03*(-0.01) + 0 = -0.0003
    EXPECT_NEAR(m.rc_asset_factor[0](0, 0), 0.0, 1e-18);
    EXPECT_NEAR(m.rc_asset_factor[0](1, 0), -0.0003, 1e-18);
    EXPECT_NEAR(m.rl_asset_factor[0](1, 0), -0.0003 / std::sqrt(0.0009 * 0.0005), 1e-14);
}

TEST(Realized, IdenticalFactorAndAssetGiveUnitCorrelation) {
    ReturnPanel p = support::random_panel(1, 1, 12, 4);
    p.asset_returns_daily = p.factor_returns_daily;
    const RealizedMeasures m = build_measures(p);
    for (Eigen::Index t = 0; t < 12; ++t) {
        EXPECT_NEAR(m.rl_asset_factor[0](t, 0), 1.0, 1e-15);
    }
}

TEST(RealizedProperties, MeasureInvariantsOnLongPanel) {
    const ReturnPanel p = support::random_panel(3, 2, 1000, 11);
    const RealizedMeasures m = build_measures(p);
    ASSERT_EQ(m.months_count(), 1000u);
    for (std::size_t t = 0; t < 1000; ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        EXPECT_GE(support::min_eig(m.rc_factors[t]), -1e-10 * m.rc_factors[t].trace());
        EXPECT_GE(support::min_eig(m.rl_factors[t]), -1e-10);
        EXPECT_TRUE((m.rl_factors[t].diagonal().array() == 1.0).all());
        for (Eigen::Index k = 0; k < 3; ++k) {
            EXPECT_LE(std::abs(m.rv_factors(ti, k) - (m.semivar_pos(ti, k) + m.semivar_neg(ti, k))),
                      1e-15 * m.rv_factors(ti, k));
        }
        EXPECT_EQ(p.days_in_month(t), 21u);
    }
}

TEST(Realized, MeasureCacheRoundTrip) {
    const ReturnPanel p = support::random_panel(2, 2, 10, 12);
    const RealizedMeasures m = build_measures(p);
    const auto path = std::filesystem::temp_directory_path() / "hdheavy-measures.csv";
    write_measures(path, m);
    const RealizedMeasures r = read_measures(path, m.factor_names, m.asset_names);
    EXPECT_EQ(r.rv_factors, m.rv_factors);
    EXPECT_EQ(r.semivar_neg_assets, m.semivar_neg_assets);
    EXPECT_EQ(r.rc_asset_factor[1], m.rc_asset_factor[1]);
    EXPECT_LE(support::max_rel_diff(r.rl_factors[3], m.rl_factors[3]), 1e-15);
    std::filesystem::remove(path);
}

TEST(Realized, SummaryAnnualisesVariances) {
    const ReturnPanel p = support::random_panel(1, 1, 24, 13);
    const RealizedMeasures m = build_measures(p);
    const auto rows = summarize_measures(p, m);
    bool found = false;
    for (const auto& r : rows) {
        if (r.series == "F1" && r.statistic == "RV") {
            EXPECT_NEAR(r.mean, kAnnualizedPercent * m.rv_factors.col(0).mean(), 1e-12);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}
