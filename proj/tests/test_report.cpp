#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "eyeadv/report.hpp"
#include "eyeadv/stats.hpp"

namespace eyeadv {
namespace {

struct Synthetic {
    std::vector<Measurement> rows;
    std::vector<double> benign_all;
    std::map<double, std::vector<double>> adv_all;
};

void add_summary(std::vector<Measurement>& rows, const std::string& p, const std::string& scope, const char* n,
                 const char* m, const char* v, double param, std::span<const double> sample)
{
    const auto s = summarize(sample);
    rows.push_back({p, scope, n, param, s.n});
    rows.push_back({p, scope, m, param, s.mean});
    rows.push_back({p, scope, v, param, s.variance});
}

// Three folds, untargeted only, eps grid {1, 2}.
Synthetic synthetic_run()
{
    Synthetic out;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> benign(8.0, 2.0);
    std::normal_distribution<double> adv(1.0, 0.3);
    const std::vector<std::string> people{"p00", "p01", "p02"};
    const double svm_benign[3] = {0.9, 0.8, 0.85};
    const double curve[3][2] = {{0.5, 0.2}, {0.3, 0.25}, {0.6, 0.1}};
    for (std::size_t f = 0; f < 3; ++f) {
        const auto& p = people[f];
        out.rows.push_back({p, "untargeted", measure::svm_benign, 0.0, svm_benign[f]});
        out.rows.push_back({p, "untargeted", measure::rf_benign, 0.0, svm_benign[f] - 0.05});
        std::vector<double> b(10 + f);
        for (auto& x : b) x = benign(rng);
        out.benign_all.insert(out.benign_all.end(), b.begin(), b.end());
        add_summary(out.rows, p, "untargeted", measure::benign_dist_n, measure::benign_dist_mean,
                    measure::benign_dist_var, 0.0, b);
        for (int k = 0; k < 2; ++k) {
            const double eps = k + 1.0;
            out.rows.push_back({p, "untargeted", measure::svm_attack, eps, curve[f][k]});
            out.rows.push_back({p, "untargeted", measure::rf_attack, eps, curve[f][k] + 0.4});
            std::vector<double> a(5 + f);
            for (auto& x : a) x = eps * adv(rng);
            out.adv_all[eps].insert(out.adv_all[eps].end(), a.begin(), a.end());
            add_summary(out.rows, p, "untargeted", measure::adv_dist_n, measure::adv_dist_mean, measure::adv_dist_var,
                        eps, a);
        }
        out.rows.push_back({p, "untargeted", measure::retrain_benign, 0.1, svm_benign[f] - 0.01});
        out.rows.push_back({p, "untargeted", measure::retrain_attack, 0.1, curve[f][1] + 0.1});
        out.rows.push_back({p, "untargeted", measure::retrain_eps, 0.1, 2.0});
        const std::vector<double> r{1.1, 1.3, 0.9};
        add_summary(out.rows, p, "untargeted", measure::retrain_dist_n, measure::retrain_dist_mean,
                    measure::retrain_dist_var, 0.1, r);
    }
    return out;
}

TEST(Report, AggregatesMeasurements)
{
    const auto s = synthetic_run();
    const auto report = build_report(s.rows, 0.3);

    const auto* benign = report.find("accuracy", "benign", "SVM");
    ASSERT_NE(benign, nullptr);
    EXPECT_NEAR(*benign->cells[0], 0.85, 1e-12);
    EXPECT_FALSE(benign->cells[1].has_value());

    // mean curve {0.4667, 0.1833}: general picks eps 2
    const auto* eps = report.find("eps", "general", "SVM");
    ASSERT_NE(eps, nullptr);
    EXPECT_EQ(*eps->cells[0], 2.0);
    EXPECT_NEAR(*report.find("accuracy", "general", "SVM")->cells[0], (0.2 + 0.25 + 0.1) / 3.0, 1e-12);
    EXPECT_NEAR(*report.find("accuracy", "general", "RF")->cells[0], (0.6 + 0.65 + 0.5) / 3.0, 1e-12);
    // individual: per-fold minimum is eps 2 everywhere
    EXPECT_EQ(*report.find("eps", "individual", "SVM")->cells[0], 2.0);
    // guess level 0.3 first reached at eps 2
    EXPECT_EQ(*report.find("eps", "guess", "SVM")->cells[0], 2.0);

    const auto* dist = report.find("distance", "general", "SVM");
    EXPECT_NEAR(*dist->cells[0], mean(s.adv_all.at(2.0)), 1e-12);
    EXPECT_NEAR(*report.find("distance", "benign", "-")->cells[0], mean(s.benign_all), 1e-12);
    const auto welch = welch_t_test(s.benign_all, s.adv_all.at(2.0));
    EXPECT_NEAR(*report.find("welch_p", "general", "SVM")->cells[0], welch.p_value, 1e-12);

    ASSERT_EQ(report.retrain_bars.size(), 1u);
    const auto& bar = report.retrain_bars[0];
    EXPECT_NEAR(bar.attack_accuracy, (0.3 + 0.35 + 0.2) / 3.0, 1e-12);
    ASSERT_TRUE(bar.undefended_attack_accuracy.has_value());
    EXPECT_NEAR(*bar.undefended_attack_accuracy, (0.2 + 0.25 + 0.1) / 3.0, 1e-12);
    EXPECT_NEAR(*report.find("accuracy", "retrain 10% benign", "SVM")->cells[0], 0.84, 1e-12);

    std::size_t general_points = 0;
    for (const auto& pt : report.accuracy_points) general_points += pt.strategy == "general";
    EXPECT_EQ(general_points, 3u);
}

TEST(Report, UnreachableGuessLevelLeavesCellsEmpty)
{
    const auto s = synthetic_run();
    const auto report = build_report(s.rows, 0.05);
    const auto* row = report.find("accuracy", "guess", "SVM");
    ASSERT_NE(row, nullptr);
    EXPECT_FALSE(row->cells[0].has_value());
    const auto csv = table_csv(report.table);
    EXPECT_NE(csv.find("accuracy,guess,SVM,-,-"), std::string::npos);
}

TEST(Report, CsvRoundTrips)
{
    const auto s = synthetic_run();
    EXPECT_EQ(parse_measurements_csv(measurements_csv(s.rows)), s.rows);
    const auto report = build_report(s.rows);
    EXPECT_EQ(parse_table_csv(table_csv(report.table)), report.table);
    EXPECT_EQ(parse_accuracy_csv(accuracy_csv(report.accuracy_points)), report.accuracy_points);
    EXPECT_EQ(parse_distance_csv(distance_csv(report.distance_bars)), report.distance_bars);
    EXPECT_EQ(parse_retrain_csv(retrain_csv(report.retrain_bars)), report.retrain_bars);

    const auto dir = std::filesystem::temp_directory_path() / "eyeadv_test_report";
    std::filesystem::remove_all(dir);
    write_report(dir, report);
    const auto back = read_report(dir);
    EXPECT_EQ(back.table, report.table);
    EXPECT_EQ(back.retrain_bars, report.retrain_bars);
    std::filesystem::remove_all(dir);
}

TEST(Report, EmptyInputGivesHeaderOnly)
{
    const auto report = build_report({});
    EXPECT_TRUE(report.table.empty());
    const auto csv = table_csv(report.table);
    EXPECT_EQ(csv, "metric,attack,model,untargeted,comic->newspaper,comic->textbook,newspaper->comic,"
                   "newspaper->textbook,textbook->comic,textbook->newspaper\n");
    EXPECT_TRUE(parse_table_csv(csv).empty());
}

TEST(Report, ParsersRejectForeignCsv)
{
    EXPECT_THROW(parse_table_csv("a,b,c\n"), std::invalid_argument);
    EXPECT_THROW(parse_measurements_csv("x\n"), std::invalid_argument);
}

}  // namespace
}  // namespace eyeadv
