#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eyeadv {

/// One raw per-fold number. A run records these and every report table is
/// derived from them, so `report` can rebuild the tables from a run directory.
struct Measurement {
    std::string participant;
    /// "untargeted" or a directed pair such as "comic->newspaper".
    std::string scope;
    std::string kind;
    /// eps for attack kinds, retraining fraction for retrain kinds, else 0.
    double param = 0.0;
    double value = 0.0;

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

namespace measure {
inline constexpr const char* svm_benign = "svm_benign";
inline constexpr const char* rf_benign = "rf_benign";
inline constexpr const char* svm_attack = "svm_attack";
inline constexpr const char* rf_attack = "rf_attack";
// count, mean and unbiased variance of distance samples
inline constexpr const char* benign_dist_n = "benign_dist_n";
inline constexpr const char* benign_dist_mean = "benign_dist_mean";
inline constexpr const char* benign_dist_var = "benign_dist_var";
inline constexpr const char* adv_dist_n = "adv_dist_n";
inline constexpr const char* adv_dist_mean = "adv_dist_mean";
inline constexpr const char* adv_dist_var = "adv_dist_var";
inline constexpr const char* retrain_benign = "retrain_benign";
inline constexpr const char* retrain_attack = "retrain_attack";
inline constexpr const char* retrain_eps = "retrain_eps";
inline constexpr const char* retrain_dist_n = "retrain_dist_n";
inline constexpr const char* retrain_dist_mean = "retrain_dist_mean";
inline constexpr const char* retrain_dist_var = "retrain_dist_var";
}  // namespace measure

/// Report column order after the four key columns.
inline constexpr std::array<const char*, 7> kScopeColumns = {
    "untargeted",          "comic->newspaper",   "comic->textbook",      "newspaper->comic",
    "newspaper->textbook", "textbook->comic",    "textbook->newspaper",
};

/// A Table-3 style row: metric x attack x model over the 7 scopes.
/// Missing cells (e.g. an unreachable guess level) are empty.
struct TableRow {
    std::string metric;
    std::string attack;
    std::string model;
    std::array<std::optional<double>, 7> cells{};

    friend bool operator==(const TableRow&, const TableRow&) = default;
};

/// One participant/scope/strategy point of the accuracy scatter.
struct AccuracyPoint {
    std::string participant;
    std::string scope;
    std::string strategy;
    double eps = 0.0;
    double svm_benign = 0.0;
    double svm_attack = 0.0;
    double rf_benign = 0.0;
    double rf_attack = 0.0;

    friend bool operator==(const AccuracyPoint&, const AccuracyPoint&) = default;
};

/// Distances pooled over folds for one scope/strategy.
struct DistanceBar {
    std::string scope;
    std::string strategy;
    double benign_mean = 0.0;
    double benign_std = 0.0;
    double adversarial_mean = 0.0;
    double adversarial_std = 0.0;
    double welch_t = 0.0;
    double welch_p = 1.0;

    friend bool operator==(const DistanceBar&, const DistanceBar&) = default;
};

/// Defended model against the undefended one at the same eps_max.
struct RetrainBar {
    double fraction = 0.0;
    std::string scope;
    double benign_accuracy = 0.0;
    double attack_accuracy = 0.0;
    std::optional<double> undefended_attack_accuracy;
    double benign_mean = 0.0;
    double adversarial_mean = 0.0;
    std::optional<double> undefended_adversarial_mean;
    double welch_p = 1.0;

    friend bool operator==(const RetrainBar&, const RetrainBar&) = default;
};

struct EvaluationReport {
    std::vector<TableRow> table;
    std::vector<AccuracyPoint> accuracy_points;
    std::vector<DistanceBar> distance_bars;
    std::vector<RetrainBar> retrain_bars;

    /// Row lookup; nullptr when absent.
    const TableRow* find(const std::string& metric, const std::string& attack, const std::string& model) const;
};

/// Aggregates measurements: accuracies are averaged over participants, eps is
/// selected on the SVM curves (general, individual, guess level) and the same
/// adversarial examples score the RF; distances and Welch tests pool all folds.
EvaluationReport build_report(std::span<const Measurement> measurements, double guess_accuracy = 0.3);

std::string measurements_csv(std::span<const Measurement> rows);
std::vector<Measurement> parse_measurements_csv(const std::string& text);

std::string table_csv(std::span<const TableRow> rows);
std::vector<TableRow> parse_table_csv(const std::string& text);
std::string accuracy_csv(std::span<const AccuracyPoint> rows);
std::vector<AccuracyPoint> parse_accuracy_csv(const std::string& text);
std::string distance_csv(std::span<const DistanceBar> rows);
std::vector<DistanceBar> parse_distance_csv(const std::string& text);
std::string retrain_csv(std::span<const RetrainBar> rows);
std::vector<RetrainBar> parse_retrain_csv(const std::string& text);

/// table3.csv, fig3_accuracy.csv, fig4_distances.csv, fig6_retrain.csv.
void write_report(const std::filesystem::path& dir, const EvaluationReport& report);
EvaluationReport read_report(const std::filesystem::path& dir);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace eyeadv
