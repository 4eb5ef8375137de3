#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eyeadv/attacks.hpp"
#include "eyeadv/features.hpp"
#include "eyeadv/forest.hpp"
#include "eyeadv/matrix.hpp"
#include "eyeadv/stats.hpp"
#include "eyeadv/svm.hpp"

namespace eyeadv {

/// Labeled feature rows with their provenance.
struct Dataset {
    Matrix x;
    std::vector<int> y;
    std::vector<std::string> participant;
    std::vector<double> window_start;

    std::size_t size() const { return y.size(); }
    void append(std::span<const double> row, int label, const std::string& who, double start);
    Dataset subset(std::span<const std::size_t> rows) const;
};

Dataset to_dataset(std::span<const FeatureVector> rows);

/// Per-column z-scoring fitted on a training matrix; constant columns keep scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    Matrix transform(const Matrix& x) const;
};

struct Fold {
    std::string held_out_participant;
    Dataset train;
    Dataset validation;
    Dataset test;
    /// Set when some class of the held-out participant had too few windows for
    /// the fixed validation count and a proportional split was used instead.
    std::vector<std::string> warnings;
};

/// One fold per participant (sorted id order). Held-out windows are split per
/// class by window start: the first `validation_count` go to validation, the
/// rest to test. With fewer than validation_count + 1 windows the class is
/// split proportionally (a quarter to validation, at least one test window).
std::vector<Fold> lopo_folds(const Dataset& data, std::size_t validation_count = 200);

/// Untargeted, or directed from one class to another.
struct AttackScope {
    std::optional<int> from;
    std::optional<int> to;

    bool directed() const { return from.has_value(); }
    std::string name() const;
    friend bool operator==(const AttackScope&, const AttackScope&) = default;
};

/// Untargeted followed by the 6 ordered class pairs, in report column order.
std::vector<AttackScope> all_scopes(int num_classes = kNumDocumentClasses);

/// Rows of `set` the scope attacks (all rows, or rows of class `from`).
std::vector<std::size_t> scope_rows(const Dataset& set, const AttackScope& scope);

struct AttackEvaluation {
    std::vector<std::size_t> rows;
    double accuracy_before = 0.0;
    double accuracy_after = 0.0;
    std::vector<AttackResult> results;
};

/// Attacks every row in scope (target = scope.to); accuracy is the fraction of
/// attacked rows whose prediction still equals their true label.
AttackEvaluation evaluate_attack(const SvmRbfModel& model, const Dataset& test, const AttackConfig& config,
                                 const AttackScope& scope);

/// Accuracy of `rf` on adversarial rows paired with their true labels.
double transfer_evaluate(std::span<const AttackResult> adversarial, std::span<const int> labels,
                         const RandomForestModel& rf);

struct DistanceStats {
    double mean_benign_pairwise = 0.0;
    double mean_adversarial = 0.0;
    double std_benign = 0.0;
    double std_adversarial = 0.0;
    WelchResult welch;
};

/// All unordered benign pairs.
std::vector<double> benign_pairwise_distances(const Matrix& benign);
/// Row-wise distance between benign and adversarial counterparts.
std::vector<double> adversarial_distances(const Matrix& benign, const Matrix& adversarial);

/// Needs at least two benign rows; Welch compares benign-pair distances with
/// benign-to-adversarial distances (left at t = 0, p = 1 when either side has
/// fewer than two distances).
DistanceStats distance_stats(const Matrix& benign, const Matrix& adversarial);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace eyeadv
