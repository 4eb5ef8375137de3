#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "eyeadv/matrix.hpp"

namespace eyeadv {

struct SvmTrainConfig {
    double C = 1.0;
    /// Kernel width; <= 0 means 1 / dim at training time.
    double gamma = 1.0 / 54.0;
    /// KKT violation tolerance of the SMO stopping rule.
    double tolerance = 1e-3;
    std::size_t max_iterations = 10'000'000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Binary RBF machine for classes (positive, negative); decision > 0 favours `positive`.
struct SvmPairModel {
    int positive = 0;
    int negative = 1;
    Matrix support_vectors;
    std::vector<double> dual_coef;  // alpha_i * y_i
    double intercept = 0.0;

    double decision(std::span<const double> x, double gamma) const;
    friend bool operator==(const SvmPairModel&, const SvmPairModel&) = default;
};

/// One-vs-one multiclass RBF SVM. Pairs are ordered (i, j), i < j over `classes`.
struct SvmRbfModel {
    std::vector<int> classes;
    double gamma = 1.0 / 54.0;
    std::size_t dim = 0;
    std::vector<SvmPairModel> pairs;

    std::size_t class_index(int label) const;
    friend bool operator==(const SvmRbfModel&, const SvmRbfModel&) = default;
};

SvmRbfModel train_svm(const Matrix& features, std::span<const int> labels, const SvmTrainConfig& config = {});

struct SvmPrediction {
    int label = 0;
    /// One value per pair, in model.pairs order.
    std::vector<double> decision_values;
    /// Votes per class, in model.classes order.
    std::vector<int> votes;
};

/// Majority vote over pairs; ties go to the largest summed oriented decision
/// value, then to the lowest class index.
SvmPrediction svm_predict(const SvmRbfModel& model, std::span<const double> x);
int svm_predict_label(const SvmRbfModel& model, std::span<const double> x);

/// Tally votes from precomputed pairwise decision values (same rule as svm_predict).
SvmPrediction tally_votes(const SvmRbfModel& model, std::vector<double> decision_values);

/// Oriented pairwise decision g_{a,b}(x): positive when the pair favours class a.
double oriented_decision(const SvmRbfModel& model, int a, int b, std::span<const double> x);

struct LossGradient {
    std::vector<double> gradient;
    /// max over rivals c != reference of g_{c,reference}(x).
    double loss = 0.0;
    int rival = 0;
    bool zero = false;
};

/// Gradient of L(x, ref) = max_{c != ref} g_{c,ref}(x) through the maximizing
/// rival (lowest class on ties).
LossGradient svm_loss_gradient(const SvmRbfModel& model, std::span<const double> x, int reference);

/// Text format with hex-float values; round trip is bit-exact.
void save_svm(std::ostream& os, const SvmRbfModel& model);
SvmRbfModel load_svm(std::istream& is);

}  // namespace eyeadv
