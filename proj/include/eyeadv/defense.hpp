#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eyeadv/attacks.hpp"
#include "eyeadv/evaluation.hpp"
#include "eyeadv/svm.hpp"

namespace eyeadv {

struct DefenseConfig {
    double fraction = 0.1;
    /// Untargeted minimal FGSM, eps_step 0.1, eps_max 2.0.
    AttackConfig attack{};
    std::uint64_t seed = 0;

    void validate() const;
};

struct RetrainResult {
    SvmRbfModel base;
    SvmRbfModel retrained;
    /// Original rows first (unchanged), then one adversarial row per chosen row.
    Dataset augmented;
    std::vector<std::size_t> chosen_rows;
    std::size_t successful_attacks = 0;
};

/// Trains the base model, perturbs floor(fraction * n) training rows chosen
/// without replacement, labels each adversarial row with its original label
/// (unsuccessful attacks enter at their eps_max perturbation) and retrains on
/// the union. Throws when floor(fraction * n) < 1.
RetrainResult adversarial_retrain(const Dataset& train, const SvmTrainConfig& svm_config, const DefenseConfig& config);

/// Same, reusing an already trained base model.
RetrainResult adversarial_retrain(const Dataset& train, const SvmRbfModel& base, const SvmTrainConfig& svm_config,
                                  const DefenseConfig& config);

struct DefenseRow {
    AttackScope scope;
    double benign_accuracy = 0.0;
    double attack_accuracy = 0.0;
    DistanceStats distances;
    std::vector<double> adversarial_distances;
    std::vector<double> benign_distances;
};

/// Attacks crafted against `retrained` itself for every scope.
std::vector<DefenseRow> evaluate_defense(const SvmRbfModel& retrained, const Dataset& test, const AttackConfig& attack,
                                         std::span<const AttackScope> scopes);

}  // namespace eyeadv
