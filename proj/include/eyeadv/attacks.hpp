#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "eyeadv/events.hpp"
#include "eyeadv/svm.hpp"

namespace eyeadv {

enum class FgsmMode { standard, minimal };
/// Only L2 is implemented; the enum leaves room for L-infinity.
enum class AttackNorm { l2 };

struct AttackConfig {
    FgsmMode mode = FgsmMode::minimal;
    AttackNorm norm = AttackNorm::l2;
    double eps_step = 0.1;
    double eps_max = 2.0;
    /// Targeted attack when set.
    std::optional<int> target;

    /// eps_step > 0 and eps_max >= 0. eps_max = 0 disables perturbation.
    void validate() const;
};

struct AttackResult {
    std::vector<double> adversarial;
    double eps_used = 0.0;
    bool success = false;
    int predicted_class = 0;
    /// Label queries spent; only the raw black-box attack counts them.
    std::size_t queries = 0;
};

/// Single-shot FGSM along the normalized L2 loss gradient.
AttackResult fgsm_standard(const SvmRbfModel& model, std::span<const double> x, int y_true, double eps,
                           std::optional<int> target = std::nullopt);

/// Grows eps in multiples of eps_step along one direction computed at x until
/// the attack goal holds or eps_max is reached.
AttackResult fgsm_minimal(const SvmRbfModel& model, std::span<const double> x, int y_true, const AttackConfig& config);

/// Outcome of the minimal-mode scan up to config.eps_max, from which the result
/// for any smaller eps_max can be read off without re-running the scan.
struct MinimalTrace {
    std::optional<int> target;
    double eps_step = 0.0;
    std::size_t max_multiple = 0;
    int initial_prediction = 0;
    /// Empty for a zero gradient or an input that already meets the goal.
    std::vector<double> direction;
    /// Predicted class at k * eps_step for k = 1 .. first success (or max_multiple).
    std::vector<int> predictions;
    /// 0 when the unperturbed input already meets the goal.
    std::optional<std::size_t> first_success;
};

MinimalTrace minimal_trace(const SvmRbfModel& model, std::span<const double> x, int y_true, const AttackConfig& config);

/// Same result as fgsm_minimal with the trace's step and target and the given
/// eps_max, which must not exceed the traced range.
AttackResult trace_result(const SvmRbfModel& model, const MinimalTrace& trace, std::span<const double> x, int y_true,
                          double eps_max);

/// Dispatches on config.mode; standard mode uses eps_max.
AttackResult fgsm_attack(const SvmRbfModel& model, std::span<const double> x, int y_true, const AttackConfig& config);

/// Normalized attack direction at x (empty when the gradient is zero).
/// Untargeted: +grad L(x, y_true); targeted: -grad L(x, target).
std::vector<double> fgsm_direction(const SvmRbfModel& model, std::span<const double> x, int y_true,
                                   std::optional<int> target);

bool attack_goal_reached(int predicted, int y_true, std::optional<int> target);

/// Largest k with k * eps_step <= eps_max (with a relative slack for rounding).
std::size_t max_step_multiple(double eps_step, double eps_max);

// ---- epsilon selection --------------------------------------------------

enum class EpsStrategy { general, per_person, guess_level };

struct EpsSelection {
    std::vector<double> grid;
    double target_accuracy = 0.3;

    void validate() const;
};

/// Default grid 0.1, 0.2, ..., 2.0.
std::vector<double> default_eps_grid(double step = 0.1, double max = 2.0);

/// Accuracy as a function of eps_max for one fold; values aligned with the grid.
using AttackCurve = std::vector<double>;

struct EpsChoice {
    /// Grid value minimizing mean accuracy (smallest on ties).
    double general = 0.0;
    /// Per fold: smallest grid value attaining that fold's minimum.
    std::vector<double> per_person;
    /// Smallest grid value with mean accuracy <= target, if any.
    std::optional<double> guess_level;
};

EpsChoice select_eps(std::span<const AttackCurve> curves, const EpsSelection& selection);

// ---- raw-level black-box attack ------------------------------------------

enum class RawField { x, y, pupil_diameter };

struct RawAttackConfig {
    double step_magnitude = 0.02;
    double max_magnitude = 0.1;
    std::size_t query_budget = 1000;
    std::vector<RawField> fields_perturbed{RawField::x, RawField::y};
    std::uint64_t seed = 0;
    std::optional<int> target;

    void validate() const;
};

/// Label-only oracle over a raw gaze window.
using RawPredictor = std::function<int(std::span<const GazeSample>)>;

struct RawAttackOutcome {
    std::vector<GazeSample> perturbed;
    AttackResult result;
};

/// Random single-sample hill climbing: perturb one field of one random sample
/// by a uniform amount in [-step, step], keep the change unless the label moves
/// to a class that is neither the current one nor the goal.
/// Per-sample, per-field change is capped at max_magnitude; x/y stay in [0,1].
RawAttackOutcome raw_blackbox_attack(std::span<const GazeSample> samples, const RawPredictor& predict, int y_true,
                                     const RawAttackConfig& config);

}  // namespace eyeadv
