#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eyeadv/config.hpp"
#include "eyeadv/evaluation.hpp"
#include "eyeadv/features.hpp"
#include "eyeadv/forest.hpp"
#include "eyeadv/recording.hpp"
#include "eyeadv/report.hpp"

namespace eyeadv {

/// Failure inside one pipeline stage; what() is prefixed with the stage name.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

using LogFn = std::function<void(std::string_view)>;

/// Events and windowed features for every recording, in input order.
std::vector<FeatureVector> extract_dataset_features(std::span<const Recording> recordings, const ExperimentConfig& config);

struct RfChoice {
    std::size_t n_trees = 0;
    std::size_t min_samples_leaf = 0;
    double validation_accuracy = 0.0;
};

/// Sweeps the tree-count x leaf-size grid and keeps the combination with the
/// highest accuracy on `validation` (training data when it is empty); earlier
/// grid entries win ties. Forests for smaller tree counts are prefixes of the
/// largest one.
RandomForestModel select_rf(const Dataset& train, const Dataset& validation, const ExperimentConfig& config,
                            std::uint64_t seed, RfChoice* choice = nullptr);

struct FoldOutcome {
    std::string participant;
    std::vector<Measurement> measurements;
    std::vector<std::string> warnings;
    RfChoice rf;
};

/// Trains both models on the fold and records every measurement the report needs.
FoldOutcome evaluate_fold(const Fold& fold, const ExperimentConfig& config, std::uint64_t fold_seed,
                          const LogFn& log = {});

struct ExperimentResult {
    std::vector<FoldOutcome> folds;
    std::vector<Measurement> measurements;
    EvaluationReport report;
};

/// Ingest or synthesize, extract features, evaluate every LOPO fold, then
/// write config.ini, features.csv, folds.csv, measurements.csv, the report
/// CSVs and a MANIFEST of completed stages into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, const LogFn& log = {});

/// Rebuilds the report of a finished run from its measurements.csv, using the
/// guess-level target from the run's config.ini when present.
EvaluationReport regenerate_report(const std::filesystem::path& run_dir);

}  // namespace eyeadv
