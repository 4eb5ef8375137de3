#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eyeadv/attacks.hpp"
#include "eyeadv/events.hpp"
#include "eyeadv/features.hpp"
#include "eyeadv/svm.hpp"
#include "eyeadv/synth.hpp"

namespace eyeadv {

struct ExperimentConfig {
    EventDetectionConfig events;
    WindowConfig window;
    SvmTrainConfig svm;
    std::vector<std::size_t> rf_trees{100, 50, 10, 200};
    std::vector<std::size_t> rf_min_leaf{50, 10, 100, 5};
    /// Minimal FGSM; eps_max is the top of the selection grid.
    AttackConfig attack;
    EpsSelection eps{default_eps_grid(0.1, 2.0), 0.3};
    std::vector<double> defense_fractions{0.1, 0.5};
    AttackConfig defense_attack;
    bool run_defense = true;

    std::size_t validation_count = 200;
    /// z-score features with statistics of the fold's training rows.
    bool standardize = true;

    /// Manifest of recordings; empty means synthesize.
    std::filesystem::path dataset;
    SynthDatasetConfig synth;

    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;
    /// Fold workers; 0 means hardware concurrency.
    unsigned threads = 1;

    /// Throws std::invalid_argument naming the offending key.
    void validate() const;
};

/// INI text with [experiment], [events], [window], [svm], [rf], [attack],
/// [defense] and [synth] sections. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Applies one "section.key=value" override.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Full INI rendering that parse_config reads back to the same values.
std::string dump_config(const ExperimentConfig& config);

}  // namespace eyeadv
