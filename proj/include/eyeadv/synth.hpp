#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "eyeadv/recording.hpp"

namespace eyeadv {

/// Generative reading profile for one document class.
struct SynthProfile {
    DocumentClass label = DocumentClass::comic;
    double fixation_mean = 0.3;   // seconds
    double fixation_sd = 0.08;    // seconds
    double small_amplitude = 0.07;
    double large_amplitude = 0.25;
    double large_weight = 0.3;
    /// Direction weights R, L, U, D.
    std::array<double, 4> direction_weights{0.25, 0.25, 0.25, 0.25};
    double blink_rate_per_min = 10.0;
    double pupil_baseline = 3.5;
    double pupil_jitter = 0.1;
    /// Gaze jitter inside a fixation (sd, normalized units).
    double fixation_jitter = 0.006;
    /// Slow within-recording behavior drift: stationary sd of a log-scale
    /// Ornstein-Uhlenbeck modulation of fixation length, amplitude, large-saccade
    /// odds and horizontal bias, with correlation time drift_time seconds.
    double drift = 0.0;
    double drift_time = 20.0;

    void validate() const;
};

/// The three built-in class profiles: comic (long fixations, large saccades),
/// newspaper (column-wise mix), textbook (dense line-wise small saccades).
std::array<SynthProfile, 3> default_profiles();

/// Ground truth of what the generator planted, for recovery tests.
struct PlantedEvents {
    std::vector<SampleRange> fixations;
    std::vector<SampleRange> blinks;
};

struct SynthParticipant {
    /// Multiplicative jitter applied to the class profiles of each participant.
    double fixation_scale = 1.0;
    double amplitude_scale = 1.0;
    double pupil_offset = 0.0;
    double blink_scale = 1.0;
};

/// Per-participant variation drawn from the seed.
SynthParticipant draw_participant(std::uint64_t seed, std::size_t participant_index, double variability = 0.15);

Recording synth_recording(const SynthProfile& profile, const SynthParticipant& participant, double duration,
                          std::uint64_t seed, PlantedEvents* planted = nullptr, double sample_rate_hz = 30.0);

struct SynthDatasetConfig {
    std::size_t participants = 10;
    double duration = 240.0;  // seconds per recording
    double variability = 0.07;
    double sample_rate_hz = 30.0;
    std::uint64_t seed = 1;
    std::array<SynthProfile, 3> profiles = default_profiles();
    /// Shortest duration that must still yield one window.
    double min_duration = 45.0;
};

/// Participants p00, p01, ... each reading all three classes.
std::vector<Recording> synth_generate(const SynthDatasetConfig& config);

/// Writes one CSV + side-car per recording and a manifest.csv into `dir`.
void write_dataset(const std::filesystem::path& dir, std::span<const Recording> recordings);

}  // namespace eyeadv
