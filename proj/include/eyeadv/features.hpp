#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eyeadv/events.hpp"

namespace eyeadv {

inline constexpr std::size_t kNumFeatures = 54;

// Block offsets of the feature layout. See docs/formats.md for the full list.
namespace feature_index {
inline constexpr std::size_t fixation = 0;    // 8
inline constexpr std::size_t saccade = 8;     // 12
inline constexpr std::size_t combined = 20;   // 1
inline constexpr std::size_t wordbook = 21;   // 24: dir4 n=1..4, then dirAmp8 n=1..4
inline constexpr std::size_t blink = 45;      // 3
inline constexpr std::size_t pupil = 48;      // 4
inline constexpr std::size_t reading = 52;    // 2
}  // namespace feature_index

/// Column names in layout order.
const std::array<std::string_view, kNumFeatures>& feature_names();

struct WindowConfig {
    double window_size = 45.0;
    double step = 1.0;
    double amplitude_threshold = 0.1;

    void validate() const;
};

struct FeatureVector {
    std::array<double, kNumFeatures> values{};
    std::string participant_id;
    DocumentClass label = DocumentClass::comic;
    double window_start = 0.0;
};

/// Events whose start lies in [start, start + window_size).
struct EventWindow {
    double start = 0.0;
    double length = 0.0;
    std::vector<Fixation> fixations;
    std::vector<Blink> blinks;
    std::vector<Saccade> saccades;
};

/// Windows advance by `step` from the recording start; any window running past
/// the recording end is dropped.
std::vector<EventWindow> slide_windows(const EventStream& events, const WindowConfig& config);

/// For n = 1..4: (distinct n-grams, max count, min count); 12 values.
/// Called once per alphabet (direction, direction+amplitude).
std::array<double, 12> wordbook_features(std::string_view symbols);

struct ReadingFeatures {
    double quantile_span = 0.0;
    double slope = 0.0;
};

ReadingFeatures reading_features(std::span<const Fixation> fixations);

/// Linear interpolation between order statistics (numpy's default).
double quantile(std::vector<double> values, double q);

FeatureVector extract_features(const EventWindow& window, const WindowConfig& config);

/// Convenience: slide + extract over a whole recording, tagging participant and label.
std::vector<FeatureVector> extract_recording_features(const EventStream& events, const WindowConfig& config);

/// CSV with header `participant,label,window_start,<54 feature names>`.
void write_feature_csv(std::ostream& os, std::span<const FeatureVector> rows);
std::vector<FeatureVector> read_feature_csv(std::istream& is);

}  // namespace eyeadv
