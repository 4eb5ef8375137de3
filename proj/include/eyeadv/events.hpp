#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eyeadv {

/// Document classes of the reading task. Values double as class indices.
enum class DocumentClass : int { comic = 0, newspaper = 1, textbook = 2 };

inline constexpr int kNumDocumentClasses = 3;

std::string to_string(DocumentClass c);
DocumentClass parse_document_class(const std::string& name);

/// One eye-tracker frame. x/y are normalized screen coordinates in [0,1];
/// the tracker reports (0, 0, confidence 0) when it loses the eye.
struct GazeSample {
    double timestamp = 0.0;
    double x = 0.0;
    double y = 0.0;
    double pupil_diameter = 0.0;
    double confidence = 0.0;

    bool is_zero_position() const { return x == 0.0 && y == 0.0; }
    bool is_lost() const { return is_zero_position() && confidence == 0.0; }

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

/// Half-open sample index range [first, last).
struct SampleRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const { return last - first; }
    friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

struct Fixation {
    SampleRange samples;
    double start = 0.0;
    double end = 0.0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double mean_pupil = 0.0;
    double var_pupil = 0.0;

    double duration() const { return end - start; }
};

struct Blink {
    SampleRange samples;
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }
};

struct Saccade {
    double start = 0.0;
    double end = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double amplitude = 0.0;
    char char_dir = 'R';
    char char_dir_amp = 'R';

    double duration() const { return end - start; }
};

struct EventStream {
    std::vector<Fixation> fixations;
    std::vector<Blink> blinks;
    std::vector<Saccade> saccades;
    double recording_start = 0.0;
    double recording_duration = 0.0;
    std::string participant_id;
    DocumentClass label = DocumentClass::comic;
};

struct EventDetectionConfig {
    double sample_rate_hz = 30.0;
    double fixation_radius = 0.05;
    /// Minimum event length in seconds; 3 frames at 30 Hz.
    double min_duration = 0.1;
    /// Saccades with amplitude below this are "small".
    double amplitude_threshold = 0.1;

    std::size_t min_frames() const;
    double frame_period() const { return 1.0 / sample_rate_hz; }
};

/// Running-centroid dispersion detector: a window grows while every member
/// stays within `radius` of the window centroid. Frames at (0,0) never join.
std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples, double radius = 0.05,
                                       std::size_t min_frames = 3, double frame_period = 1.0 / 30.0);

/// Maximal runs of lost-eye frames (x = y = 0, confidence 0) of length >= min_frames.
std::vector<Blink> detect_blinks(std::span<const GazeSample> samples, std::size_t min_frames = 3,
                                 double frame_period = 1.0 / 30.0);

/// Saccades between time-adjacent fixation/blink pairs separated by at least
/// one frame. Blink endpoints use the nearest valid gaze outside the blink.
std::vector<Saccade> derive_saccades(std::span<const Fixation> fixations, std::span<const Blink> blinks,
                                     std::span<const GazeSample> samples, double amplitude_threshold = 0.1);

struct SaccadeSymbols {
    char dir;
    char dir_amp;
};

/// L/R/U/D by dominant axis (ties go horizontal, zero displacement is R);
/// the amplitude symbol is lower-case when amplitude < threshold. U is +y.
SaccadeSymbols encode_saccade(double dx, double dy, double amplitude_threshold);

EventStream detect_events(std::span<const GazeSample> samples, const EventDetectionConfig& config = {});

}  // namespace eyeadv
