#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eyeadv/events.hpp"

namespace eyeadv {

struct RecordingMetadata {
    std::string participant_id;
    DocumentClass label = DocumentClass::comic;
    double sample_rate_hz = 30.0;
};

struct Recording {
    RecordingMetadata meta;
    std::vector<GazeSample> samples;
};

/// Thrown for malformed or out-of-range recording rows; `line` is 1-based.
class RecordingError : public std::runtime_error {
public:
    RecordingError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// CSV `timestamp,x,y,pupil_diameter,confidence` with header. Rows are
/// validated and stably sorted by timestamp.
std::vector<GazeSample> read_recording_csv(std::istream& is);
void write_recording_csv(std::ostream& os, std::span<const GazeSample> samples);

/// Side-car `<recording>.meta` with `key = value` lines.
RecordingMetadata read_metadata(std::istream& is);
void write_metadata(std::ostream& os, const RecordingMetadata& meta);

/// Reads `path` and, when present, `path` + ".meta".
Recording load_recording(const std::filesystem::path& path);
void save_recording(const std::filesystem::path& path, const Recording& recording);

struct ManifestEntry {
    std::string participant_id;
    DocumentClass label = DocumentClass::comic;
    /// Relative to the manifest's directory.
    std::string file;
};

/// `manifest.csv`: header `participant,label,file`.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Loads every recording named by a manifest.
std::vector<Recording> load_dataset(const std::filesystem::path& manifest_path);

}  // namespace eyeadv
