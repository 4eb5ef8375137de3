#include "eyeadv/recording.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "csv.hpp"

namespace eyeadv {

RecordingError::RecordingError(std::size_t line, const std::string& what)
    : std::runtime_error("recording line " + std::to_string(line) + ": " + what), line_(line)
{
}

std::vector<GazeSample> read_recording_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw RecordingError(1, "missing header");
    const auto header = csv::split(csv::trim(line));
    const std::vector<std::string_view> expected{"timestamp", "x", "y", "pupil_diameter", "confidence"};
    if (header.size() != expected.size() || !std::equal(header.begin(), header.end(), expected.begin(),
                                                        [](auto a, auto b) { return csv::trim(a) == b; })) {
        throw RecordingError(1, "expected header 'timestamp,x,y,pupil_diameter,confidence'");
    }

    std::vector<GazeSample> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(csv::trim(line));
        if (f.size() != 5) throw RecordingError(line_no, "expected 5 columns, got " + std::to_string(f.size()));
        GazeSample s;
        try {
            s.timestamp = csv::parse_double(f[0]);
            s.x = csv::parse_double(f[1]);
            s.y = csv::parse_double(f[2]);
            s.pupil_diameter = csv::parse_double(f[3]);
            s.confidence = csv::parse_double(f[4]);
        } catch (const std::invalid_argument& e) {
            throw RecordingError(line_no, e.what());
        }
        if (!std::isfinite(s.timestamp)) throw RecordingError(line_no, "timestamp must be finite");
        if (!(s.x >= 0.0 && s.x <= 1.0)) throw RecordingError(line_no, "x outside [0,1]");
        if (!(s.y >= 0.0 && s.y <= 1.0)) throw RecordingError(line_no, "y outside [0,1]");
        if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) throw RecordingError(line_no, "confidence outside [0,1]");
        if (!(s.pupil_diameter >= 0.0) || !std::isfinite(s.pupil_diameter)) {
            throw RecordingError(line_no, "pupil_diameter must be finite and >= 0");
        }
        out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GazeSample& a, const GazeSample& b) { return a.timestamp < b.timestamp; });
    return out;
}

void write_recording_csv(std::ostream& os, std::span<const GazeSample> samples)
{
    os << "timestamp,x,y,pupil_diameter,confidence\n";
    for (const auto& s : samples) {
        os << csv::format_double(s.timestamp) << ',' << csv::format_double(s.x) << ',' << csv::format_double(s.y)
           << ',' << csv::format_double(s.pupil_diameter) << ',' << csv::format_double(s.confidence) << '\n';
    }
}

RecordingMetadata read_metadata(std::istream& is)
{
    RecordingMetadata m;
    std::string line;
    while (std::getline(is, line)) {
        const auto t = csv::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw std::runtime_error("metadata: expected key = value");
        const auto key = csv::trim(t.substr(0, eq));
        const auto value = std::string(csv::trim(t.substr(eq + 1)));
        if (key == "participant_id") m.participant_id = value;
        else if (key == "document_label") m.label = parse_document_class(value);
        else if (key == "sample_rate_hz") m.sample_rate_hz = csv::parse_double(value);
        else throw std::runtime_error("metadata: unknown key '" + std::string(key) + "'");
    }
    if (!(m.sample_rate_hz > 0.0)) throw std::runtime_error("metadata: sample_rate_hz must be positive");
    return m;
}

void write_metadata(std::ostream& os, const RecordingMetadata& meta)
{
    os << "participant_id = " << meta.participant_id << '\n';
    os << "document_label = " << to_string(meta.label) << '\n';
    os << "sample_rate_hz = " << csv::format_double(meta.sample_rate_hz) << '\n';
}

Recording load_recording(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open recording " + path.string());
    Recording r;
    r.samples = read_recording_csv(in);
    const auto meta_path = std::filesystem::path(path.string() + ".meta");
    if (std::filesystem::exists(meta_path)) {
        std::ifstream meta(meta_path);
        r.meta = read_metadata(meta);
    }
    return r;
}

void save_recording(const std::filesystem::path& path, const Recording& recording)
{
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write_recording_csv(out, recording.samples);
    }
    std::ofstream meta(path.string() + ".meta", std::ios::binary);
    write_metadata(meta, recording.meta);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "participant,label,file") {
        throw std::runtime_error("manifest: expected header 'participant,label,file'");
    }
    std::vector<ManifestEntry> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(csv::trim(line));
        if (f.size() != 3) throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected 3 columns");
        out.push_back({std::string(f[0]), parse_document_class(std::string(f[1])), std::string(f[2])});
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "participant,label,file\n";
    for (const auto& e : entries) out << e.participant_id << ',' << to_string(e.label) << ',' << e.file << '\n';
}

std::vector<Recording> load_dataset(const std::filesystem::path& manifest_path)
{
    const auto base = manifest_path.parent_path();
    std::vector<Recording> out;
    for (const auto& e : read_manifest(manifest_path)) {
        Recording r = load_recording(base / e.file);
        // the manifest is authoritative for identity
        r.meta.participant_id = e.participant_id;
        r.meta.label = e.label;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace eyeadv
