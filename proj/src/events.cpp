#include "eyeadv/events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eyeadv {

std::string to_string(DocumentClass c)
{
    switch (c) {
        case DocumentClass::comic: return "comic";
        case DocumentClass::newspaper: return "newspaper";
        case DocumentClass::textbook: return "textbook";
    }
    throw std::invalid_argument("unknown document class");
}

DocumentClass parse_document_class(const std::string& name)
{
    if (name == "comic") return DocumentClass::comic;
    if (name == "newspaper") return DocumentClass::newspaper;
    if (name == "textbook") return DocumentClass::textbook;
    throw std::invalid_argument("unknown document class '" + name + "'");
}

std::size_t EventDetectionConfig::min_frames() const
{
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
    const double frames = std::ceil(min_duration * sample_rate_hz - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, frames));
}

namespace {

struct Centroid {
    double x = 0.0;
    double y = 0.0;
};

Centroid centroid_of(std::span<const GazeSample> s)
{
    Centroid c;
    for (const auto& g : s) {
        c.x += g.x;
        c.y += g.y;
    }
    c.x /= static_cast<double>(s.size());
    c.y /= static_cast<double>(s.size());
    return c;
}

bool within_radius(std::span<const GazeSample> s, double radius)
{
    const Centroid c = centroid_of(s);
    const double r2 = radius * radius;
    return std::all_of(s.begin(), s.end(), [&](const GazeSample& g) {
        const double dx = g.x - c.x;
        const double dy = g.y - c.y;
        return dx * dx + dy * dy <= r2;
    });
}

void mean_var(std::span<const GazeSample> s, double GazeSample::*field, double& mean, double& var)
{
    mean = 0.0;
    for (const auto& g : s) mean += g.*field;
    mean /= static_cast<double>(s.size());
    var = 0.0;
    for (const auto& g : s) var += (g.*field - mean) * (g.*field - mean);
    var /= static_cast<double>(s.size());
}

Fixation make_fixation(std::span<const GazeSample> all, SampleRange r, double frame_period)
{
    Fixation f;
    f.samples = r;
    const auto s = all.subspan(r.first, r.size());
    f.start = s.front().timestamp;
    f.end = s.back().timestamp + frame_period;
    mean_var(s, &GazeSample::x, f.centroid_x, f.var_x);
    mean_var(s, &GazeSample::y, f.centroid_y, f.var_y);
    mean_var(s, &GazeSample::pupil_diameter, f.mean_pupil, f.var_pupil);
    return f;
}

}  // namespace

std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples, double radius, std::size_t min_frames,
                                       double frame_period)
{
    std::vector<Fixation> out;
    const std::size_t n = samples.size();
    std::size_t i = 0;
    while (i < n) {
        if (samples[i].is_zero_position()) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && !samples[j].is_zero_position() && within_radius(samples.subspan(i, j - i + 1), radius)) ++j;
        if (j - i >= min_frames) {
            out.push_back(make_fixation(samples, {i, j}, frame_period));
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<Blink> detect_blinks(std::span<const GazeSample> samples, std::size_t min_frames, double frame_period)
{
    std::vector<Blink> out;
    const std::size_t n = samples.size();
    std::size_t i = 0;
    while (i < n) {
        if (!samples[i].is_lost()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && samples[j].is_lost()) ++j;
        if (j - i >= min_frames) {
            out.push_back({{i, j}, samples[i].timestamp, samples[j - 1].timestamp + frame_period});
        }
        i = j;
    }
    return out;
}

SaccadeSymbols encode_saccade(double dx, double dy, double amplitude_threshold)
{
    if (!(amplitude_threshold > 0.0)) throw std::invalid_argument("amplitude threshold must be positive");
    char dir = 'R';
    if (std::abs(dx) >= std::abs(dy)) {
        dir = dx < 0.0 ? 'L' : 'R';
    } else {
        dir = dy < 0.0 ? 'D' : 'U';
    }
    const double amplitude = std::hypot(dx, dy);
    const char dir_amp = amplitude < amplitude_threshold ? static_cast<char>(dir - 'A' + 'a') : dir;
    return {dir, dir_amp};
}

namespace {

enum class EventKind { fixation, blink };

struct EventRef {
    EventKind kind;
    std::size_t index;
    SampleRange range;
};

// Last sample before `pos` that is not at (0,0); falls back to `fallback`.
Centroid valid_gaze_before(std::span<const GazeSample> samples, std::size_t pos, Centroid fallback)
{
    for (std::size_t k = pos; k-- > 0;) {
        if (!samples[k].is_zero_position()) return {samples[k].x, samples[k].y};
    }
    return fallback;
}

Centroid valid_gaze_from(std::span<const GazeSample> samples, std::size_t pos, Centroid fallback)
{
    for (std::size_t k = pos; k < samples.size(); ++k) {
        if (!samples[k].is_zero_position()) return {samples[k].x, samples[k].y};
    }
    return fallback;
}

}  // namespace

std::vector<Saccade> derive_saccades(std::span<const Fixation> fixations, std::span<const Blink> blinks,
                                     std::span<const GazeSample> samples, double amplitude_threshold)
{
    std::vector<EventRef> events;
    events.reserve(fixations.size() + blinks.size());
    for (std::size_t k = 0; k < fixations.size(); ++k) events.push_back({EventKind::fixation, k, fixations[k].samples});
    for (std::size_t k = 0; k < blinks.size(); ++k) events.push_back({EventKind::blink, k, blinks[k].samples});
    std::sort(events.begin(), events.end(),
              [](const EventRef& a, const EventRef& b) { return a.range.first < b.range.first; });

    std::vector<Saccade> out;
    for (std::size_t k = 1; k < events.size(); ++k) {
        const EventRef& prev = events[k - 1];
        const EventRef& next = events[k];
        if (prev.kind == EventKind::blink && next.kind == EventKind::blink) continue;
        if (next.range.first < prev.range.last + 1) continue;  // needs >= 1 frame in between

        Centroid from;
        Centroid to;
        double start = 0.0;
        double end = 0.0;
        if (prev.kind == EventKind::fixation) {
            const Fixation& f = fixations[prev.index];
            from = {f.centroid_x, f.centroid_y};
            start = f.end;
        } else {
            start = blinks[prev.index].end;
        }
        if (next.kind == EventKind::fixation) {
            const Fixation& f = fixations[next.index];
            to = {f.centroid_x, f.centroid_y};
            end = f.start;
        } else {
            end = blinks[next.index].start;
        }
        if (prev.kind == EventKind::blink) from = valid_gaze_from(samples, prev.range.last, to);
        if (next.kind == EventKind::blink) to = valid_gaze_before(samples, next.range.first, from);

        Saccade s;
        s.start = start;
        s.end = end;
        s.dx = to.x - from.x;
        s.dy = to.y - from.y;
        s.amplitude = std::hypot(s.dx, s.dy);
        const auto sym = encode_saccade(s.dx, s.dy, amplitude_threshold);
        s.char_dir = sym.dir;
        s.char_dir_amp = sym.dir_amp;
        out.push_back(s);
    }
    return out;
}

EventStream detect_events(std::span<const GazeSample> samples, const EventDetectionConfig& config)
{
    EventStream ev;
    const std::size_t min_frames = config.min_frames();
    const double period = config.frame_period();
    ev.fixations = detect_fixations(samples, config.fixation_radius, min_frames, period);
    ev.blinks = detect_blinks(samples, min_frames, period);
    ev.saccades = derive_saccades(ev.fixations, ev.blinks, samples, config.amplitude_threshold);
    if (!samples.empty()) {
        ev.recording_start = samples.front().timestamp;
        ev.recording_duration = static_cast<double>(samples.size()) * period;
    }
    return ev;
}

}  // namespace eyeadv
