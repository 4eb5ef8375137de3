#include "eyeadv/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "csv.hpp"

namespace eyeadv {

const std::array<std::string_view, kNumFeatures>& feature_names()
{
    static const std::array<std::string_view, kNumFeatures> names = {
        "fix_rate",           "fix_dur_mean",       "fix_dur_max",        "fix_dur_var",
        "fix_meanx_mean",     "fix_meany_mean",     "fix_varx_var",       "fix_vary_var",
        "sac_rate",           "sac_ratio_small",    "sac_ratio_large",    "sac_ratio_right",
        "sac_ratio_left",     "sac_amp_mean",       "sac_amp_max",        "sac_amp_var",
        "sac_absdx_mean",     "sac_absdx_var",      "sac_absdy_mean",     "sac_absdy_var",
        "sac_fix_ratio",
        "wb_dir_n1_nonzero",  "wb_dir_n1_max",      "wb_dir_n1_min",
        "wb_dir_n2_nonzero",  "wb_dir_n2_max",      "wb_dir_n2_min",
        "wb_dir_n3_nonzero",  "wb_dir_n3_max",      "wb_dir_n3_min",
        "wb_dir_n4_nonzero",  "wb_dir_n4_max",      "wb_dir_n4_min",
        "wb_diramp_n1_nonzero", "wb_diramp_n1_max", "wb_diramp_n1_min",
        "wb_diramp_n2_nonzero", "wb_diramp_n2_max", "wb_diramp_n2_min",
        "wb_diramp_n3_nonzero", "wb_diramp_n3_max", "wb_diramp_n3_min",
        "wb_diramp_n4_nonzero", "wb_diramp_n4_max", "wb_diramp_n4_min",
        "blink_rate",         "blink_dur_mean",     "blink_dur_var",
        "pupil_mean_mean",    "pupil_var_mean",     "pupil_mean_var",     "pupil_var_var",
        "read_quantile_span", "read_slope",
    };
    return names;
}

void WindowConfig::validate() const
{
    if (!(window_size > 0.0)) throw std::invalid_argument("window_size must be positive");
    if (!(step > 0.0) || step > window_size) throw std::invalid_argument("step must be in (0, window_size]");
    if (!(amplitude_threshold > 0.0)) throw std::invalid_argument("amplitude_threshold must be positive");
}

namespace {

template <typename Event>
std::vector<Event> events_starting_in(const std::vector<Event>& events, double lo, double hi)
{
    std::vector<Event> out;
    for (const auto& e : events) {
        if (e.start >= lo && e.start < hi) out.push_back(e);
    }
    return out;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double max = 0.0;
};

// Population moments; empty input gives zeros.
template <typename Range, typename Fn>
Moments moments(const Range& r, Fn value)
{
    Moments m;
    if (r.empty()) return m;
    m.max = value(*r.begin());
    for (const auto& e : r) {
        const double v = value(e);
        m.mean += v;
        m.max = std::max(m.max, v);
    }
    m.mean /= static_cast<double>(r.size());
    for (const auto& e : r) {
        const double d = value(e) - m.mean;
        m.var += d * d;
    }
    m.var /= static_cast<double>(r.size());
    return m;
}

}  // namespace

std::vector<EventWindow> slide_windows(const EventStream& events, const WindowConfig& config)
{
    config.validate();
    std::vector<EventWindow> out;
    if (events.recording_duration + 1e-9 < config.window_size) return out;
    const auto count = static_cast<std::size_t>(
                           std::floor((events.recording_duration - config.window_size) / config.step + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        EventWindow w;
        w.start = events.recording_start + static_cast<double>(k) * config.step;
        w.length = config.window_size;
        const double hi = w.start + config.window_size;
        w.fixations = events_starting_in(events.fixations, w.start, hi);
        w.blinks = events_starting_in(events.blinks, w.start, hi);
        w.saccades = events_starting_in(events.saccades, w.start, hi);
        out.push_back(std::move(w));
    }
    return out;
}

std::array<double, 12> wordbook_features(std::string_view symbols)
{
    std::array<double, 12> out{};
    for (std::size_t n = 1; n <= 4; ++n) {
        if (symbols.size() < n) continue;
        std::map<std::string_view, int> counts;
        for (std::size_t i = 0; i + n <= symbols.size(); ++i) ++counts[symbols.substr(i, n)];
        int mx = 0;
        int mn = counts.begin()->second;
        for (const auto& [gram, c] : counts) {
            mx = std::max(mx, c);
            mn = std::min(mn, c);
        }
        out[3 * (n - 1) + 0] = static_cast<double>(counts.size());
        out[3 * (n - 1) + 1] = mx;
        out[3 * (n - 1) + 2] = mn;
    }
    return out;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ReadingFeatures reading_features(std::span<const Fixation> fixations)
{
    ReadingFeatures r;
    if (fixations.empty()) return r;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& f : fixations) {
        xs.push_back(f.centroid_x);
        ys.push_back(f.centroid_y);
    }
    r.quantile_span = std::hypot(quantile(xs, 0.95) - quantile(xs, 0.05), quantile(ys, 0.95) - quantile(ys, 0.05));
    if (fixations.size() < 2) return r;

    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    r.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return r;
}

FeatureVector extract_features(const EventWindow& window, const WindowConfig& config)
{
    FeatureVector fv;
    fv.window_start = window.start;
    auto& v = fv.values;
    const double len = window.length > 0.0 ? window.length : config.window_size;

    const auto& fix = window.fixations;
    const auto& sac = window.saccades;
    const auto& blk = window.blinks;

    // fixations
    {
        const auto dur = moments(fix, [](const Fixation& f) { return f.duration(); });
        const auto mx = moments(fix, [](const Fixation& f) { return f.centroid_x; });
        const auto my = moments(fix, [](const Fixation& f) { return f.centroid_y; });
        const auto vx = moments(fix, [](const Fixation& f) { return f.var_x; });
        const auto vy = moments(fix, [](const Fixation& f) { return f.var_y; });
        std::size_t i = feature_index::fixation;
        v[i++] = static_cast<double>(fix.size()) / len;
        v[i++] = dur.mean;
        v[i++] = dur.max;
        v[i++] = dur.var;
        v[i++] = mx.mean;
        v[i++] = my.mean;
        v[i++] = vx.var;
        v[i++] = vy.var;
    }

    // saccades
    {
        std::size_t small = 0;
        std::size_t right = 0;
        std::size_t left = 0;
        for (const auto& s : sac) {
            if (s.amplitude < config.amplitude_threshold) ++small;
            if (s.char_dir == 'R') ++right;
            if (s.char_dir == 'L') ++left;
        }
        const double n = static_cast<double>(sac.size());
        const auto amp = moments(sac, [](const Saccade& s) { return s.amplitude; });
        const auto adx = moments(sac, [](const Saccade& s) { return std::abs(s.dx); });
        const auto ady = moments(sac, [](const Saccade& s) { return std::abs(s.dy); });
        std::size_t i = feature_index::saccade;
        v[i++] = n / len;
        v[i++] = sac.empty() ? 0.0 : static_cast<double>(small) / n;
        v[i++] = sac.empty() ? 0.0 : static_cast<double>(sac.size() - small) / n;
        v[i++] = sac.empty() ? 0.0 : static_cast<double>(right) / n;
        v[i++] = sac.empty() ? 0.0 : static_cast<double>(left) / n;
        v[i++] = amp.mean;
        v[i++] = amp.max;
        v[i++] = amp.var;
        v[i++] = adx.mean;
        v[i++] = adx.var;
        v[i++] = ady.mean;
        v[i++] = ady.var;
    }

    v[feature_index::combined] = fix.empty() ? 0.0 : static_cast<double>(sac.size()) / static_cast<double>(fix.size());

    // wordbooks
    {
        std::string dir;
        std::string dir_amp;
        for (const auto& s : sac) {
            dir.push_back(s.char_dir);
            dir_amp.push_back(s.char_dir_amp);
        }
        const auto a = wordbook_features(dir);
        const auto b = wordbook_features(dir_amp);
        std::copy(a.begin(), a.end(), v.begin() + feature_index::wordbook);
        std::copy(b.begin(), b.end(), v.begin() + feature_index::wordbook + 12);
    }

    // blinks
    {
        const auto dur = moments(blk, [](const Blink& b) { return b.duration(); });
        std::size_t i = feature_index::blink;
        v[i++] = static_cast<double>(blk.size()) / len;
        v[i++] = dur.mean;
        v[i++] = dur.var;
    }

    // pupil diameter over fixations
    {
        const auto pm = moments(fix, [](const Fixation& f) { return f.mean_pupil; });
        const auto pv = moments(fix, [](const Fixation& f) { return f.var_pupil; });
        std::size_t i = feature_index::pupil;
        v[i++] = pm.mean;
        v[i++] = pv.mean;
        v[i++] = pm.var;
        v[i++] = pv.var;
    }

    const auto rf = reading_features(fix);
    v[feature_index::reading] = rf.quantile_span;
    v[feature_index::reading + 1] = rf.slope;
    return fv;
}

std::vector<FeatureVector> extract_recording_features(const EventStream& events, const WindowConfig& config)
{
    std::vector<FeatureVector> out;
    for (const auto& w : slide_windows(events, config)) {
        auto fv = extract_features(w, config);
        // window_start is stored relative to the recording start
        fv.window_start = w.start - events.recording_start;
        fv.participant_id = events.participant_id;
        fv.label = events.label;
        out.push_back(std::move(fv));
    }
    return out;
}

void write_feature_csv(std::ostream& os, std::span<const FeatureVector> rows)
{
    os << "participant,label,window_start";
    for (const auto name : feature_names()) os << ',' << name;
    os << '\n';
    for (const auto& r : rows) {
        os << r.participant_id << ',' << to_string(r.label) << ',' << csv::format_double(r.window_start);
        for (const double x : r.values) os << ',' << csv::format_double(x);
        os << '\n';
    }
}

std::vector<FeatureVector> read_feature_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("feature CSV: missing header");
    const auto header = csv::split(csv::trim(line));
    if (header.size() != kNumFeatures + 3) throw std::runtime_error("feature CSV: expected 57 columns in header");
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
        if (header[k + 3] != feature_names()[k]) {
            throw std::runtime_error("feature CSV: unexpected column '" + std::string(header[k + 3]) + "'");
        }
    }
    std::vector<FeatureVector> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(csv::trim(line));
        try {
            if (fields.size() != kNumFeatures + 3) throw std::invalid_argument("wrong column count");
            FeatureVector fv;
            fv.participant_id = std::string(fields[0]);
            fv.label = parse_document_class(std::string(fields[1]));
            fv.window_start = csv::parse_double(fields[2]);
            for (std::size_t k = 0; k < kNumFeatures; ++k) fv.values[k] = csv::parse_double(fields[k + 3]);
            out.push_back(std::move(fv));
        } catch (const std::exception& e) {
            throw std::runtime_error("feature CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace eyeadv
