#include "eyeadv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "rng.hpp"

namespace eyeadv {

void SynthProfile::validate() const
{
    const bool ok = fixation_mean > 0.0 && fixation_sd >= 0.0 && small_amplitude > 0.0 && large_amplitude > 0.0 &&
                    large_weight >= 0.0 && large_weight <= 1.0 && blink_rate_per_min >= 0.0 &&
                    pupil_baseline >= 0.0 && pupil_jitter >= 0.0 && fixation_jitter >= 0.0 && drift >= 0.0 && drift_time > 0.0;
    if (!ok) throw std::invalid_argument("synth profile: rates, weights and scales must be nonnegative");
    double total = 0.0;
    for (const double w : direction_weights) {
        if (w < 0.0) throw std::invalid_argument("synth profile: negative direction weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("synth profile: direction weights sum to zero");
}

std::array<SynthProfile, 3> default_profiles()
{
    SynthProfile comic;
    comic.label = DocumentClass::comic;
    comic.fixation_mean = 0.36;
    comic.fixation_sd = 0.12;
    comic.small_amplitude = 0.075;
    comic.large_amplitude = 0.28;
    comic.large_weight = 0.5;
    comic.direction_weights = {0.32, 0.24, 0.2, 0.24};
    comic.blink_rate_per_min = 12.0;
    comic.drift = 0.6;
    comic.drift_time = 10.0;
    comic.pupil_baseline = 3.6;

    SynthProfile newspaper;
    newspaper.label = DocumentClass::newspaper;
    newspaper.fixation_mean = 0.29;
    newspaper.fixation_sd = 0.09;
    newspaper.small_amplitude = 0.07;
    newspaper.large_amplitude = 0.22;
    newspaper.large_weight = 0.3;
    newspaper.direction_weights = {0.45, 0.15, 0.06, 0.34};
    newspaper.blink_rate_per_min = 9.0;
    newspaper.drift = 0.6;
    newspaper.drift_time = 10.0;
    newspaper.pupil_baseline = 3.45;

    SynthProfile textbook;
    textbook.label = DocumentClass::textbook;
    textbook.fixation_mean = 0.25;
    textbook.fixation_sd = 0.07;
    textbook.small_amplitude = 0.065;
    textbook.large_amplitude = 0.32;
    textbook.large_weight = 0.16;
    textbook.direction_weights = {0.66, 0.18, 0.03, 0.13};
    textbook.blink_rate_per_min = 7.0;
    textbook.drift = 0.6;
    textbook.drift_time = 10.0;
    textbook.pupil_baseline = 3.35;

    return {comic, newspaper, textbook};
}

SynthParticipant draw_participant(std::uint64_t seed, std::size_t participant_index, double variability)
{
    std::mt19937_64 rng(derive_seed(seed, 1000 + participant_index));
    SynthParticipant p;
    p.fixation_scale = std::exp(variability * standard_normal(rng));
    p.amplitude_scale = std::exp(variability * standard_normal(rng));
    p.pupil_offset = 2.0 * variability * standard_normal(rng);
    p.blink_scale = std::exp(2.0 * variability * standard_normal(rng));
    return p;
}

namespace {

constexpr double kMargin = 0.06;

std::size_t pick_direction(std::mt19937_64& rng, const std::array<double, 4>& w)
{
    const double total = w[0] + w[1] + w[2] + w[3];
    double u = uniform01(rng) * total;
    for (std::size_t d = 0; d < 3; ++d) {
        if (u < w[d]) return d;
        u -= w[d];
    }
    return 3;
}

double clamp_unit(double v) { return std::clamp(v, 0.001, 0.999); }

}  // namespace

Recording synth_recording(const SynthProfile& profile, const SynthParticipant& participant, double duration,
                          std::uint64_t seed, PlantedEvents* planted, double sample_rate_hz)
{
    profile.validate();
    if (!(duration > 0.0) || !(sample_rate_hz > 0.0)) throw std::invalid_argument("synth: duration and rate must be positive");
    std::mt19937_64 rng(seed);
    const double period = 1.0 / sample_rate_hz;
    const auto total = static_cast<std::size_t>(std::llround(duration * sample_rate_hz));
    const auto min_frames = static_cast<std::size_t>(std::max(1.0, std::ceil(0.1 * sample_rate_hz - 1e-9)));

    Recording rec;
    rec.meta.label = profile.label;
    rec.meta.sample_rate_hz = sample_rate_hz;
    auto& out = rec.samples;
    out.reserve(total);

    const double baseline = profile.pupil_baseline + participant.pupil_offset;
    const double fix_mean = profile.fixation_mean * participant.fixation_scale;
    const double fix_sd = profile.fixation_sd * participant.fixation_scale;
    // blink probability per fixation-saccade cycle
    const double cycle = fix_mean + 2.0 * period;
    const double blink_p = std::min(0.9, profile.blink_rate_per_min * participant.blink_scale / 60.0 * cycle);

    auto push = [&](double x, double y, double pupil, double conf) {
        out.push_back({static_cast<double>(out.size()) * period, x, y, std::max(0.0, pupil), conf});
    };

    double px = uniform_real(rng, 0.2, 0.8);
    double py = uniform_real(rng, 0.2, 0.8);
    std::array<double, 4> state{};
    if (profile.drift > 0.0) {
        for (auto& v : state) v = profile.drift * standard_normal(rng);
    }
    double last_time = 0.0;
    while (out.size() < total) {
        if (profile.drift > 0.0) {
            const double now = static_cast<double>(out.size()) * period;
            const double decay = std::exp(-(now - last_time) / profile.drift_time);
            const double kick = profile.drift * std::sqrt(1.0 - decay * decay);
            for (auto& v : state) v = v * decay + kick * standard_normal(rng);
            last_time = now;
        }
        const double fscale = std::exp(state[0]);
        const double ascale = std::exp(state[1]);
        const double odds = profile.large_weight / std::max(1e-9, 1.0 - profile.large_weight) * std::exp(state[2]);
        const double large_weight = odds / (1.0 + odds);
        std::array<double, 4> weights = profile.direction_weights;
        weights[0] *= std::exp(state[3]);
        weights[1] *= std::exp(state[3]);
        weights[2] *= std::exp(-state[3]);
        weights[3] *= std::exp(-state[3]);

        // fixation
        const double secs = std::max(0.0, fscale * (fix_mean + fix_sd * standard_normal(rng)));
        const std::size_t frames =
            std::min(std::max(min_frames, static_cast<std::size_t>(std::llround(secs * sample_rate_hz))),
                     total - out.size());
        const std::size_t first = out.size();
        const double level = baseline + profile.pupil_jitter * standard_normal(rng);
        for (std::size_t k = 0; k < frames; ++k) {
            double jx = profile.fixation_jitter * standard_normal(rng);
            double jy = profile.fixation_jitter * standard_normal(rng);
            const double r = std::hypot(jx, jy);
            if (r > 0.02) {
                jx *= 0.02 / r;
                jy *= 0.02 / r;
            }
            push(clamp_unit(px + jx), clamp_unit(py + jy), level + 0.3 * profile.pupil_jitter * standard_normal(rng), 1.0);
        }
        if (planted && frames >= min_frames) planted->fixations.push_back({first, first + frames});
        if (out.size() >= total) break;

        // next fixation target
        const bool large = uniform01(rng) < large_weight;
        const double amp = (large ? profile.large_amplitude : profile.small_amplitude) * participant.amplitude_scale *
                           ascale * std::exp(0.15 * standard_normal(rng));
        const std::size_t dir = pick_direction(rng, weights);
        double ux = dir == 0 ? 1.0 : dir == 1 ? -1.0 : 0.0;
        double uy = dir == 2 ? 1.0 : dir == 3 ? -1.0 : 0.0;
        if (px + ux * amp < kMargin || px + ux * amp > 1.0 - kMargin) ux = -ux;
        if (py + uy * amp < kMargin || py + uy * amp > 1.0 - kMargin) uy = -uy;
        const double nx = std::clamp(px + ux * amp + 0.01 * standard_normal(rng), kMargin, 1.0 - kMargin);
        const double ny = std::clamp(py + uy * amp + 0.01 * standard_normal(rng), kMargin, 1.0 - kMargin);

        // transition frames, offset perpendicular to the jump so they break both fixations
        const double side = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        const double mx = (px + nx) / 2.0 + side * 0.09 * (uy != 0.0 ? 1.0 : 0.0);
        const double my = (py + ny) / 2.0 + side * 0.09 * (ux != 0.0 ? 1.0 : 0.0);

        if (uniform01(rng) < blink_p) {
            push(clamp_unit(mx), clamp_unit(my), level, 0.6);
            const std::size_t blink_frames = min_frames + uniform_index(rng, 5);
            const std::size_t bfirst = out.size();
            for (std::size_t k = 0; k < blink_frames && out.size() < total; ++k) push(0.0, 0.0, 0.0, 0.0);
            if (planted && out.size() - bfirst >= min_frames) planted->blinks.push_back({bfirst, out.size()});
            if (out.size() < total) push(clamp_unit(nx + side * 0.09), clamp_unit(ny - side * 0.09), level, 0.6);
        } else {
            const std::size_t n_trans = 1 + uniform_index(rng, 2);
            for (std::size_t k = 0; k < n_trans && out.size() < total; ++k) {
                push(clamp_unit(mx + 0.02 * static_cast<double>(k) * ux), clamp_unit(my + 0.02 * static_cast<double>(k) * uy),
                     level, 0.9);
            }
        }
        px = nx;
        py = ny;
    }
    return rec;
}

std::vector<Recording> synth_generate(const SynthDatasetConfig& config)
{
    if (config.participants < 2) throw std::invalid_argument("synth: need at least 2 participants");
    if (config.duration < config.min_duration) throw std::invalid_argument("synth: duration too short for one window");
    std::vector<Recording> out;
    for (std::size_t p = 0; p < config.participants; ++p) {
        const SynthParticipant who = draw_participant(config.seed, p, config.variability);
        for (std::size_t c = 0; c < config.profiles.size(); ++c) {
            Recording r = synth_recording(config.profiles[c], who, config.duration,
                                          derive_seed(config.seed, p * 16 + c), nullptr, config.sample_rate_hz);
            r.meta.participant_id = fmt::format("p{:02d}", p);
            out.push_back(std::move(r));
        }
    }
    return out;
}

void write_dataset(const std::filesystem::path& dir, std::span<const Recording> recordings)
{
    std::filesystem::create_directories(dir);
    std::vector<ManifestEntry> manifest;
    for (const auto& r : recordings) {
        const std::string file = r.meta.participant_id + "_" + to_string(r.meta.label) + ".csv";
        save_recording(dir / file, r);
        manifest.push_back({r.meta.participant_id, r.meta.label, file});
    }
    write_manifest(dir / "manifest.csv", manifest);
}

}  // namespace eyeadv
