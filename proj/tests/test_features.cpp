#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "eyeadv/events.hpp"
#include "eyeadv/features.hpp"
#include "eyeadv/synth.hpp"
#include "support/oracles.hpp"

namespace eyeadv {
namespace {

std::string random_symbols(std::mt19937_64& rng, std::string_view alphabet, std::size_t len)
{
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

Fixation fixation(double start, double dur, double x, double y, double pupil = 3.0, double var_pupil = 0.0)
{
    Fixation f;
    f.start = start;
    f.end = start + dur;
    f.centroid_x = x;
    f.centroid_y = y;
    f.mean_pupil = pupil;
    f.var_pupil = var_pupil;
    return f;
}

Saccade saccade(double start, double dx, double dy)
{
    Saccade s;
    s.start = start;
    s.end = start + 0.05;
    s.dx = dx;
    s.dy = dy;
    s.amplitude = std::hypot(dx, dy);
    const auto sym = encode_saccade(dx, dy, 0.1);
    s.char_dir = sym.dir;
    s.char_dir_amp = sym.dir_amp;
    return s;
}

TEST(Features, NamesAreUniqueAndComplete)
{
    const auto& names = feature_names();
    std::set<std::string_view> unique(names.begin(), names.end());
    EXPECT_EQ(unique.size(), kNumFeatures);
    EXPECT_EQ(names[feature_index::wordbook], "wb_dir_n1_nonzero");
    EXPECT_EQ(names[feature_index::blink], "blink_rate");
    EXPECT_EQ(names[feature_index::pupil], "pupil_mean_mean");
    EXPECT_EQ(names[feature_index::reading], "read_quantile_span");
}

TEST(Features, WordbookMatchesBruteForceCounter)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const std::string_view alphabet = i % 2 == 0 ? "LRUD" : "LRUDlrud";
        const auto s = random_symbols(rng, alphabet, rng() % 80);
        EXPECT_EQ(wordbook_features(s), oracle::ngram_counts(s)) << s;
    }
}

TEST(Features, WordbookKnownString)
{
    // RRLR: 1-grams R:3 L:1; 2-grams RR, RL, LR once each; 3-grams RRL, RLR; 4-gram RRLR
    const auto w = wordbook_features("RRLR");
    const std::array<double, 12> expected{2, 3, 1, 3, 1, 1, 2, 1, 1, 1, 1, 1};
    EXPECT_EQ(w, expected);
    EXPECT_EQ(wordbook_features(""), (std::array<double, 12>{}));
}

TEST(Features, QuantileMatchesLinearInterpolation)
{
    EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.05), 1.15);
    EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.95), 3.85);
    EXPECT_DOUBLE_EQ(quantile({5.0}, 0.95), 5.0);
    EXPECT_DOUBLE_EQ(quantile({}, 0.5), 0.0);
}

TEST(Features, ReadingSlopeOfCollinearFixations)
{
    std::vector<Fixation> f;
    for (int i = 0; i < 5; ++i) f.push_back(fixation(i, 0.2, 0.1 * i, 0.2 * i + 0.1));
    const auto r = reading_features(f);
    EXPECT_NEAR(r.slope, 2.0, 1e-12);
    EXPECT_NEAR(r.quantile_span, std::hypot(0.36, 0.72), 1e-12);
}

TEST(Features, HandComputedWindow)
{
    EventWindow w;
    w.start = 0.0;
    w.length = 45.0;
    w.fixations = {fixation(0.0, 0.2, 0.2, 0.5, 3.0, 0.01), fixation(1.0, 0.4, 0.6, 0.5, 4.0, 0.03)};
    w.saccades = {saccade(0.2, 0.4, 0.0), saccade(1.4, -0.05, 0.0)};
    Blink b;
    b.start = 2.0;
    b.end = 2.2;
    w.blinks = {b};
    WindowConfig c;
    const auto v = extract_features(w, c).values;
    EXPECT_NEAR(v[0], 2.0 / 45.0, 1e-15);
    EXPECT_NEAR(v[1], 0.3, 1e-12);
    EXPECT_NEAR(v[2], 0.4, 1e-12);
    EXPECT_NEAR(v[3], 0.01, 1e-12);
    EXPECT_NEAR(v[4], 0.4, 1e-12);
    EXPECT_NEAR(v[8], 2.0 / 45.0, 1e-15);
    EXPECT_DOUBLE_EQ(v[9], 0.5);
    EXPECT_DOUBLE_EQ(v[10], 0.5);
    EXPECT_DOUBLE_EQ(v[11], 0.5);
    EXPECT_DOUBLE_EQ(v[12], 0.5);
    EXPECT_NEAR(v[13], 0.225, 1e-12);
    EXPECT_NEAR(v[14], 0.4, 1e-12);
    EXPECT_DOUBLE_EQ(v[feature_index::combined], 1.0);
    EXPECT_NEAR(v[feature_index::blink], 1.0 / 45.0, 1e-15);
    EXPECT_NEAR(v[feature_index::blink + 1], 0.2, 1e-12);
    EXPECT_NEAR(v[feature_index::pupil], 3.5, 1e-12);
    EXPECT_NEAR(v[feature_index::pupil + 1], 0.02, 1e-12);
    EXPECT_NEAR(v[feature_index::pupil + 2], 0.25, 1e-12);
    EXPECT_NEAR(v[feature_index::pupil + 3], 1e-4, 1e-12);
    EXPECT_NEAR(v[feature_index::reading + 1], 0.0, 1e-12);
}

TEST(Features, EmptyWindowIsAllZero)
{
    EventWindow w;
    w.length = 45.0;
    const auto v = extract_features(w, WindowConfig{}).values;
    for (const double x : v) EXPECT_EQ(x, 0.0);
}

TEST(Features, AlwaysFiftyFourFiniteValues)
{
    const auto profiles = default_profiles();
    WindowConfig c;
    c.window_size = 10.0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto s = oracle::make_planted_stream(seed, 5 + seed * 3);
        auto ev = detect_events(s.samples);
        for (const auto& w : slide_windows(ev, {2.0, 0.5, 0.1})) {
            for (const double x : extract_features(w, c).values) ASSERT_TRUE(std::isfinite(x));
        }
        const auto rec = synth_recording(profiles[seed % 3], SynthParticipant{}, 30.0, seed);
        ev = detect_events(rec.samples);
        const auto rows = extract_recording_features(ev, c);
        EXPECT_FALSE(rows.empty());
        for (const auto& r : rows) {
            for (const double x : r.values) ASSERT_TRUE(std::isfinite(x));
        }
    }
}

TEST(Features, WindowWordbooksMatchSaccadeSymbols)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = oracle::make_planted_stream(seed, 60);
        const auto ev = detect_events(s.samples);
        for (const auto& w : slide_windows(ev, {5.0, 2.5, 0.1})) {
            std::string dir, dir_amp;
            for (const auto& sc : w.saccades) {
                dir.push_back(sc.char_dir);
                dir_amp.push_back(sc.char_dir_amp);
            }
            const auto v = extract_features(w, {5.0, 2.5, 0.1}).values;
            const auto a = oracle::ngram_counts(dir);
            const auto b = oracle::ngram_counts(dir_amp);
            for (std::size_t k = 0; k < 12; ++k) {
                EXPECT_EQ(v[feature_index::wordbook + k], a[k]);
                EXPECT_EQ(v[feature_index::wordbook + 12 + k], b[k]);
            }
        }
    }
}

TEST(Features, WindowCountAndMembership)
{
    EventStream ev;
    ev.recording_start = 10.0;
    ev.recording_duration = 100.0;
    for (int i = 0; i < 100; ++i) ev.fixations.push_back(fixation(10.0 + i + 0.5, 0.2, 0.5, 0.5));
    const auto windows = slide_windows(ev, WindowConfig{});
    ASSERT_EQ(windows.size(), 56u);
    for (std::size_t k = 0; k < windows.size(); ++k) {
        EXPECT_DOUBLE_EQ(windows[k].start, 10.0 + static_cast<double>(k));
        EXPECT_EQ(windows[k].fixations.size(), 45u);
    }
    ev.recording_duration = 44.0;
    EXPECT_TRUE(slide_windows(ev, WindowConfig{}).empty());
    EXPECT_THROW(slide_windows(ev, {45.0, 0.0, 0.1}), std::invalid_argument);
}

TEST(Features, CsvRoundTripIsExact)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<FeatureVector> rows(20);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto& x : rows[i].values) x = u(rng) / 3.0;
        rows[i].participant_id = "p" + std::to_string(i % 4);
        rows[i].label = static_cast<DocumentClass>(i % 3);
        rows[i].window_start = static_cast<double>(i) * 0.1;
    }
    std::stringstream ss;
    write_feature_csv(ss, rows);
    const auto back = read_feature_csv(ss);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].values, rows[i].values);
        EXPECT_EQ(back[i].participant_id, rows[i].participant_id);
        EXPECT_EQ(back[i].label, rows[i].label);
        EXPECT_EQ(back[i].window_start, rows[i].window_start);
    }
}

TEST(Features, CsvRejectsWrongHeader)
{
    std::stringstream ss("participant,label,window_start,a,b\n");
    EXPECT_THROW(read_feature_csv(ss), std::runtime_error);
}

}  // namespace
}  // namespace eyeadv
