#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "eyeadv/recording.hpp"
#include "eyeadv/synth.hpp"
#include "support/oracles.hpp"

namespace eyeadv {
namespace {

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("eyeadv_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::size_t error_line(const std::string& text)
{
    std::stringstream ss(text);
    try {
        read_recording_csv(ss);
    } catch (const RecordingError& e) {
        return e.line();
    }
    return 0;
}

TEST(Io, RecordingRoundTripIsExact)
{
    const auto s = oracle::make_planted_stream(4).samples;
    std::stringstream ss;
    write_recording_csv(ss, s);
    EXPECT_EQ(read_recording_csv(ss), s);
}

TEST(Io, RowsAreSortedByTimestamp)
{
    std::stringstream ss("timestamp,x,y,pupil_diameter,confidence\n0.2,0.5,0.5,3,1\n0.1,0.4,0.4,3,1\n");
    const auto s = read_recording_csv(ss);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].timestamp, 0.1);
    EXPECT_EQ(s[1].x, 0.5);
}

TEST(Io, MalformedRowsReportTheirLine)
{
    const std::string h = "timestamp,x,y,pupil_diameter,confidence\n";
    EXPECT_EQ(error_line(h + "0,0.5,0.5,3,1\n0.1,1.5,0.5,3,1\n"), 3u);
    EXPECT_EQ(error_line(h + "0,0.5,-0.1,3,1\n"), 2u);
    EXPECT_EQ(error_line(h + "0,0.5,0.5,3\n"), 2u);
    EXPECT_EQ(error_line(h + "0,abc,0.5,3,1\n"), 2u);
    EXPECT_EQ(error_line(h + "0,0.5,0.5,-1,1\n"), 2u);
    EXPECT_EQ(error_line(h + "0,0.5,0.5,3,2\n"), 2u);
    EXPECT_EQ(error_line(h + "nan,0.5,0.5,3,1\n"), 2u);
    EXPECT_EQ(error_line("t,x,y\n"), 1u);
    EXPECT_EQ(error_line(""), 1u);
}

TEST(Io, MetadataRoundTrip)
{
    RecordingMetadata m{"p07", DocumentClass::textbook, 60.0};
    std::stringstream ss;
    write_metadata(ss, m);
    const auto back = read_metadata(ss);
    EXPECT_EQ(back.participant_id, "p07");
    EXPECT_EQ(back.label, DocumentClass::textbook);
    EXPECT_EQ(back.sample_rate_hz, 60.0);
    std::stringstream bad("colour = blue\n");
    EXPECT_THROW(read_metadata(bad), std::runtime_error);
}

TEST(Io, DatasetRoundTripThroughManifest)
{
    SynthDatasetConfig c;
    c.participants = 2;
    c.duration = 50.0;
    const auto recs = synth_generate(c);
    ASSERT_EQ(recs.size(), 6u);
    const auto dir = scratch("dataset");
    write_dataset(dir, recs);
    const auto manifest = read_manifest(dir / "manifest.csv");
    ASSERT_EQ(manifest.size(), 6u);
    EXPECT_EQ(manifest[0].participant_id, "p00");
    const auto back = load_dataset(dir / "manifest.csv");
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].meta.participant_id, recs[i].meta.participant_id);
        EXPECT_EQ(back[i].meta.label, recs[i].meta.label);
        EXPECT_EQ(back[i].samples, recs[i].samples);
    }
    std::filesystem::remove_all(dir);
}

TEST(Io, MissingFilesAreReported)
{
    EXPECT_THROW(load_recording("/nonexistent/rec.csv"), std::runtime_error);
    EXPECT_THROW(read_manifest("/nonexistent/manifest.csv"), std::runtime_error);
}

TEST(Synth, GenerationIsSeedDeterministic)
{
    SynthDatasetConfig c;
    c.participants = 2;
    c.duration = 60.0;
    const auto a = synth_generate(c);
    const auto b = synth_generate(c);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].samples, b[i].samples);
    c.seed = 2;
    EXPECT_NE(synth_generate(c)[0].samples, a[0].samples);
}

TEST(Synth, SamplesAreValidAndRegular)
{
    const auto profiles = default_profiles();
    for (const auto& p : profiles) {
        const auto rec = synth_recording(p, draw_participant(3, 1), 90.0, 5);
        EXPECT_EQ(rec.meta.label, p.label);
        ASSERT_EQ(rec.samples.size(), 90u * 30);
        for (std::size_t i = 0; i < rec.samples.size(); ++i) {
            const auto& s = rec.samples[i];
            EXPECT_NEAR(s.timestamp, static_cast<double>(i) / 30.0, 1e-9);
            EXPECT_GE(s.x, 0.0);
            EXPECT_LE(s.x, 1.0);
            EXPECT_GE(s.y, 0.0);
            EXPECT_LE(s.y, 1.0);
            EXPECT_GE(s.confidence, 0.0);
            EXPECT_LE(s.confidence, 1.0);
            EXPECT_GE(s.pupil_diameter, 0.0);
        }
    }
}

TEST(Synth, RejectsImpossibleConfigurations)
{
    SynthDatasetConfig c;
    c.participants = 1;
    EXPECT_THROW(synth_generate(c), std::invalid_argument);
    c.participants = 2;
    c.duration = 10.0;
    EXPECT_THROW(synth_generate(c), std::invalid_argument);
    SynthProfile p;
    p.fixation_mean = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace eyeadv
