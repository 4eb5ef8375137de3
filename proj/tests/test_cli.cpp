#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "eyeadv/report.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kWork = fs::temp_directory_path() / "eyeadv_test_cli";

int cli(const std::string& args)
{
    const std::string cmd = std::string(EYEADV_CLI) + " " + args + " > " + (kWork / "stdout.txt").string() + " 2> " +
                            (kWork / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& name) { return (kWork / name).string(); }

const std::string kTiny = "--set synth.duration=60 --set window.size=20 --set window.step=5 "
                          "--set experiment.validation_count=3 --set attack.grid=0.5,1.0 --set rf.trees=5 "
                          "--set rf.min_samples_leaf=2 --set defense.fractions=0.5 -q";

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
    static void TearDownTestSuite() { fs::remove_all(kWork); }
};

TEST_F(Cli, UsageErrorsExitNonZero)
{
    EXPECT_NE(cli(""), 0);
    EXPECT_NE(cli("frobnicate"), 0);
    EXPECT_NE(cli("train"), 0);
    EXPECT_NE(cli("--set nosuch.key=1 synth --out " + p("x")), 0);
    EXPECT_NE(eyeadv::read_text(kWork / "stderr.txt").find("nosuch.key"), std::string::npos);
}

TEST_F(Cli, StepwisePipeline)
{
    ASSERT_EQ(cli("--seed 3 --out " + p("data") + " synth --participants 2 --duration 60 -q"), 0);
    ASSERT_TRUE(fs::exists(kWork / "data" / "manifest.csv"));
    ASSERT_EQ(cli("--out " + p("events.csv") + " detect " + p("data/p00_comic.csv")), 0);
    EXPECT_EQ(eyeadv::read_text(kWork / "events.csv").rfind("kind,start,end", 0), 0u);
    ASSERT_EQ(cli("--set window.size=20 --out " + p("features.csv") + " features --manifest " + p("data/manifest.csv") +
                  " -q"),
              0);
    ASSERT_EQ(cli("--out " + p("scaled.csv") + " scale " + p("features.csv") + " --exclude p01"), 0);
    EXPECT_EQ(eyeadv::read_text(kWork / "scaled.csv").substr(0, 40), eyeadv::read_text(kWork / "features.csv").substr(0, 40));
    ASSERT_EQ(cli("--out " + p("svm.model") + " train " + p("scaled.csv") + " --exclude p01"), 0);
    ASSERT_EQ(cli("--out " + p("rf.model") + " train --model rf --trees 10 " + p("features.csv")), 0);
    ASSERT_EQ(cli("--set attack.eps_max=1 --out " + p("adv.csv") + " attack --model " + p("svm.model") + " " +
                  p("scaled.csv")),
              0);
    EXPECT_TRUE(fs::exists(kWork / "adv.log.csv"));
    ASSERT_EQ(cli("--out " + p("adv_t.csv") + " attack --target textbook --model " + p("svm.model") + " " +
                  p("features.csv")),
              0);
    ASSERT_EQ(cli("transfer --model " + p("rf.model") + " " + p("adv.csv")), 0);
    EXPECT_EQ(eyeadv::read_text(kWork / "stdout.txt").rfind("accuracy,", 0), 0u);
    ASSERT_EQ(cli("--out " + p("retrained.model") + " defend --fraction 0.2 " + p("features.csv") + " -q"), 0);
    EXPECT_TRUE(fs::exists(kWork / "retrained.model"));
    EXPECT_NE(cli("attack --model " + p("features.csv") + " " + p("features.csv")), 0);
}

TEST_F(Cli, ReportRebuildsRunTables)
{
    ASSERT_EQ(cli("--seed 5 --out " + p("run") + " " + kTiny + " run --participants 3"), 0);
    ASSERT_EQ(cli("--out " + p("rebuilt") + " report " + p("run")), 0);
    for (const char* f : {"table3.csv", "fig3_accuracy.csv", "fig4_distances.csv", "fig6_retrain.csv"}) {
        EXPECT_EQ(eyeadv::read_text(kWork / "run" / f), eyeadv::read_text(kWork / "rebuilt" / f)) << f;
    }
}

}  // namespace
