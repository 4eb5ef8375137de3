#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "eyeadv/svm.hpp"
#include "support/oracles.hpp"

namespace eyeadv {
namespace {

double norm(const std::vector<double>& v)
{
    double s = 0.0;
    for (const double x : v) s += x * x;
    return std::sqrt(s);
}

// Decision values of a reference libsvm solve (C = 1, gamma = 0.5, tol 1e-10)
// on the same 12 points; libsvm orients the binary decision towards class 1.
TEST(Svm, MatchesReferenceSolver)
{
    const double pts[12][2] = {{0.0, 0.0}, {0.5, 0.2}, {0.2, 0.9}, {1.0, 0.4}, {0.8, 0.1}, {0.3, 0.3},
                               {1.5, 1.2}, {1.1, 1.6}, {2.0, 1.0}, {1.4, 0.7}, {0.9, 1.1}, {1.8, 1.9}};
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 12; ++i) {
        x.append_row(pts[i]);
        y.push_back(i < 6 ? 0 : 1);
    }
    SvmTrainConfig c;
    c.C = 1.0;
    c.gamma = 0.5;
    c.tolerance = 1e-8;
    const auto m = train_svm(x, y, c);
    const double q[5][2] = {{0.0, 0.0}, {1.0, 1.0}, {0.5, 1.5}, {2.0, 0.0}, {1.2, 0.9}};
    const double expected[5] = {-1.1795538484, 0.3838385907, 0.3062559028, 0.0826447142, 0.4864128145};
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(-m.pairs[0].decision(q[i], m.gamma), expected[i], 1e-6);
    }
    EXPECT_EQ(m.pairs[0].support_vectors.rows(), 7u);
}

TEST(Svm, DualSatisfiesKkt)
{
    const auto data = oracle::make_blobs(40, 4, 3, 1.2, 21);
    SvmTrainConfig c;
    c.C = 2.0;
    c.gamma = 0.3;
    c.tolerance = 1e-4;
    const auto m = train_svm(data.x, data.y, c);
    ASSERT_EQ(m.pairs.size(), 3u);
    for (const auto& p : m.pairs) {
        double sum = 0.0;
        for (const double a : p.dual_coef) {
            EXPECT_LE(std::abs(a), c.C + 1e-12);
            EXPECT_GT(std::abs(a), 0.0);
            sum += a;
        }
        EXPECT_NEAR(sum, 0.0, 1e-9);
        for (std::size_t r = 0; r < data.x.rows(); ++r) {
            const int label = data.y[r];
            if (label != p.positive && label != p.negative) continue;
            const double yi = label == p.positive ? 1.0 : -1.0;
            const double margin = yi * p.decision(data.x.row(r), m.gamma);
            double alpha = 0.0;
            for (std::size_t s = 0; s < p.support_vectors.rows(); ++s) {
                if (squared_distance(p.support_vectors.row(s), data.x.row(r)) == 0.0) alpha = std::abs(p.dual_coef[s]);
            }
            if (alpha == 0.0) EXPECT_GE(margin, 1.0 - 1e-3);
            else if (alpha < c.C - 1e-9) EXPECT_NEAR(margin, 1.0, 1e-3);
            else EXPECT_LE(margin, 1.0 + 1e-3);
        }
    }
}

TEST(Svm, SeparatesXor)
{
    Matrix x;
    std::vector<int> y;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 0.1);
    for (int i = 0; i < 40; ++i) {
        const double a = (i % 2) ? 1.0 : -1.0;
        const double b = (i / 2 % 2) ? 1.0 : -1.0;
        const double row[2] = {a + n(rng), b + n(rng)};
        x.append_row(row);
        y.push_back(a * b > 0 ? 1 : 0);
    }
    SvmTrainConfig c;
    c.C = 10.0;
    c.gamma = 1.0;
    const auto m = train_svm(x, y, c);
    for (std::size_t r = 0; r < x.rows(); ++r) EXPECT_EQ(svm_predict_label(m, x.row(r)), y[r]);
}

TEST(Svm, VotesMatchDirectDecisions)
{
    const auto data = oracle::make_blobs(30, 3, 4, 1.5, 8);
    const auto m = train_svm(data.x, data.y, {1.0, 0.5});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int t = 0; t < 300; ++t) {
        const std::vector<double> x{n(rng), n(rng), n(rng)};
        const auto pred = svm_predict(m, x);
        std::vector<int> votes(4, 0);
        std::vector<double> score(4, 0.0);
        for (int a = 0; a < 4; ++a) {
            for (int b = a + 1; b < 4; ++b) {
                const double g = oracle::decision(m, a, b, x);
                ++votes[g > 0.0 ? a : b];
                score[a] += g;
                score[b] -= g;
            }
        }
        int best = 0;
        for (int c = 1; c < 4; ++c) {
            if (votes[c] > votes[best] || (votes[c] == votes[best] && score[c] > score[best])) best = c;
        }
        EXPECT_EQ(pred.label, best);
        EXPECT_EQ(pred.votes, votes);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                if (a != b) EXPECT_NEAR(oriented_decision(m, a, b, x), oracle::decision(m, a, b, x), 1e-12);
            }
        }
    }
}

TEST(Svm, VoteTiesUseSummedDecisions)
{
    SvmRbfModel m;
    m.classes = {0, 1, 2};
    m.pairs.resize(3);
    // pairs (0,1), (0,2), (1,2); a cycle gives one vote each
    auto p = tally_votes(m, {0.5, -0.1, 0.2});
    EXPECT_EQ(p.votes, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(p.label, 0);
    p = tally_votes(m, {0.1, -0.5, 0.2});
    EXPECT_EQ(p.label, 2);
    p = tally_votes(m, {0.0, 0.0, 0.0});
    EXPECT_EQ(p.votes, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(p.label, 2);
}

TEST(Svm, GradientMatchesCentralDifferences)
{
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto data = oracle::make_blobs(25, 5, 3, 1.5, 100 + seed);
        const auto m = train_svm(data.x, data.y, {1.0, 0.2});
        for (std::size_t r = 0; r < data.x.rows(); ++r) {
            const auto x = data.x.row(r);
            for (const int ref : m.classes) {
                double gap = 0.0;
                oracle::rival_loss(m, x, ref, &gap);
                if (gap < 1e-3) continue;
                const auto g = svm_loss_gradient(m, x, ref);
                const auto fd = oracle::central_difference(m, x, ref, 1e-5);
                const double scale = std::max(norm(g.gradient), norm(fd));
                if (scale < 1e-6) continue;
                std::vector<double> diff(fd.size());
                for (std::size_t k = 0; k < fd.size(); ++k) diff[k] = g.gradient[k] - fd[k];
                EXPECT_LT(norm(diff) / scale, 1e-5);
                EXPECT_NEAR(g.loss, oracle::rival_loss(m, x, ref), 1e-12);
                ++checked;
            }
        }
    }
    EXPECT_GE(checked, 100u);
}

TEST(Svm, RoundTripIsBitExact)
{
    const auto data = oracle::make_blobs(20, 6, 3, 1.0, 4);
    const auto m = train_svm(data.x, data.y, {0.7, 0.123});
    std::stringstream ss;
    save_svm(ss, m);
    const auto back = load_svm(ss);
    EXPECT_EQ(back, m);
}

TEST(Svm, LoadRejectsGarbage)
{
    std::stringstream ss("not a model\n");
    EXPECT_THROW(load_svm(ss), std::runtime_error);
}

TEST(Svm, RejectsInvalidInput)
{
    Matrix x(2, 2);
    const std::vector<int> same{1, 1};
    EXPECT_THROW(train_svm(x, same), std::invalid_argument);
    const std::vector<int> two{0, 1};
    x(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(train_svm(x, two), std::invalid_argument);
    SvmTrainConfig bad;
    bad.C = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Svm, DeterministicTraining)
{
    const auto data = oracle::make_blobs(30, 4, 3, 1.5, 9);
    EXPECT_EQ(train_svm(data.x, data.y), train_svm(data.x, data.y));
}

}  // namespace
}  // namespace eyeadv
