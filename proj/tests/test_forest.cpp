#include <gtest/gtest.h>

#include <sstream>

#include "eyeadv/forest.hpp"
#include "support/oracles.hpp"

namespace eyeadv {
namespace {

// Walks the node array directly.
const std::vector<double>& walk(const DecisionTree& t, std::span<const double> x)
{
    int node = 0;
    while (t.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = t.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return t.leaf_proba[static_cast<std::size_t>(t.nodes[static_cast<std::size_t>(node)].leaf)];
}

TEST(Forest, PredictionAveragesLeafDistributions)
{
    const auto data = oracle::make_blobs(40, 5, 3, 2.0, 3);
    RfTrainConfig c;
    c.n_trees = 25;
    c.seed = 9;
    const auto rf = train_rf(data.x, data.y, c);
    ASSERT_EQ(rf.trees.size(), 25u);
    for (std::size_t r = 0; r < data.x.rows(); ++r) {
        std::vector<double> avg(3, 0.0);
        for (const auto& t : rf.trees) {
            const auto& p = walk(t, data.x.row(r));
            EXPECT_EQ(&p, &t.route(data.x.row(r)));
            for (std::size_t k = 0; k < 3; ++k) avg[k] += p[k] / 25.0;
        }
        const auto pred = rf_predict(rf, data.x.row(r));
        std::size_t best = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(pred.proba[k], avg[k], 1e-12);
            if (avg[k] > avg[best] + 1e-12) best = k;
        }
        EXPECT_EQ(pred.label, rf.classes[best]);
    }
}

TEST(Forest, LeafDistributionsAreProbabilities)
{
    const auto data = oracle::make_blobs(30, 4, 3, 1.5, 5);
    const auto rf = train_rf(data.x, data.y, {10, 3, 0, 1});
    for (const auto& t : rf.trees) {
        for (const auto& p : t.leaf_proba) {
            double s = 0.0;
            for (const double v : p) {
                EXPECT_GE(v, 0.0);
                s += v;
            }
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(Forest, LearnsSeparatedClasses)
{
    const auto all = oracle::make_blobs(100, 6, 3, 0.5, 12);
    Matrix x;
    std::vector<int> y;
    for (std::size_t r = 0; r < 150; ++r) {
        x.append_row(all.x.row(r));
        y.push_back(all.y[r]);
    }
    const auto rf = train_rf(x, y, {50, 1, 0, 2});
    std::size_t correct = 0;
    for (std::size_t r = 150; r < 300; ++r) correct += rf_predict_label(rf, all.x.row(r)) == all.y[r];
    EXPECT_GE(static_cast<double>(correct) / 150.0, 0.95);
}

TEST(Forest, SmallForestIsPrefixOfLargeOne)
{
    const auto data = oracle::make_blobs(30, 5, 3, 1.5, 6);
    RfTrainConfig c;
    c.seed = 77;
    c.min_samples_leaf = 4;
    c.n_trees = 30;
    const auto big = train_rf(data.x, data.y, c);
    c.n_trees = 10;
    const auto small = train_rf(data.x, data.y, c);
    EXPECT_EQ(forest_prefix(big, 10), small);
    EXPECT_EQ(train_rf(data.x, data.y, c), small);
    c.seed = 78;
    EXPECT_NE(train_rf(data.x, data.y, c), small);
}

TEST(Forest, HugeLeafSizeGivesStumps)
{
    const auto data = oracle::make_blobs(10, 3, 3, 1.0, 1);
    const auto rf = train_rf(data.x, data.y, {5, 1000, 0, 3});
    for (const auto& t : rf.trees) {
        EXPECT_EQ(t.nodes.size(), 1u);
        EXPECT_EQ(t.depth(), 0u);
    }
}

TEST(Forest, RoundTripIsExact)
{
    const auto data = oracle::make_blobs(30, 5, 3, 1.5, 2);
    const auto rf = train_rf(data.x, data.y, {8, 2, 0, 4});
    std::stringstream ss;
    save_rf(ss, rf);
    EXPECT_EQ(load_rf(ss), rf);
}

TEST(Forest, RejectsInvalidConfig)
{
    RfTrainConfig c;
    c.n_trees = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.n_trees = 1;
    c.min_samples_leaf = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace eyeadv
