#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "eyeadv/matrix.hpp"

namespace eyeadv {

struct RfTrainConfig {
    std::size_t n_trees = 100;
    std::size_t min_samples_leaf = 1;
    /// Features tried per node; 0 means floor(sqrt(dim)).
    std::size_t max_features = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Flat binary tree. A node with feature < 0 is a leaf; `leaf` indexes into
/// `leaf_proba` (one row of class probabilities per leaf).
struct DecisionTree {
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int leaf = -1;
        friend bool operator==(const Node&, const Node&) = default;
    };
    std::vector<Node> nodes;
    std::vector<std::vector<double>> leaf_proba;

    /// Samples with x[feature] <= threshold go left.
    const std::vector<double>& route(std::span<const double> x) const;
    std::size_t depth() const;
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct RandomForestModel {
    std::vector<int> classes;
    std::size_t dim = 0;
    std::vector<DecisionTree> trees;
    friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;
};

/// Bootstrap resampling per tree, Gini splits over a random feature subset per
/// node. Tree t depends only on (data, config without n_trees, seed, t), so a
/// forest's first k trees equal the k-tree forest trained with the same seed.
RandomForestModel train_rf(const Matrix& features, std::span<const int> labels, const RfTrainConfig& config = {});

struct RfPrediction {
    int label = 0;
    std::vector<double> proba;
};

/// Mean of leaf distributions; argmax with lowest-index tie-break.
RfPrediction rf_predict(const RandomForestModel& model, std::span<const double> x);
int rf_predict_label(const RandomForestModel& model, std::span<const double> x);

/// Copy of the first `n` trees.
RandomForestModel forest_prefix(const RandomForestModel& model, std::size_t n);

void save_rf(std::ostream& os, const RandomForestModel& model);
RandomForestModel load_rf(std::istream& is);

}  // namespace eyeadv
