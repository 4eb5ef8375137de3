#include "eyeadv/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "rng.hpp"

namespace eyeadv {

void RfTrainConfig::validate() const
{
    if (n_trees < 1) throw std::invalid_argument("rf: n_trees must be >= 1");
    if (min_samples_leaf < 1) throw std::invalid_argument("rf: min_samples_leaf must be >= 1");
}

const std::vector<double>& DecisionTree::route(std::span<const double> x) const
{
    int n = 0;
    while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
        const Node& node = nodes[static_cast<std::size_t>(n)];
        n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return leaf_proba[static_cast<std::size_t>(nodes[static_cast<std::size_t>(n)].leaf)];
}

std::size_t DecisionTree::depth() const
{
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    // children are always appended after their parent
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<std::size_t>& y, std::size_t n_classes, std::size_t min_leaf,
                std::size_t max_features, std::mt19937_64& rng)
        : x_(x), y_(y), k_(n_classes), min_leaf_(min_leaf), max_features_(max_features), rng_(rng)
    {
    }

    DecisionTree build(std::vector<std::size_t> sample)
    {
        tree_ = {};
        grow(std::move(sample));
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double impurity = std::numeric_limits<double>::infinity();
    };

    int make_leaf(const std::vector<std::size_t>& sample)
    {
        std::vector<double> proba(k_, 0.0);
        for (const auto s : sample) proba[y_[s]] += 1.0;
        for (auto& p : proba) p /= static_cast<double>(sample.size());
        tree_.leaf_proba.push_back(std::move(proba));
        DecisionTree::Node node;
        node.leaf = static_cast<int>(tree_.leaf_proba.size() - 1);
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size() - 1);
    }

    Split best_split(const std::vector<std::size_t>& sample)
    {
        const std::size_t dim = x_.cols();
        std::vector<std::size_t> features(dim);
        std::iota(features.begin(), features.end(), 0);
        // partial Fisher-Yates draw of max_features distinct features
        const std::size_t m = std::min(max_features_, dim);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + uniform_index(rng_, dim - i);
            std::swap(features[i], features[j]);
        }

        Split best;
        const std::size_t n = sample.size();
        std::vector<std::size_t> order(sample);
        std::vector<double> left(k_);
        std::vector<double> total(k_, 0.0);
        for (const auto s : sample) total[y_[s]] += 1.0;

        for (std::size_t fi = 0; fi < m; ++fi) {
            const std::size_t f = features[fi];
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double va = x_(a, f);
                const double vb = x_(b, f);
                return va < vb || (va == vb && a < b);
            });
            std::fill(left.begin(), left.end(), 0.0);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left[y_[order[i]]] += 1.0;
                const std::size_t nl = i + 1;
                const std::size_t nr = n - nl;
                const double v = x_(order[i], f);
                const double vn = x_(order[i + 1], f);
                if (v == vn || nl < min_leaf_ || nr < min_leaf_) continue;
                double gl = 1.0;
                double gr = 1.0;
                for (std::size_t c = 0; c < k_; ++c) {
                    const double pl = left[c] / static_cast<double>(nl);
                    const double pr = (total[c] - left[c]) / static_cast<double>(nr);
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                const double impurity = (static_cast<double>(nl) * gl + static_cast<double>(nr) * gr);
                if (impurity < best.impurity) {
                    best.impurity = impurity;
                    best.feature = static_cast<int>(f);
                    best.threshold = v + (vn - v) / 2.0;
                    if (best.threshold >= vn) best.threshold = v;
                }
            }
        }
        return best;
    }

    int grow(std::vector<std::size_t> sample)
    {
        const bool pure = std::all_of(sample.begin(), sample.end(), [&](std::size_t s) { return y_[s] == y_[sample[0]]; });
        if (pure || sample.size() < 2 * min_leaf_) return make_leaf(sample);
        const Split split = best_split(sample);
        if (split.feature < 0) return make_leaf(sample);

        std::vector<std::size_t> l;
        std::vector<std::size_t> r;
        for (const auto s : sample) {
            (x_(s, static_cast<std::size_t>(split.feature)) <= split.threshold ? l : r).push_back(s);
        }
        sample.clear();
        sample.shrink_to_fit();

        DecisionTree::Node node;
        node.feature = split.feature;
        node.threshold = split.threshold;
        tree_.nodes.push_back(node);
        const auto id = tree_.nodes.size() - 1;
        const int left_id = grow(std::move(l));
        const int right_id = grow(std::move(r));
        tree_.nodes[id].left = left_id;
        tree_.nodes[id].right = right_id;
        return static_cast<int>(id);
    }

    const Matrix& x_;
    const std::vector<std::size_t>& y_;
    std::size_t k_;
    std::size_t min_leaf_;
    std::size_t max_features_;
    std::mt19937_64& rng_;
    DecisionTree tree_;
};

}  // namespace

RandomForestModel train_rf(const Matrix& features, std::span<const int> labels, const RfTrainConfig& config)
{
    config.validate();
    if (features.rows() != labels.size()) throw std::invalid_argument("rf: feature/label count mismatch");
    for (const double v : features.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("rf: non-finite feature value");
    }
    RandomForestModel model;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2) throw std::invalid_argument("rf: degenerate training set");
    model.dim = features.cols();

    std::vector<std::size_t> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y[i] = static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
                                        model.classes.begin());
    }
    const std::size_t max_features = config.max_features > 0
                                         ? config.max_features
                                         : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                                        std::sqrt(static_cast<double>(model.dim))));
    const std::size_t n = labels.size();
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(config.seed, t));
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = uniform_index(rng, n);
        TreeBuilder builder(features, y, model.classes.size(), config.min_samples_leaf, max_features, rng);
        model.trees.push_back(builder.build(std::move(sample)));
    }
    return model;
}

RfPrediction rf_predict(const RandomForestModel& model, std::span<const double> x)
{
    if (x.size() != model.dim) throw std::invalid_argument("rf: dimension mismatch");
    RfPrediction p;
    p.proba.assign(model.classes.size(), 0.0);
    for (const auto& tree : model.trees) {
        const auto& leaf = tree.route(x);
        for (std::size_t c = 0; c < leaf.size(); ++c) p.proba[c] += leaf[c];
    }
    for (auto& v : p.proba) v /= static_cast<double>(model.trees.size());
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.proba.size(); ++c) {
        if (p.proba[c] > p.proba[best]) best = c;
    }
    p.label = model.classes[best];
    return p;
}

int rf_predict_label(const RandomForestModel& model, std::span<const double> x) { return rf_predict(model, x).label; }

RandomForestModel forest_prefix(const RandomForestModel& model, std::size_t n)
{
    if (n < 1 || n > model.trees.size()) throw std::invalid_argument("rf: invalid prefix size");
    RandomForestModel out;
    out.classes = model.classes;
    out.dim = model.dim;
    out.trees.assign(model.trees.begin(), model.trees.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

namespace {

constexpr const char* kRfMagic = "eyeadv-rf";
constexpr int kRfVersion = 1;

template <typename T>
T read_token(std::istream& is, const char* what)
{
    T v{};
    if (!(is >> v)) throw std::runtime_error(std::string("model file: expected ") + what);
    return v;
}

double read_hex(std::istream& is, const char* what)
{
    const auto tok = read_token<std::string>(is, what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw std::runtime_error("model file: bad number '" + tok + "'");
    return v;
}

void keyword(std::istream& is, const std::string& kw)
{
    const auto tok = read_token<std::string>(is, kw.c_str());
    if (tok != kw) throw std::runtime_error("model file: expected '" + kw + "', got '" + tok + "'");
}

}  // namespace

void save_rf(std::ostream& os, const RandomForestModel& model)
{
    os << kRfMagic << ' ' << kRfVersion << '\n';
    os << "dim " << model.dim << '\n';
    os << "classes " << model.classes.size();
    for (const int c : model.classes) os << ' ' << c;
    os << '\n';
    os << "trees " << model.trees.size() << '\n';
    for (const auto& t : model.trees) {
        os << "tree " << t.nodes.size() << ' ' << t.leaf_proba.size() << '\n';
        for (const auto& n : t.nodes) {
            os << n.feature << ' ' << fmt::format("{:a}", n.threshold) << ' ' << n.left << ' ' << n.right << ' '
               << n.leaf << '\n';
        }
        for (const auto& p : t.leaf_proba) {
            for (std::size_t c = 0; c < p.size(); ++c) os << (c ? " " : "") << fmt::format("{:a}", p[c]);
            os << '\n';
        }
    }
    os << "end\n";
}

RandomForestModel load_rf(std::istream& is)
{
    keyword(is, kRfMagic);
    if (read_token<int>(is, "version") != kRfVersion) throw std::runtime_error("model file: unsupported rf format version");
    RandomForestModel m;
    keyword(is, "dim");
    m.dim = read_token<std::size_t>(is, "dim");
    keyword(is, "classes");
    const auto nc = read_token<std::size_t>(is, "class count");
    for (std::size_t c = 0; c < nc; ++c) m.classes.push_back(read_token<int>(is, "class"));
    keyword(is, "trees");
    const auto nt = read_token<std::size_t>(is, "tree count");
    for (std::size_t t = 0; t < nt; ++t) {
        keyword(is, "tree");
        DecisionTree tree;
        const auto nn = read_token<std::size_t>(is, "node count");
        const auto nl = read_token<std::size_t>(is, "leaf count");
        for (std::size_t i = 0; i < nn; ++i) {
            DecisionTree::Node n;
            n.feature = read_token<int>(is, "feature");
            n.threshold = read_hex(is, "threshold");
            n.left = read_token<int>(is, "left");
            n.right = read_token<int>(is, "right");
            n.leaf = read_token<int>(is, "leaf");
            if (n.feature >= static_cast<int>(m.dim)) throw std::runtime_error("model file: feature index out of range");
            tree.nodes.push_back(n);
        }
        for (std::size_t l = 0; l < nl; ++l) {
            std::vector<double> p(nc);
            for (auto& v : p) v = read_hex(is, "leaf probability");
            tree.leaf_proba.push_back(std::move(p));
        }
        m.trees.push_back(std::move(tree));
    }
    keyword(is, "end");
    return m;
}

}  // namespace eyeadv
