#include "eyeadv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace eyeadv {

void Dataset::append(std::span<const double> row, int label, const std::string& who, double start)
{
    x.append_row(row);
    y.push_back(label);
    participant.push_back(who);
    window_start.push_back(start);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
    Dataset out;
    out.x = Matrix(0, x.cols());
    for (const auto r : rows) out.append(x.row(r), y[r], participant[r], window_start[r]);
    return out;
}

Dataset to_dataset(std::span<const FeatureVector> rows)
{
    Dataset d;
    d.x = Matrix(0, kNumFeatures);
    for (const auto& r : rows) d.append(r.values, static_cast<int>(r.label), r.participant_id, r.window_start);
    return d;
}

Standardizer Standardizer::fit(const Matrix& x)
{
    Standardizer s;
    const std::size_t n = x.rows();
    s.mean.assign(x.cols(), 0.0);
    s.scale.assign(x.cols(), 1.0);
    if (n == 0) return s;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x(i, j);
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += (x(i, j) - m) * (x(i, j) - m);
        v /= static_cast<double>(n);
        s.mean[j] = m;
        s.scale[j] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
    return s;
}

Matrix Standardizer::transform(const Matrix& x) const
{
    if (x.cols() != mean.size()) throw std::invalid_argument("standardizer: dimension mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
    }
    return out;
}

std::vector<Fold> lopo_folds(const Dataset& data, std::size_t validation_count)
{
    const std::set<std::string> people(data.participant.begin(), data.participant.end());
    if (people.size() < 2) throw std::invalid_argument("lopo: need at least 2 participants");

    std::vector<Fold> folds;
    for (const auto& who : people) {
        Fold f;
        f.held_out_participant = who;
        std::vector<std::size_t> train;
        std::map<int, std::vector<std::size_t>> held;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data.participant[i] == who) held[data.y[i]].push_back(i);
            else train.push_back(i);
        }
        std::vector<std::size_t> val;
        std::vector<std::size_t> test;
        for (auto& [label, rows] : held) {
            std::stable_sort(rows.begin(), rows.end(),
                             [&](std::size_t a, std::size_t b) { return data.window_start[a] < data.window_start[b]; });
            std::size_t nv = validation_count;
            if (rows.size() < validation_count + 1) {
                nv = rows.size() / 4;
                f.warnings.push_back(fmt::format("participant {} class {}: {} windows < {}; proportional split {}/{}",
                                                 who, label, rows.size(), validation_count + 1, nv, rows.size() - nv));
            }
            val.insert(val.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(nv));
            test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(nv), rows.end());
        }
        f.train = data.subset(train);
        f.validation = data.subset(val);
        f.test = data.subset(test);
        folds.push_back(std::move(f));
    }
    return folds;
}

std::string AttackScope::name() const
{
    if (!directed()) return "untargeted";
    return to_string(static_cast<DocumentClass>(*from)) + "->" + to_string(static_cast<DocumentClass>(*to));
}

std::vector<AttackScope> all_scopes(int num_classes)
{
    std::vector<AttackScope> out{AttackScope{}};
    for (int a = 0; a < num_classes; ++a) {
        for (int b = 0; b < num_classes; ++b) {
            if (a != b) out.push_back({a, b});
        }
    }
    return out;
}

std::vector<std::size_t> scope_rows(const Dataset& set, const AttackScope& scope)
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!scope.directed() || set.y[i] == *scope.from) rows.push_back(i);
    }
    return rows;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth)
{
    if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: size mismatch");
    if (truth.empty()) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

AttackEvaluation evaluate_attack(const SvmRbfModel& model, const Dataset& test, const AttackConfig& config,
                                 const AttackScope& scope)
{
    AttackEvaluation ev;
    ev.rows = scope_rows(test, scope);
    if (ev.rows.empty()) throw std::invalid_argument("evaluate_attack: no samples in scope " + scope.name());
    AttackConfig cfg = config;
    cfg.target = scope.to;
    std::vector<int> before;
    std::vector<int> after;
    std::vector<int> truth;
    for (const auto r : ev.rows) {
        const auto x = test.x.row(r);
        before.push_back(svm_predict_label(model, x));
        truth.push_back(test.y[r]);
        ev.results.push_back(fgsm_attack(model, x, test.y[r], cfg));
        after.push_back(ev.results.back().predicted_class);
    }
    ev.accuracy_before = accuracy(before, truth);
    ev.accuracy_after = accuracy(after, truth);
    return ev;
}

double transfer_evaluate(std::span<const AttackResult> adversarial, std::span<const int> labels,
                         const RandomForestModel& rf)
{
    if (adversarial.size() != labels.size()) throw std::invalid_argument("transfer: size mismatch");
    std::vector<int> pred;
    pred.reserve(labels.size());
    for (const auto& a : adversarial) pred.push_back(rf_predict_label(rf, a.adversarial));
    return accuracy(pred, labels);
}

std::vector<double> benign_pairwise_distances(const Matrix& benign)
{
    std::vector<double> d;
    d.reserve(benign.rows() * (benign.rows() - 1) / 2);
    for (std::size_t i = 0; i < benign.rows(); ++i) {
        for (std::size_t j = i + 1; j < benign.rows(); ++j) d.push_back(std::sqrt(squared_distance(benign.row(i), benign.row(j))));
    }
    return d;
}

std::vector<double> adversarial_distances(const Matrix& benign, const Matrix& adversarial)
{
    if (benign.rows() != adversarial.rows() || benign.cols() != adversarial.cols()) {
        throw std::invalid_argument("distance: benign/adversarial shape mismatch");
    }
    std::vector<double> d;
    d.reserve(benign.rows());
    for (std::size_t i = 0; i < benign.rows(); ++i) d.push_back(std::sqrt(squared_distance(benign.row(i), adversarial.row(i))));
    return d;
}

DistanceStats distance_stats(const Matrix& benign, const Matrix& adversarial)
{
    if (benign.rows() < 2) throw std::invalid_argument("distance: need at least 2 benign points");
    const auto bd = benign_pairwise_distances(benign);
    const auto ad = adversarial_distances(benign, adversarial);
    DistanceStats s;
    s.mean_benign_pairwise = mean(bd);
    s.mean_adversarial = mean(ad);
    s.std_benign = std::sqrt(sample_variance(bd));
    s.std_adversarial = std::sqrt(sample_variance(ad));
    if (bd.size() >= 2 && ad.size() >= 2) s.welch = welch_t_test(bd, ad);
    return s;
}

}  // namespace eyeadv
