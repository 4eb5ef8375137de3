#include "eyeadv/defense.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rng.hpp"

namespace eyeadv {

void DefenseConfig::validate() const
{
    if (!(fraction > 0.0) || fraction > 1.0) throw std::invalid_argument("defense: fraction must be in (0, 1]");
    attack.validate();
    if (attack.target) throw std::invalid_argument("defense: adversarial training examples are untargeted");
}

RetrainResult adversarial_retrain(const Dataset& train, const SvmTrainConfig& svm_config, const DefenseConfig& config)
{
    config.validate();
    return adversarial_retrain(train, train_svm(train.x, train.y, svm_config), svm_config, config);
}

RetrainResult adversarial_retrain(const Dataset& train, const SvmRbfModel& base, const SvmTrainConfig& svm_config,
                                  const DefenseConfig& config)
{
    config.validate();
    const std::size_t n = train.size();
    const auto count = static_cast<std::size_t>(std::floor(config.fraction * static_cast<double>(n)));
    if (count < 1) throw std::invalid_argument("defense: empty augmentation");

    RetrainResult out;
    out.base = base;

    // seeded partial Fisher-Yates: first `count` entries are the sample
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + uniform_index(rng, n - i)]);
    out.chosen_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));

    out.augmented = train;
    AttackConfig attack = config.attack;
    attack.mode = FgsmMode::minimal;
    for (const auto r : out.chosen_rows) {
        const AttackResult a = fgsm_minimal(out.base, train.x.row(r), train.y[r], attack);
        if (a.success && a.eps_used > 0.0) ++out.successful_attacks;
        out.augmented.append(a.adversarial, train.y[r], train.participant[r], train.window_start[r]);
    }
    out.retrained = train_svm(out.augmented.x, out.augmented.y, svm_config);
    return out;
}

std::vector<DefenseRow> evaluate_defense(const SvmRbfModel& retrained, const Dataset& test, const AttackConfig& attack,
                                         std::span<const AttackScope> scopes)
{
    std::vector<DefenseRow> rows;
    for (const auto& scope : scopes) {
        const AttackEvaluation ev = evaluate_attack(retrained, test, attack, scope);
        DefenseRow row;
        row.scope = scope;
        row.benign_accuracy = ev.accuracy_before;
        row.attack_accuracy = ev.accuracy_after;
        Matrix benign(0, test.x.cols());
        Matrix adv(0, test.x.cols());
        for (std::size_t k = 0; k < ev.rows.size(); ++k) {
            benign.append_row(test.x.row(ev.rows[k]));
            adv.append_row(ev.results[k].adversarial);
        }
        if (benign.rows() >= 2) {
            row.distances = distance_stats(benign, adv);
            row.benign_distances = benign_pairwise_distances(benign);
        }
        row.adversarial_distances = adversarial_distances(benign, adv);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace eyeadv
