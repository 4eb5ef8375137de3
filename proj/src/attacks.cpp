#include "eyeadv/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rng.hpp"

namespace eyeadv {

void AttackConfig::validate() const
{
    if (!(eps_step > 0.0)) throw std::invalid_argument("attack: eps_step must be positive");
    if (!(eps_max >= 0.0)) throw std::invalid_argument("attack: eps_max must be nonnegative");
}

bool attack_goal_reached(int predicted, int y_true, std::optional<int> target)
{
    return target ? predicted == *target : predicted != y_true;
}

std::size_t max_step_multiple(double eps_step, double eps_max)
{
    return static_cast<std::size_t>(std::floor(eps_max / eps_step + 1e-9));
}

std::vector<double> fgsm_direction(const SvmRbfModel& model, std::span<const double> x, int y_true,
                                   std::optional<int> target)
{
    const LossGradient g = svm_loss_gradient(model, x, target ? *target : y_true);
    if (g.zero) return {};
    double norm = 0.0;
    for (const double v : g.gradient) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) return {};
    std::vector<double> dir(g.gradient);
    const double sign = target ? -1.0 : 1.0;
    for (auto& v : dir) v *= sign / norm;
    return dir;
}

namespace {

std::vector<double> step_along(std::span<const double> x, std::span<const double> dir, double eps)
{
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += eps * dir[d];
    return out;
}

AttackResult unperturbed(std::span<const double> x, int predicted, bool success)
{
    AttackResult r;
    r.adversarial.assign(x.begin(), x.end());
    r.eps_used = 0.0;
    r.success = success;
    r.predicted_class = predicted;
    return r;
}

}  // namespace

AttackResult fgsm_standard(const SvmRbfModel& model, std::span<const double> x, int y_true, double eps,
                           std::optional<int> target)
{
    if (!(eps >= 0.0)) throw std::invalid_argument("fgsm: eps must be nonnegative");
    if (eps == 0.0) {
        const int p = svm_predict_label(model, x);
        return unperturbed(x, p, attack_goal_reached(p, y_true, target));
    }
    const auto dir = fgsm_direction(model, x, y_true, target);
    if (dir.empty()) return unperturbed(x, svm_predict_label(model, x), false);
    AttackResult r;
    r.adversarial = step_along(x, dir, eps);
    r.eps_used = eps;
    r.predicted_class = svm_predict_label(model, r.adversarial);
    r.success = attack_goal_reached(r.predicted_class, y_true, target);
    return r;
}

AttackResult fgsm_minimal(const SvmRbfModel& model, std::span<const double> x, int y_true, const AttackConfig& config)
{
    config.validate();
    const int p0 = svm_predict_label(model, x);
    if (attack_goal_reached(p0, y_true, config.target)) return unperturbed(x, p0, true);
    const auto dir = fgsm_direction(model, x, y_true, config.target);
    if (dir.empty()) return unperturbed(x, p0, false);

    const std::size_t kmax = max_step_multiple(config.eps_step, config.eps_max);
    AttackResult r;
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double eps = static_cast<double>(k) * config.eps_step;
        r.adversarial = step_along(x, dir, eps);
        r.predicted_class = svm_predict_label(model, r.adversarial);
        r.eps_used = eps;
        if (attack_goal_reached(r.predicted_class, y_true, config.target)) {
            r.success = true;
            return r;
        }
    }
    const bool off_grid = config.eps_max - static_cast<double>(kmax) * config.eps_step > 1e-9 * config.eps_step;
    if (!off_grid) {
        if (kmax == 0) return unperturbed(x, p0, false);
        return r;
    }
    // eps_max is not a multiple of eps_step: one last try at eps_max itself
    r.adversarial = step_along(x, dir, config.eps_max);
    r.predicted_class = svm_predict_label(model, r.adversarial);
    r.eps_used = config.eps_max;
    r.success = attack_goal_reached(r.predicted_class, y_true, config.target);
    return r;
}

MinimalTrace minimal_trace(const SvmRbfModel& model, std::span<const double> x, int y_true, const AttackConfig& config)
{
    config.validate();
    MinimalTrace t;
    t.target = config.target;
    t.eps_step = config.eps_step;
    t.max_multiple = max_step_multiple(config.eps_step, config.eps_max);
    t.initial_prediction = svm_predict_label(model, x);
    if (attack_goal_reached(t.initial_prediction, y_true, config.target)) {
        t.first_success = 0;
        return t;
    }
    t.direction = fgsm_direction(model, x, y_true, config.target);
    if (t.direction.empty()) return t;
    for (std::size_t k = 1; k <= t.max_multiple; ++k) {
        const auto adv = step_along(x, t.direction, static_cast<double>(k) * config.eps_step);
        t.predictions.push_back(svm_predict_label(model, adv));
        if (attack_goal_reached(t.predictions.back(), y_true, config.target)) {
            t.first_success = k;
            break;
        }
    }
    return t;
}

AttackResult trace_result(const SvmRbfModel& model, const MinimalTrace& trace, std::span<const double> x, int y_true,
                          double eps_max)
{
    if (!(eps_max >= 0.0)) throw std::invalid_argument("trace: eps_max must be nonnegative");
    const std::size_t kmax = max_step_multiple(trace.eps_step, eps_max);
    if (trace.first_success && *trace.first_success == 0) return unperturbed(x, trace.initial_prediction, true);
    if (trace.direction.empty()) return unperturbed(x, trace.initial_prediction, false);
    if (kmax > trace.max_multiple) throw std::invalid_argument("trace: eps_max beyond the traced range");

    AttackResult r;
    if (trace.first_success && *trace.first_success <= kmax) {
        const double eps = static_cast<double>(*trace.first_success) * trace.eps_step;
        r.adversarial = step_along(x, trace.direction, eps);
        r.predicted_class = trace.predictions[*trace.first_success - 1];
        r.eps_used = eps;
        r.success = true;
        return r;
    }
    const bool off_grid = eps_max - static_cast<double>(kmax) * trace.eps_step > 1e-9 * trace.eps_step;
    if (!off_grid) {
        if (kmax == 0) return unperturbed(x, trace.initial_prediction, false);
        const double eps = static_cast<double>(kmax) * trace.eps_step;
        r.adversarial = step_along(x, trace.direction, eps);
        r.predicted_class = trace.predictions[kmax - 1];
        r.eps_used = eps;
        return r;
    }
    r.adversarial = step_along(x, trace.direction, eps_max);
    r.predicted_class = svm_predict_label(model, r.adversarial);
    r.eps_used = eps_max;
    r.success = attack_goal_reached(r.predicted_class, y_true, trace.target);
    return r;
}

AttackResult fgsm_attack(const SvmRbfModel& model, std::span<const double> x, int y_true, const AttackConfig& config)
{
    if (config.mode == FgsmMode::standard) {
        config.validate();
        return fgsm_standard(model, x, y_true, config.eps_max, config.target);
    }
    return fgsm_minimal(model, x, y_true, config);
}

void EpsSelection::validate() const
{
    if (grid.empty()) throw std::invalid_argument("eps selection: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("eps selection: grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("eps selection: grid must increase");
    }
}

std::vector<double> default_eps_grid(double step, double max)
{
    std::vector<double> grid;
    const std::size_t k = max_step_multiple(step, max);
    for (std::size_t i = 1; i <= k; ++i) grid.push_back(static_cast<double>(i) * step);
    return grid;
}

EpsChoice select_eps(std::span<const AttackCurve> curves, const EpsSelection& selection)
{
    selection.validate();
    if (curves.empty()) throw std::invalid_argument("eps selection: no curves");
    const std::size_t g = selection.grid.size();
    for (const auto& c : curves) {
        if (c.size() != g) throw std::invalid_argument("eps selection: curve/grid size mismatch");
    }
    std::vector<double> mean_acc(g, 0.0);
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < g; ++i) mean_acc[i] += c[i];
    }
    for (auto& m : mean_acc) m /= static_cast<double>(curves.size());

    EpsChoice out;
    std::size_t best = 0;
    for (std::size_t i = 1; i < g; ++i) {
        if (mean_acc[i] < mean_acc[best]) best = i;
    }
    out.general = selection.grid[best];
    for (const auto& c : curves) {
        std::size_t b = 0;
        for (std::size_t i = 1; i < g; ++i) {
            if (c[i] < c[b]) b = i;
        }
        out.per_person.push_back(selection.grid[b]);
    }
    for (std::size_t i = 0; i < g; ++i) {
        if (mean_acc[i] <= selection.target_accuracy) {
            out.guess_level = selection.grid[i];
            break;
        }
    }
    return out;
}

void RawAttackConfig::validate() const
{
    if (!(step_magnitude > 0.0) || step_magnitude > max_magnitude) {
        throw std::invalid_argument("raw attack: need 0 < step_magnitude <= max_magnitude");
    }
    if (fields_perturbed.empty()) throw std::invalid_argument("raw attack: no fields to perturb");
}

namespace {

double& field_ref(GazeSample& s, RawField f)
{
    switch (f) {
        case RawField::x: return s.x;
        case RawField::y: return s.y;
        case RawField::pupil_diameter: return s.pupil_diameter;
    }
    throw std::invalid_argument("raw attack: unknown field");
}

double field_value(const GazeSample& s, RawField f)
{
    GazeSample copy = s;
    return field_ref(copy, f);
}

}  // namespace

RawAttackOutcome raw_blackbox_attack(std::span<const GazeSample> samples, const RawPredictor& predict, int y_true,
                                     const RawAttackConfig& config)
{
    config.validate();
    RawAttackOutcome out;
    out.perturbed.assign(samples.begin(), samples.end());
    out.result.predicted_class = y_true;
    if (config.query_budget == 0 || samples.empty()) return out;

    std::mt19937_64 rng(config.seed);
    int current = predict(out.perturbed);
    out.result.queries = 1;
    out.result.predicted_class = current;
    if (attack_goal_reached(current, y_true, config.target)) {
        out.result.success = true;
        return out;
    }

    const std::size_t nf = config.fields_perturbed.size();
    // Proposals clamped to no change cost no query; bound them anyway.
    std::size_t proposals = 0;
    const std::size_t max_proposals = 100 * config.query_budget;
    while (out.result.queries < config.query_budget && proposals++ < max_proposals) {
        const std::size_t idx = uniform_index(rng, samples.size());
        const RawField field = config.fields_perturbed[uniform_index(rng, nf)];
        const double step = uniform_real(rng, -config.step_magnitude, config.step_magnitude);

        double& value = field_ref(out.perturbed[idx], field);
        const double original = field_value(samples[idx], field);
        const double previous = value;
        double proposed = std::clamp(value + step - original, -config.max_magnitude, config.max_magnitude) + original;
        if (field == RawField::pupil_diameter) proposed = std::max(0.0, proposed);
        else proposed = std::clamp(proposed, 0.0, 1.0);
        if (proposed == previous) continue;
        value = proposed;

        const int label = predict(out.perturbed);
        ++out.result.queries;
        if (attack_goal_reached(label, y_true, config.target)) {
            out.result.predicted_class = label;
            out.result.success = true;
            break;
        }
        if (label != current) value = previous;  // moved away from the goal
    }

    double max_change = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (const RawField f : config.fields_perturbed) {
            const double d = std::abs(field_ref(out.perturbed[i], f) - field_value(samples[i], f));
            max_change = std::max(max_change, d);
        }
    }
    out.result.eps_used = max_change;
    return out;
}

}  // namespace eyeadv
