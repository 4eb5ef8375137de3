#include "eyeadv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "eyeadv/attacks.hpp"
#include "eyeadv/defense.hpp"
#include "eyeadv/events.hpp"
#include "eyeadv/stats.hpp"
#include "eyeadv/synth.hpp"
#include "rng.hpp"

namespace eyeadv {

StageError::StageError(std::string stage, const std::string& what)
    : std::runtime_error("stage " + stage + ": " + what), stage_(std::move(stage))
{
}

std::vector<FeatureVector> extract_dataset_features(std::span<const Recording> recordings, const ExperimentConfig& config)
{
    std::vector<FeatureVector> out;
    for (const auto& r : recordings) {
        EventDetectionConfig ev = config.events;
        ev.sample_rate_hz = r.meta.sample_rate_hz;
        EventStream events = detect_events(r.samples, ev);
        events.participant_id = r.meta.participant_id;
        events.label = r.meta.label;
        auto rows = extract_recording_features(events, config.window);
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

namespace {

double accuracy_of(const auto& predict, const Dataset& set, std::span<const std::size_t> rows)
{
    if (rows.empty()) return 0.0;
    std::size_t ok = 0;
    for (const auto r : rows) ok += predict(set.x.row(r)) == set.y[r] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

std::vector<std::size_t> all_rows(const Dataset& set)
{
    std::vector<std::size_t> rows(set.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

Dataset standardized(const Dataset& d, const Standardizer& s)
{
    Dataset out = d;
    out.x = s.transform(d.x);
    return out;
}

void add_summary(std::vector<Measurement>& out, const std::string& who, const std::string& scope, const char* n,
                 const char* m, const char* v, double param, std::span<const double> sample)
{
    const SampleSummary s = summarize(sample);
    out.push_back({who, scope, n, param, s.n});
    out.push_back({who, scope, m, param, s.mean});
    out.push_back({who, scope, v, param, s.variance});
}

}  // namespace

RandomForestModel select_rf(const Dataset& train, const Dataset& validation, const ExperimentConfig& config,
                            std::uint64_t seed, RfChoice* choice)
{
    const Dataset& judge = validation.size() > 0 ? validation : train;
    const std::size_t max_trees = *std::max_element(config.rf_trees.begin(), config.rf_trees.end());
    std::map<std::size_t, RandomForestModel> forests;
    RandomForestModel best;
    RfChoice best_choice;
    bool have = false;
    for (const auto trees : config.rf_trees) {
        for (const auto leaf : config.rf_min_leaf) {
            auto it = forests.find(leaf);
            if (it == forests.end()) {
                RfTrainConfig rc;
                rc.n_trees = max_trees;
                rc.min_samples_leaf = leaf;
                rc.seed = seed;
                it = forests.emplace(leaf, train_rf(train.x, train.y, rc)).first;
            }
            RandomForestModel candidate = forest_prefix(it->second, trees);
            const auto rows = all_rows(judge);
            const double acc =
                accuracy_of([&](std::span<const double> x) { return rf_predict_label(candidate, x); }, judge, rows);
            if (!have || acc > best_choice.validation_accuracy) {
                best = std::move(candidate);
                best_choice = {trees, leaf, acc};
                have = true;
            }
        }
    }
    if (choice) *choice = best_choice;
    return best;
}

FoldOutcome evaluate_fold(const Fold& raw_fold, const ExperimentConfig& config, std::uint64_t fold_seed, const LogFn& log)
{
    FoldOutcome out;
    out.participant = raw_fold.held_out_participant;
    out.warnings = raw_fold.warnings;
    const std::string& who = out.participant;
    auto note = [&](const std::string& msg) {
        if (log) log(fmt::format("[{}] {}", who, msg));
    };

    Dataset train = raw_fold.train;
    Dataset validation = raw_fold.validation;
    Dataset test = raw_fold.test;
    if (config.standardize) {
        const Standardizer s = Standardizer::fit(train.x);
        train = standardized(train, s);
        validation = standardized(validation, s);
        test = standardized(test, s);
    }

    SvmTrainConfig svm_config = config.svm;
    svm_config.seed = derive_seed(fold_seed, 1);
    const SvmRbfModel svm = train_svm(train.x, train.y, svm_config);
    const RandomForestModel rf = select_rf(train, validation, config, derive_seed(fold_seed, 2), &out.rf);
    note(fmt::format("svm trained; rf {} trees, min leaf {}", out.rf.n_trees, out.rf.min_samples_leaf));

    const auto svm_label = [&](std::span<const double> x) { return svm_predict_label(svm, x); };
    const auto rf_label = [&](std::span<const double> x) { return rf_predict_label(rf, x); };

    AttackConfig attack = config.attack;
    attack.mode = FgsmMode::minimal;
    attack.eps_max = config.eps.grid.back();
    auto& m = out.measurements;

    const auto scopes = all_scopes();
    for (const auto& scope : scopes) {
        const std::string name = scope.name();
        const auto rows = scope_rows(test, scope);
        if (rows.empty()) {
            out.warnings.push_back(fmt::format("participant {}: no test windows for scope {}", who, name));
            continue;
        }
        m.push_back({who, name, measure::svm_benign, 0.0, accuracy_of(svm_label, test, rows)});
        m.push_back({who, name, measure::rf_benign, 0.0, accuracy_of(rf_label, test, rows)});

        Matrix benign(0, test.x.cols());
        for (const auto r : rows) benign.append_row(test.x.row(r));
        const auto benign_d = benign_pairwise_distances(benign);
        add_summary(m, who, name, measure::benign_dist_n, measure::benign_dist_mean, measure::benign_dist_var, 0.0, benign_d);

        attack.target = scope.to;
        std::vector<MinimalTrace> traces;
        traces.reserve(rows.size());
        for (const auto r : rows) traces.push_back(minimal_trace(svm, test.x.row(r), test.y[r], attack));

        for (const double eps : config.eps.grid) {
            std::size_t svm_ok = 0;
            std::size_t rf_ok = 0;
            std::vector<double> dist;
            dist.reserve(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const auto x = test.x.row(rows[k]);
                const int y = test.y[rows[k]];
                const AttackResult a = trace_result(svm, traces[k], x, y, eps);
                svm_ok += a.predicted_class == y ? 1 : 0;
                rf_ok += rf_predict_label(rf, a.adversarial) == y ? 1 : 0;
                dist.push_back(std::sqrt(squared_distance(x, a.adversarial)));
            }
            const double n = static_cast<double>(rows.size());
            m.push_back({who, name, measure::svm_attack, eps, static_cast<double>(svm_ok) / n});
            m.push_back({who, name, measure::rf_attack, eps, static_cast<double>(rf_ok) / n});
            add_summary(m, who, name, measure::adv_dist_n, measure::adv_dist_mean, measure::adv_dist_var, eps, dist);
        }
    }
    note("attacks evaluated");

    if (config.run_defense) {
        for (const double fraction : config.defense_fractions) {
            DefenseConfig dc;
            dc.fraction = fraction;
            dc.attack = config.defense_attack;
            dc.attack.target.reset();
            dc.seed = derive_seed(fold_seed, 3 + static_cast<std::uint64_t>(std::llround(fraction * 1e6)));
            const RetrainResult rr = adversarial_retrain(train, svm, svm_config, dc);
            std::vector<AttackScope> present;
            for (const auto& scope : scopes) {
                if (!scope_rows(test, scope).empty()) present.push_back(scope);
            }
            const auto rows = evaluate_defense(rr.retrained, test, dc.attack, present);
            for (const auto& row : rows) {
                const std::string name = row.scope.name();
                m.push_back({who, name, measure::retrain_benign, fraction, row.benign_accuracy});
                m.push_back({who, name, measure::retrain_attack, fraction, row.attack_accuracy});
                m.push_back({who, name, measure::retrain_eps, fraction, dc.attack.eps_max});
                add_summary(m, who, name, measure::retrain_dist_n, measure::retrain_dist_mean, measure::retrain_dist_var,
                            fraction, row.adversarial_distances);
            }
            note(fmt::format("retrained with {} adversarial rows ({} successful)", rr.chosen_rows.size(),
                             rr.successful_attacks));
        }
    }
    return out;
}

namespace {

class Manifest {
public:
    explicit Manifest(std::filesystem::path path) : path_(std::move(path)) { write_text(path_, ""); }
    void done(const std::string& stage)
    {
        text_ += stage + "\n";
        write_text(path_, text_);
    }

private:
    std::filesystem::path path_;
    std::string text_;
};

template <typename F>
auto stage(const std::string& name, F&& f)
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string folds_csv(std::span<const FoldOutcome> folds)
{
    std::string out = "participant,rf_trees,rf_min_samples_leaf,rf_validation_accuracy,warnings\n";
    for (const auto& f : folds) {
        std::string w;
        for (const auto& s : f.warnings) w += (w.empty() ? "" : "; ") + s;
        std::replace(w.begin(), w.end(), ',', ' ');
        out += fmt::format("{},{},{},{},{}\n", f.participant, f.rf.n_trees, f.rf.min_samples_leaf,
                           f.rf.validation_accuracy, w);
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const LogFn& log)
{
    const auto& dir = config.output_dir;
    stage("config", [&] {
        config.validate();
        std::filesystem::create_directories(dir);
        return 0;
    });
    Manifest manifest(dir / "MANIFEST");
    write_text(dir / "config.ini", dump_config(config));
    manifest.done("config");

    const auto recordings = stage("ingest", [&] {
        if (!config.dataset.empty()) return load_dataset(config.dataset);
        SynthDatasetConfig sc = config.synth;
        sc.seed = derive_seed(config.seed, 0x5e);
        sc.sample_rate_hz = config.events.sample_rate_hz;
        sc.min_duration = config.window.window_size;
        return synth_generate(sc);
    });
    manifest.done("ingest");
    if (log) log(fmt::format("{} recordings", recordings.size()));

    const auto features = stage("features", [&] {
        auto rows = extract_dataset_features(recordings, config);
        if (rows.empty()) throw std::runtime_error("no feature windows; recordings shorter than the window?");
        std::ostringstream os;
        write_feature_csv(os, rows);
        write_text(dir / "features.csv", os.str());
        return rows;
    });
    manifest.done("features");
    if (log) log(fmt::format("{} feature windows", features.size()));

    const auto folds = stage("folds", [&] { return lopo_folds(to_dataset(features), config.validation_count); });
    manifest.done("folds");

    ExperimentResult result;
    result.folds.resize(folds.size());
    stage("evaluate", [&] {
        std::mutex log_mutex;
        const LogFn safe_log = [&](std::string_view s) {
            if (!log) return;
            const std::lock_guard lock(log_mutex);
            log(s);
        };
        unsigned workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
        workers = std::min<unsigned>(workers, static_cast<unsigned>(folds.size()));
        std::vector<std::exception_ptr> errors(folds.size());
        auto work = [&](unsigned w) {
            for (std::size_t f = w; f < folds.size(); f += workers) {
                try {
                    result.folds[f] = evaluate_fold(folds[f], config, derive_seed(config.seed, 100 + f), safe_log);
                } catch (...) {
                    errors[f] = std::current_exception();
                }
            }
        };
        if (workers <= 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (!errors[f]) continue;
            try {
                std::rethrow_exception(errors[f]);
            } catch (const std::exception& e) {
                throw std::runtime_error(fmt::format("fold {}: {}", folds[f].held_out_participant, e.what()));
            }
        }
        return 0;
    });
    for (const auto& f : result.folds) {
        result.measurements.insert(result.measurements.end(), f.measurements.begin(), f.measurements.end());
        for (const auto& w : f.warnings) {
            if (log) log("warning: " + w);
        }
    }
    write_text(dir / "folds.csv", folds_csv(result.folds));
    write_text(dir / "measurements.csv", measurements_csv(result.measurements));
    manifest.done("evaluate");

    result.report = stage("report", [&] {
        auto report = build_report(result.measurements, config.eps.target_accuracy);
        write_report(dir, report);
        return report;
    });
    manifest.done("report");
    return result;
}

EvaluationReport regenerate_report(const std::filesystem::path& run_dir)
{
    double guess = ExperimentConfig{}.eps.target_accuracy;
    if (std::filesystem::exists(run_dir / "config.ini")) guess = load_config(run_dir / "config.ini").eps.target_accuracy;
    return build_report(parse_measurements_csv(read_text(run_dir / "measurements.csv")), guess);
}

}  // namespace eyeadv
