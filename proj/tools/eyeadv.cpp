// eyeadv command-line front end.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "eyeadv/attacks.hpp"
#include "eyeadv/config.hpp"
#include "eyeadv/defense.hpp"
#include "eyeadv/evaluation.hpp"
#include "eyeadv/events.hpp"
#include "eyeadv/experiment.hpp"
#include "eyeadv/features.hpp"
#include "eyeadv/forest.hpp"
#include "eyeadv/recording.hpp"
#include "eyeadv/report.hpp"
#include "eyeadv/svm.hpp"
#include "eyeadv/synth.hpp"

using namespace eyeadv;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string config;
    std::vector<std::string> overrides;
    bool quiet = false;
};

ExperimentConfig resolve_config(const Globals& g)
{
    ExperimentConfig c;
    if (!g.config.empty()) c = load_config(g.config);
    for (const auto& o : g.overrides) apply_override(c, o);
    if (g.seed) apply_override(c, fmt::format("experiment.seed={}", *g.seed));
    if (!g.out.empty()) c.output_dir = g.out;
    c.validate();
    return c;
}

std::vector<FeatureVector> load_features(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_feature_csv(in);
}

void save_features(const fs::path& path, std::span<const FeatureVector> rows)
{
    std::ostringstream os;
    write_feature_csv(os, rows);
    write_text(path, os.str());
}

template <typename Load>
auto load_model(const std::string& path, Load load)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model " + path);
    return load(in);
}

std::vector<Recording> load_inputs(const std::string& manifest, const std::vector<std::string>& files)
{
    if (!manifest.empty()) return load_dataset(manifest);
    std::vector<Recording> out;
    for (const auto& f : files) out.push_back(load_recording(f));
    return out;
}

std::string events_csv(const EventStream& ev)
{
    std::string out = "kind,start,end,x,y,dx,dy,amplitude,dir,dir_amp\n";
    for (const auto& f : ev.fixations) {
        out += fmt::format("fixation,{},{},{},{},,,,,\n", f.start, f.end, f.centroid_x, f.centroid_y);
    }
    for (const auto& b : ev.blinks) out += fmt::format("blink,{},{},,,,,,,\n", b.start, b.end);
    for (const auto& s : ev.saccades) {
        out += fmt::format("saccade,{},{},,,{},{},{},{},{}\n", s.start, s.end, s.dx, s.dy, s.amplitude, s.char_dir,
                           s.char_dir_amp);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adversarial attacks on eye-movement document-type classifiers"};
    app.require_subcommand(1);
    app.fallthrough();
    app.failure_message(CLI::FailureMessage::help);
    Globals g;
    app.add_option("--seed", g.seed, "Global random seed");
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "Override a config key, e.g. --set svm.C=2");
    app.add_flag("-q,--quiet", g.quiet, "No progress messages");

    auto log = [&](std::string_view s) {
        if (!g.quiet) std::cerr << s << '\n';
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic recording dataset");
    std::optional<std::size_t> participants;
    std::optional<double> duration;
    synth->add_option("--participants", participants, "Participants (>= 2)");
    synth->add_option("--duration", duration, "Seconds per recording");
    synth->callback([&] {
        ExperimentConfig c = resolve_config(g);
        if (participants) c.synth.participants = *participants;
        if (duration) c.synth.duration = *duration;
        c.synth.seed = c.seed;
        const fs::path dir = g.out.empty() ? fs::path("synth") : fs::path(g.out);
        write_dataset(dir, synth_generate(c.synth));
        log(fmt::format("wrote {}", (dir / "manifest.csv").string()));
    });

    // detect
    auto* detect = app.add_subcommand("detect", "Detect fixations, blinks and saccades in one recording");
    std::string detect_input;
    detect->add_option("input", detect_input, "Recording CSV")->required()->check(CLI::ExistingFile);
    detect->callback([&] {
        const ExperimentConfig c = resolve_config(g);
        const Recording r = load_recording(detect_input);
        EventDetectionConfig ec = c.events;
        ec.sample_rate_hz = r.meta.sample_rate_hz;
        const std::string text = events_csv(detect_events(r.samples, ec));
        if (g.out.empty()) std::cout << text;
        else write_text(g.out, text);
    });

    // features
    auto* features = app.add_subcommand("features", "Extract windowed feature vectors");
    std::string manifest;
    std::vector<std::string> recording_files;
    auto* manifest_opt = features->add_option("--manifest", manifest, "Dataset manifest")->check(CLI::ExistingFile);
    features->add_option("inputs", recording_files, "Recording CSVs")->excludes(manifest_opt)->check(CLI::ExistingFile);
    features->callback([&] {
        if (manifest.empty() && recording_files.empty()) throw CLI::ValidationError("features", "need --manifest or recording files");
        const ExperimentConfig c = resolve_config(g);
        const auto rows = extract_dataset_features(load_inputs(manifest, recording_files), c);
        save_features(g.out.empty() ? "features.csv" : g.out, rows);
        log(fmt::format("{} windows", rows.size()));
    });

    // scale
    auto* scale = app.add_subcommand("scale", "Z-score a feature CSV with moments fitted on the kept participants");
    std::string scale_features;
    std::vector<std::string> scale_exclude;
    scale->add_option("features", scale_features, "Feature CSV")->required()->check(CLI::ExistingFile);
    scale->add_option("--exclude", scale_exclude, "Participants left out of the fit");
    scale->callback([&] {
        auto rows = load_features(scale_features);
        Matrix all(0, kNumFeatures);
        Matrix fit(0, kNumFeatures);
        for (const auto& f : rows) {
            all.append_row(f.values);
            if (std::find(scale_exclude.begin(), scale_exclude.end(), f.participant_id) == scale_exclude.end()) {
                fit.append_row(f.values);
            }
        }
        if (fit.rows() == 0) throw std::invalid_argument("scale: no rows left to fit");
        const Matrix z = Standardizer::fit(fit).transform(all);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = z.row(i);
            std::copy(r.begin(), r.end(), rows[i].values.begin());
        }
        save_features(g.out.empty() ? "scaled.csv" : g.out, rows);
    });

    // train
    auto* train = app.add_subcommand("train", "Train an SVM or random forest on a feature CSV");
    std::string train_features;
    std::string model_kind = "svm";
    std::vector<std::string> exclude;
    std::size_t rf_trees = 100;
    std::size_t rf_leaf = 1;
    train->add_option("features", train_features, "Feature CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--model", model_kind, "svm or rf")->check(CLI::IsMember({"svm", "rf"}));
    train->add_option("--exclude", exclude, "Participants left out of training");
    train->add_option("--trees", rf_trees, "RF tree count");
    train->add_option("--min-leaf", rf_leaf, "RF minimum samples per leaf");
    train->callback([&] {
        const ExperimentConfig c = resolve_config(g);
        auto rows = load_features(train_features);
        std::erase_if(rows, [&](const FeatureVector& f) {
            return std::find(exclude.begin(), exclude.end(), f.participant_id) != exclude.end();
        });
        const Dataset d = to_dataset(rows);
        std::ostringstream os;
        if (model_kind == "svm") {
            SvmTrainConfig sc = c.svm;
            sc.seed = c.seed;
            save_svm(os, train_svm(d.x, d.y, sc));
        } else {
            save_rf(os, train_rf(d.x, d.y, RfTrainConfig{rf_trees, rf_leaf, 0, c.seed}));
        }
        write_text(g.out.empty() ? model_kind + ".model" : g.out, os.str());
    });

    // attack
    auto* attack = app.add_subcommand("attack", "Craft minimal-FGSM adversarial features against an SVM");
    std::string attack_model;
    std::string attack_features;
    std::optional<std::string> attack_target;
    bool attack_standard = false;
    attack->add_option("--model", attack_model, "Trained SVM model")->required()->check(CLI::ExistingFile);
    attack->add_option("features", attack_features, "Feature CSV to perturb")->required()->check(CLI::ExistingFile);
    attack->add_option("--target", attack_target, "Target class (comic, newspaper, textbook)");
    attack->add_flag("--standard", attack_standard, "Single-shot FGSM at eps_max");
    attack->callback([&] {
        const ExperimentConfig c = resolve_config(g);
        const SvmRbfModel model = load_model(attack_model, load_svm);
        AttackConfig ac = c.attack;
        if (attack_standard) ac.mode = FgsmMode::standard;
        if (attack_target) ac.target = static_cast<int>(parse_document_class(*attack_target));
        auto rows = load_features(attack_features);
        if (ac.target) std::erase_if(rows, [&](const FeatureVector& f) { return static_cast<int>(f.label) == *ac.target; });
        std::string attack_log = "row,participant,label,window_start,eps_used,success,predicted\n";
        std::vector<FeatureVector> adv = rows;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const AttackResult r = fgsm_attack(model, rows[i].values, static_cast<int>(rows[i].label), ac);
            std::copy(r.adversarial.begin(), r.adversarial.end(), adv[i].values.begin());
            attack_log += fmt::format("{},{},{},{},{},{},{}\n", i, rows[i].participant_id, to_string(rows[i].label),
                                      rows[i].window_start, r.eps_used, r.success ? 1 : 0,
                                      to_string(static_cast<DocumentClass>(r.predicted_class)));
        }
        const fs::path out = g.out.empty() ? fs::path("adversarial.csv") : fs::path(g.out);
        save_features(out, adv);
        write_text(fs::path(out).replace_extension(".log.csv"), attack_log);
    });

    // transfer
    auto* transfer = app.add_subcommand("transfer", "Score a random forest on (adversarial) feature rows");
    std::string transfer_model;
    std::string transfer_features;
    transfer->add_option("--model", transfer_model, "Trained RF model")->required()->check(CLI::ExistingFile);
    transfer->add_option("features", transfer_features, "Feature CSV")->required()->check(CLI::ExistingFile);
    transfer->callback([&] {
        const RandomForestModel rf = load_model(transfer_model, load_rf);
        const Dataset d = to_dataset(load_features(transfer_features));
        std::vector<int> pred;
        for (std::size_t i = 0; i < d.size(); ++i) pred.push_back(rf_predict_label(rf, d.x.row(i)));
        std::cout << fmt::format("accuracy,{}\n", accuracy(pred, d.y));
    });

    // defend
    auto* defend = app.add_subcommand("defend", "Adversarially retrain an SVM");
    std::string defend_features;
    double fraction = 0.1;
    defend->add_option("features", defend_features, "Training feature CSV")->required()->check(CLI::ExistingFile);
    defend->add_option("--fraction", fraction, "Share of rows to perturb")->check(CLI::Range(0.0, 1.0));
    defend->callback([&] {
        const ExperimentConfig c = resolve_config(g);
        const Dataset d = to_dataset(load_features(defend_features));
        DefenseConfig dc;
        dc.fraction = fraction;
        dc.attack = c.defense_attack;
        dc.seed = c.seed;
        SvmTrainConfig sc = c.svm;
        sc.seed = c.seed;
        const RetrainResult r = adversarial_retrain(d, sc, dc);
        std::ostringstream os;
        save_svm(os, r.retrained);
        write_text(g.out.empty() ? "retrained.model" : g.out, os.str());
        log(fmt::format("{} adversarial rows, {} successful", r.chosen_rows.size(), r.successful_attacks));
    });

    // report
    auto* report = app.add_subcommand("report", "Rebuild report CSVs from a run directory");
    std::string run_dir;
    report->add_option("run_dir", run_dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);
    report->callback([&] {
        write_report(g.out.empty() ? fs::path(run_dir) : fs::path(g.out), regenerate_report(run_dir));
    });

    // run
    auto* run = app.add_subcommand("run", "Full pipeline: data, features, folds, attacks, defense, report");
    std::string dataset;
    run->add_option("--dataset", dataset, "Dataset manifest (default: synthesize)")->check(CLI::ExistingFile);
    run->add_option("--participants", participants, "Synthetic participants");
    run->add_option("--duration", duration, "Synthetic seconds per recording");
    run->callback([&] {
        ExperimentConfig c = resolve_config(g);
        if (!dataset.empty()) c.dataset = dataset;
        if (participants) c.synth.participants = *participants;
        if (duration) c.synth.duration = *duration;
        const ExperimentResult r = run_experiment(c, log);
        log(fmt::format("{} folds; report in {}", r.folds.size(), c.output_dir.string()));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
