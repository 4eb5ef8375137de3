#include "eyeadv/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "csv.hpp"

namespace eyeadv {

namespace {

std::size_t parse_count(std::string_view s)
{
    s = csv::trim(s);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("not a count: '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view s)
{
    s = csv::trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

bool parse_bool(std::string_view s)
{
    s = csv::trim(s);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("not a boolean: '" + std::string(s) + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view s, F parse_one)
{
    std::vector<T> out;
    if (csv::trim(s).empty()) return out;
    for (const auto part : csv::split(s, ',')) out.push_back(parse_one(part));
    return out;
}

std::string fmt_list(const std::vector<double>& v)
{
    std::vector<std::string> parts;
    for (const double d : v) parts.push_back(csv::format_double(d));
    return fmt::format("{}", fmt::join(parts, ","));
}

struct Key {
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define EYEADV_DOUBLE_KEY(field) \
    Key{[](ExperimentConfig& c, std::string_view v) { c.field = csv::parse_double(v); }, \
        [](const ExperimentConfig& c) { return csv::format_double(c.field); }}
#define EYEADV_COUNT_KEY(field) \
    Key{[](ExperimentConfig& c, std::string_view v) { c.field = parse_count(v); }, \
        [](const ExperimentConfig& c) { return fmt::format("{}", c.field); }}

// ordered map keeps dump_config stable
const std::map<std::string, Key>& keys()
{
    static const std::map<std::string, Key> table = [] {
        std::map<std::string, Key> t = {
            {"experiment.seed", Key{[](ExperimentConfig& c, std::string_view v) { c.seed = parse_u64(v); },
                                    [](const ExperimentConfig& c) { return fmt::format("{}", c.seed); }}},
            {"experiment.output", Key{[](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(csv::trim(v)); },
                                      [](const ExperimentConfig& c) { return c.output_dir.string(); }}},
            {"experiment.dataset", Key{[](ExperimentConfig& c, std::string_view v) { c.dataset = std::string(csv::trim(v)); },
                                       [](const ExperimentConfig& c) { return c.dataset.string(); }}},
            {"experiment.standardize", Key{[](ExperimentConfig& c, std::string_view v) { c.standardize = parse_bool(v); },
                                           [](const ExperimentConfig& c) { return std::string(c.standardize ? "true" : "false"); }}},
            {"experiment.threads", Key{[](ExperimentConfig& c, std::string_view v) { c.threads = static_cast<unsigned>(parse_count(v)); },
                                       [](const ExperimentConfig& c) { return fmt::format("{}", c.threads); }}},
            {"experiment.validation_count", EYEADV_COUNT_KEY(validation_count)},

            {"events.sample_rate_hz", EYEADV_DOUBLE_KEY(events.sample_rate_hz)},
            {"events.fixation_radius", EYEADV_DOUBLE_KEY(events.fixation_radius)},
            {"events.min_duration", EYEADV_DOUBLE_KEY(events.min_duration)},
            {"events.amplitude_threshold",
             Key{[](ExperimentConfig& c, std::string_view v) {
                     c.events.amplitude_threshold = csv::parse_double(v);
                     c.window.amplitude_threshold = c.events.amplitude_threshold;
                 },
                 [](const ExperimentConfig& c) { return csv::format_double(c.events.amplitude_threshold); }}},

            {"window.size", EYEADV_DOUBLE_KEY(window.window_size)},
            {"window.step", EYEADV_DOUBLE_KEY(window.step)},

            {"svm.C", EYEADV_DOUBLE_KEY(svm.C)},
            {"svm.gamma", EYEADV_DOUBLE_KEY(svm.gamma)},
            {"svm.tolerance", EYEADV_DOUBLE_KEY(svm.tolerance)},
            {"svm.max_iterations", EYEADV_COUNT_KEY(svm.max_iterations)},

            {"rf.trees", Key{[](ExperimentConfig& c, std::string_view v) { c.rf_trees = parse_list<std::size_t>(v, parse_count); },
                             [](const ExperimentConfig& c) { return fmt::format("{}", fmt::join(c.rf_trees, ",")); }}},
            {"rf.min_samples_leaf",
             Key{[](ExperimentConfig& c, std::string_view v) { c.rf_min_leaf = parse_list<std::size_t>(v, parse_count); },
                 [](const ExperimentConfig& c) { return fmt::format("{}", fmt::join(c.rf_min_leaf, ",")); }}},

            {"attack.mode",
             Key{[](ExperimentConfig& c, std::string_view v) {
                     v = csv::trim(v);
                     if (v == "minimal") c.attack.mode = FgsmMode::minimal;
                     else if (v == "standard") c.attack.mode = FgsmMode::standard;
                     else throw std::invalid_argument("attack mode must be minimal or standard");
                 },
                 [](const ExperimentConfig& c) { return std::string(c.attack.mode == FgsmMode::minimal ? "minimal" : "standard"); }}},
            // changing the step or cap regenerates the selection grid
            {"attack.eps_step",
             Key{[](ExperimentConfig& c, std::string_view v) {
                     c.attack.eps_step = csv::parse_double(v);
                     c.eps.grid = default_eps_grid(c.attack.eps_step, c.attack.eps_max);
                 },
                 [](const ExperimentConfig& c) { return csv::format_double(c.attack.eps_step); }}},
            {"attack.eps_max",
             Key{[](ExperimentConfig& c, std::string_view v) {
                     c.attack.eps_max = csv::parse_double(v);
                     c.eps.grid = default_eps_grid(c.attack.eps_step, c.attack.eps_max);
                 },
                 [](const ExperimentConfig& c) { return csv::format_double(c.attack.eps_max); }}},
            {"attack.grid", Key{[](ExperimentConfig& c, std::string_view v) { c.eps.grid = parse_list<double>(v, csv::parse_double); },
                                [](const ExperimentConfig& c) { return fmt_list(c.eps.grid); }}},
            {"attack.target_accuracy", EYEADV_DOUBLE_KEY(eps.target_accuracy)},

            {"defense.enabled", Key{[](ExperimentConfig& c, std::string_view v) { c.run_defense = parse_bool(v); },
                                    [](const ExperimentConfig& c) { return std::string(c.run_defense ? "true" : "false"); }}},
            {"defense.fractions",
             Key{[](ExperimentConfig& c, std::string_view v) { c.defense_fractions = parse_list<double>(v, csv::parse_double); },
                 [](const ExperimentConfig& c) { return fmt_list(c.defense_fractions); }}},
            {"defense.eps_step", EYEADV_DOUBLE_KEY(defense_attack.eps_step)},
            {"defense.eps_max", EYEADV_DOUBLE_KEY(defense_attack.eps_max)},

            {"synth.participants", EYEADV_COUNT_KEY(synth.participants)},
            {"synth.duration", EYEADV_DOUBLE_KEY(synth.duration)},
            {"synth.variability", EYEADV_DOUBLE_KEY(synth.variability)},
        };
        for (std::size_t c = 0; c < 3; ++c) {
            const std::string section = to_string(static_cast<DocumentClass>(c)) + ".";
            auto number = [&](const char* name, double SynthProfile::*field) {
                t.emplace(section + name,
                          Key{[c, field](ExperimentConfig& cfg, std::string_view v) { cfg.synth.profiles[c].*field = csv::parse_double(v); },
                              [c, field](const ExperimentConfig& cfg) { return csv::format_double(cfg.synth.profiles[c].*field); }});
            };
            number("fixation_mean", &SynthProfile::fixation_mean);
            number("fixation_sd", &SynthProfile::fixation_sd);
            number("small_amplitude", &SynthProfile::small_amplitude);
            number("large_amplitude", &SynthProfile::large_amplitude);
            number("large_weight", &SynthProfile::large_weight);
            number("blink_rate", &SynthProfile::blink_rate_per_min);
            number("pupil_baseline", &SynthProfile::pupil_baseline);
            number("pupil_jitter", &SynthProfile::pupil_jitter);
            number("fixation_jitter", &SynthProfile::fixation_jitter);
            number("drift", &SynthProfile::drift);
            number("drift_time", &SynthProfile::drift_time);
            t.emplace(section + "direction_weights",
                      Key{[c](ExperimentConfig& cfg, std::string_view v) {
                              const auto w = parse_list<double>(v, csv::parse_double);
                              if (w.size() != 4) throw std::invalid_argument("need 4 weights (right, left, up, down)");
                              std::copy(w.begin(), w.end(), cfg.synth.profiles[c].direction_weights.begin());
                          },
                          [c](const ExperimentConfig& cfg) {
                              const auto& w = cfg.synth.profiles[c].direction_weights;
                              return fmt_list(std::vector<double>(w.begin(), w.end()));
                          }});
        }
        return t;
    }();
    return table;
}

#undef EYEADV_DOUBLE_KEY
#undef EYEADV_COUNT_KEY

void set_key(ExperimentConfig& config, const std::string& name, std::string_view value)
{
    const auto it = keys().find(name);
    if (it == keys().end()) throw std::invalid_argument("config: unknown key '" + name + "'");
    try {
        it->second.set(config, value);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config: " + name + ": " + e.what());
    }
}

}  // namespace

void ExperimentConfig::validate() const
{
    auto check = [](bool ok, const char* key, const char* what) {
        if (!ok) throw std::invalid_argument(fmt::format("config: {}: {}", key, what));
    };
    check(events.sample_rate_hz > 0.0, "events.sample_rate_hz", "must be positive");
    check(events.fixation_radius > 0.0, "events.fixation_radius", "must be positive");
    check(events.min_duration > 0.0, "events.min_duration", "must be positive");
    window.validate();
    svm.validate();
    check(!rf_trees.empty() && !rf_min_leaf.empty(), "rf", "grid must be nonempty");
    for (const auto t : rf_trees) check(t >= 1, "rf.trees", "must be >= 1");
    for (const auto m : rf_min_leaf) check(m >= 1, "rf.min_samples_leaf", "must be >= 1");
    attack.validate();
    check(attack.eps_step <= attack.eps_max, "attack.eps_step", "must not exceed eps_max");
    eps.validate();
    check(eps.target_accuracy >= 0.0 && eps.target_accuracy <= 1.0, "attack.target_accuracy", "must be in [0, 1]");
    for (const double f : defense_fractions) check(f > 0.0 && f <= 1.0, "defense.fractions", "must be in (0, 1]");
    defense_attack.validate();
    check(synth.participants >= 2, "synth.participants", "need at least 2");
    check(synth.duration > 0.0, "synth.duration", "must be positive");
    check(synth.variability >= 0.0, "synth.variability", "must be nonnegative");
    for (const auto& p : synth.profiles) p.validate();
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(fmt::format("config: line {}: {}", e.line(), e.message()));
    }
    std::string grid;
    bool has_grid = false;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw std::invalid_argument("config: key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            const std::string name = section + "." + key;
            if (name == "attack.grid") {
                grid = node.data();
                has_grid = true;
                continue;
            }
            set_key(base, name, node.data());
        }
    }
    if (has_grid) set_key(base, "attack.grid", grid);
    base.synth.seed = base.seed;
    base.synth.sample_rate_hz = base.events.sample_rate_hz;
    base.synth.min_duration = base.window.window_size;
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

void apply_override(ExperimentConfig& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("override must look like section.key=value: " + assignment);
    set_key(config, std::string(csv::trim(std::string_view(assignment).substr(0, eq))), std::string_view(assignment).substr(eq + 1));
    config.synth.seed = config.seed;
    config.synth.sample_rate_hz = config.events.sample_rate_hz;
    config.synth.min_duration = config.window.window_size;
}

std::string dump_config(const ExperimentConfig& config)
{
    std::string out;
    std::string section;
    for (const auto& [name, key] : keys()) {
        const auto dot = name.find('.');
        const std::string s = name.substr(0, dot);
        if (s != section) {
            out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", s);
            section = s;
        }
        out += fmt::format("{} = {}\n", name.substr(dot + 1), key.get(config));
    }
    return out;
}

}  // namespace eyeadv
