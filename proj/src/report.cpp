#include "eyeadv/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "csv.hpp"
#include "eyeadv/attacks.hpp"
#include "eyeadv/stats.hpp"

namespace eyeadv {

const TableRow* EvaluationReport::find(const std::string& metric, const std::string& attack, const std::string& model) const
{
    for (const auto& r : table) {
        if (r.metric == metric && r.attack == attack && r.model == model) return &r;
    }
    return nullptr;
}

namespace {

class Index {
public:
    explicit Index(std::span<const Measurement> rows)
    {
        for (const auto& r : rows) values_[{r.participant, r.scope, r.kind, r.param}] = r.value;
    }

    std::optional<double> get(const std::string& who, const std::string& scope, const std::string& kind, double param = 0.0) const
    {
        const auto it = values_.find({who, scope, kind, param});
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    SampleSummary summary(const std::string& who, const std::string& scope, const char* n, const char* m, const char* v,
                          double param = 0.0) const
    {
        const auto cn = get(who, scope, n, param);
        if (!cn || *cn == 0.0) return {};
        return {*cn, get(who, scope, m, param).value_or(0.0), get(who, scope, v, param).value_or(0.0)};
    }

private:
    std::map<std::tuple<std::string, std::string, std::string, double>, double> values_;
};

std::optional<double> mean_of(const std::vector<double>& v)
{
    if (v.empty()) return std::nullopt;
    return mean(v);
}

int scope_column(const std::string& scope)
{
    for (std::size_t i = 0; i < kScopeColumns.size(); ++i) {
        if (scope == kScopeColumns[i]) return static_cast<int>(i);
    }
    return -1;
}

std::string retrain_label(double fraction)
{
    return fmt::format("retrain {}%", std::round(fraction * 1000.0) / 10.0);
}

class TableBuilder {
public:
    TableRow& row(const std::string& metric, const std::string& attack, const std::string& model)
    {
        for (auto& r : rows_) {
            if (r.metric == metric && r.attack == attack && r.model == model) return r;
        }
        rows_.push_back({metric, attack, model, {}});
        return rows_.back();
    }
    void set(const std::string& metric, const std::string& attack, const std::string& model, int col, std::optional<double> v)
    {
        row(metric, attack, model).cells[static_cast<std::size_t>(col)] = v;
    }
    std::vector<TableRow> take() { return std::move(rows_); }

private:
    std::vector<TableRow> rows_;
};

struct Strategy {
    const char* name;
    // eps per participant, empty when unreachable
    std::vector<std::optional<double>> eps;
};

std::string opt_cell(std::optional<double> v) { return v ? csv::format_double(*v) : "-"; }

std::optional<double> parse_opt(std::string_view s)
{
    s = csv::trim(s);
    if (s == "-" || s.empty()) return std::nullopt;
    return csv::parse_double(s);
}

std::vector<std::vector<std::string_view>> data_lines(const std::string& text, const std::string& header, std::vector<std::string>& storage)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string_view>> out;
    if (!std::getline(in, line) || csv::trim(line) != header) throw std::invalid_argument("report csv: unexpected header");
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        storage.push_back(line);
    }
    const std::size_t cols = csv::split(header).size();
    for (const auto& l : storage) {
        auto f = csv::split(csv::trim(l));
        if (f.size() != cols) throw std::invalid_argument("report csv: wrong column count in '" + l + "'");
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace

EvaluationReport build_report(std::span<const Measurement> measurements, double guess_accuracy)
{
    EvaluationReport report;
    const Index idx(measurements);
    std::set<std::string> who_set;
    std::set<std::string> scope_set;
    std::set<double> fractions;
    for (const auto& m : measurements) {
        who_set.insert(m.participant);
        scope_set.insert(m.scope);
        if (m.kind == measure::retrain_benign) fractions.insert(m.param);
    }
    const std::vector<std::string> people(who_set.begin(), who_set.end());
    TableBuilder table;

    for (const char* scope_name : kScopeColumns) {
        const std::string scope = scope_name;
        if (!scope_set.contains(scope)) continue;
        const int col = scope_column(scope);

        std::vector<std::string> folds;
        std::vector<double> svm_benign;
        std::vector<double> rf_benign;
        for (const auto& p : people) {
            const auto s = idx.get(p, scope, measure::svm_benign);
            if (!s) continue;
            folds.push_back(p);
            svm_benign.push_back(*s);
            if (const auto r = idx.get(p, scope, measure::rf_benign)) rf_benign.push_back(*r);
        }
        table.set("accuracy", "benign", "SVM", col, mean_of(svm_benign));
        table.set("accuracy", "benign", "RF", col, mean_of(rf_benign));

        std::vector<SampleSummary> benign_parts;
        for (const auto& p : folds) {
            benign_parts.push_back(idx.summary(p, scope, measure::benign_dist_n, measure::benign_dist_mean, measure::benign_dist_var));
        }
        const SampleSummary benign_pool = pool(benign_parts);
        table.set("distance", "benign", "-", col, benign_pool.n > 0.0 ? std::optional(benign_pool.mean) : std::nullopt);

        std::set<double> grid_set;
        for (const auto& m : measurements) {
            if (m.scope == scope && m.kind == measure::svm_attack) grid_set.insert(m.param);
        }
        const std::vector<double> grid(grid_set.begin(), grid_set.end());
        std::vector<std::string> curve_folds;
        std::vector<AttackCurve> curves;
        for (const auto& p : folds) {
            AttackCurve c;
            for (const double e : grid) {
                const auto v = idx.get(p, scope, measure::svm_attack, e);
                if (!v) break;
                c.push_back(*v);
            }
            if (!grid.empty() && c.size() == grid.size()) {
                curve_folds.push_back(p);
                curves.push_back(std::move(c));
            }
        }
        if (curves.empty()) continue;

        const EpsChoice choice = select_eps(curves, EpsSelection{grid, guess_accuracy});
        std::vector<Strategy> strategies{{"general", {}}, {"individual", {}}, {"guess", {}}};
        for (std::size_t f = 0; f < curve_folds.size(); ++f) {
            strategies[0].eps.emplace_back(choice.general);
            strategies[1].eps.emplace_back(choice.per_person[f]);
            strategies[2].eps.push_back(choice.guess_level);
        }

        for (const auto& st : strategies) {
            std::vector<double> svm_acc;
            std::vector<double> rf_acc;
            std::vector<double> eps_used;
            std::vector<SampleSummary> adv_parts;
            for (std::size_t f = 0; f < curve_folds.size(); ++f) {
                if (!st.eps[f]) continue;
                const auto& p = curve_folds[f];
                const double e = *st.eps[f];
                eps_used.push_back(e);
                svm_acc.push_back(*idx.get(p, scope, measure::svm_attack, e));
                const auto rf = idx.get(p, scope, measure::rf_attack, e);
                if (rf) rf_acc.push_back(*rf);
                adv_parts.push_back(idx.summary(p, scope, measure::adv_dist_n, measure::adv_dist_mean, measure::adv_dist_var, e));

                AccuracyPoint pt;
                pt.participant = p;
                pt.scope = scope;
                pt.strategy = st.name;
                pt.eps = e;
                pt.svm_attack = svm_acc.back();
                pt.svm_benign = idx.get(p, scope, measure::svm_benign).value_or(0.0);
                pt.rf_benign = idx.get(p, scope, measure::rf_benign).value_or(0.0);
                pt.rf_attack = rf.value_or(0.0);
                report.accuracy_points.push_back(pt);
            }
            table.set("accuracy", st.name, "SVM", col, mean_of(svm_acc));
            table.set("accuracy", st.name, "RF", col, rf_acc.size() == svm_acc.size() ? mean_of(rf_acc) : std::nullopt);
            table.set("eps", st.name, "SVM", col, mean_of(eps_used));

            const SampleSummary adv_pool = pool(adv_parts);
            std::optional<WelchResult> welch;
            if (benign_pool.n >= 2.0 && adv_pool.n >= 2.0) welch = welch_t_test(benign_pool, adv_pool);
            table.set("distance", st.name, "SVM", col, adv_pool.n > 0.0 ? std::optional(adv_pool.mean) : std::nullopt);
            table.set("welch_p", st.name, "SVM", col, welch ? std::optional(welch->p_value) : std::nullopt);
            if (adv_pool.n > 0.0 && benign_pool.n > 0.0) {
                report.distance_bars.push_back({scope, st.name, benign_pool.mean, std::sqrt(benign_pool.variance), adv_pool.mean,
                                                std::sqrt(adv_pool.variance), welch ? welch->t_statistic : 0.0,
                                                welch ? welch->p_value : 1.0});
            }
        }
    }

    for (const double fraction : fractions) {
        const std::string label = retrain_label(fraction);
        for (const char* scope_name : kScopeColumns) {
            const std::string scope = scope_name;
            const int col = scope_column(scope);
            std::vector<double> benign;
            std::vector<double> attack;
            std::vector<double> undefended;
            std::vector<SampleSummary> benign_parts;
            std::vector<SampleSummary> adv_parts;
            std::vector<SampleSummary> undefended_parts;
            for (const auto& p : people) {
                const auto b = idx.get(p, scope, measure::retrain_benign, fraction);
                const auto a = idx.get(p, scope, measure::retrain_attack, fraction);
                if (!b || !a) continue;
                benign.push_back(*b);
                attack.push_back(*a);
                benign_parts.push_back(
                    idx.summary(p, scope, measure::benign_dist_n, measure::benign_dist_mean, measure::benign_dist_var));
                adv_parts.push_back(idx.summary(p, scope, measure::retrain_dist_n, measure::retrain_dist_mean,
                                                measure::retrain_dist_var, fraction));
                if (const auto e = idx.get(p, scope, measure::retrain_eps, fraction)) {
                    if (const auto u = idx.get(p, scope, measure::svm_attack, *e)) {
                        undefended.push_back(*u);
                        undefended_parts.push_back(
                            idx.summary(p, scope, measure::adv_dist_n, measure::adv_dist_mean, measure::adv_dist_var, *e));
                    }
                }
            }
            if (benign.empty()) continue;
            const SampleSummary bp = pool(benign_parts);
            const SampleSummary ap = pool(adv_parts);
            const SampleSummary up = pool(undefended_parts);
            std::optional<WelchResult> welch;
            if (bp.n >= 2.0 && ap.n >= 2.0) welch = welch_t_test(bp, ap);

            table.set("accuracy", label + " benign", "SVM", col, mean_of(benign));
            table.set("accuracy", label + " attack", "SVM", col, mean_of(attack));
            table.set("distance", label + " attack", "SVM", col, ap.n > 0.0 ? std::optional(ap.mean) : std::nullopt);
            table.set("welch_p", label + " attack", "SVM", col, welch ? std::optional(welch->p_value) : std::nullopt);

            RetrainBar bar;
            bar.fraction = fraction;
            bar.scope = scope;
            bar.benign_accuracy = *mean_of(benign);
            bar.attack_accuracy = *mean_of(attack);
            if (undefended.size() == attack.size()) {
                bar.undefended_attack_accuracy = mean_of(undefended);
                if (up.n > 0.0) bar.undefended_adversarial_mean = up.mean;
            }
            bar.benign_mean = bp.mean;
            bar.adversarial_mean = ap.mean;
            bar.welch_p = welch ? welch->p_value : 1.0;
            report.retrain_bars.push_back(bar);
        }
    }
    report.table = table.take();
    return report;
}

// ---- CSV ---------------------------------------------------------------------

namespace {
constexpr const char* kMeasurementHeader = "participant,scope,kind,param,value";
constexpr const char* kAccuracyHeader = "participant,scope,strategy,eps,svm_benign,svm_attack,rf_benign,rf_attack";
constexpr const char* kDistanceHeader =
    "scope,strategy,benign_mean,benign_std,adversarial_mean,adversarial_std,welch_t,welch_p";
constexpr const char* kRetrainHeader =
    "fraction,scope,benign_accuracy,attack_accuracy,undefended_attack_accuracy,benign_mean,adversarial_mean,"
    "undefended_adversarial_mean,welch_p";

std::string table_header()
{
    std::string h = "metric,attack,model";
    for (const char* c : kScopeColumns) h += fmt::format(",{}", c);
    return h;
}
}  // namespace

std::string measurements_csv(std::span<const Measurement> rows)
{
    std::string out = std::string(kMeasurementHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{}\n", r.participant, r.scope, r.kind, csv::format_double(r.param),
                           csv::format_double(r.value));
    }
    return out;
}

std::vector<Measurement> parse_measurements_csv(const std::string& text)
{
    std::vector<std::string> storage;
    std::vector<Measurement> out;
    for (const auto& f : data_lines(text, kMeasurementHeader, storage)) {
        out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), csv::parse_double(f[3]), csv::parse_double(f[4])});
    }
    return out;
}

std::string table_csv(std::span<const TableRow> rows)
{
    std::string out = table_header() + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{}", r.metric, r.attack, r.model);
        for (const auto& c : r.cells) out += "," + opt_cell(c);
        out += "\n";
    }
    return out;
}

std::vector<TableRow> parse_table_csv(const std::string& text)
{
    std::vector<std::string> storage;
    std::vector<TableRow> out;
    for (const auto& f : data_lines(text, table_header(), storage)) {
        TableRow r{std::string(f[0]), std::string(f[1]), std::string(f[2]), {}};
        for (std::size_t i = 0; i < r.cells.size(); ++i) r.cells[i] = parse_opt(f[3 + i]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string accuracy_csv(std::span<const AccuracyPoint> rows)
{
    std::string out = std::string(kAccuracyHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.participant, r.scope, r.strategy, csv::format_double(r.eps),
                           csv::format_double(r.svm_benign), csv::format_double(r.svm_attack),
                           csv::format_double(r.rf_benign), csv::format_double(r.rf_attack));
    }
    return out;
}

std::vector<AccuracyPoint> parse_accuracy_csv(const std::string& text)
{
    std::vector<std::string> storage;
    std::vector<AccuracyPoint> out;
    for (const auto& f : data_lines(text, kAccuracyHeader, storage)) {
        out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), csv::parse_double(f[3]), csv::parse_double(f[4]),
                       csv::parse_double(f[5]), csv::parse_double(f[6]), csv::parse_double(f[7])});
    }
    return out;
}

std::string distance_csv(std::span<const DistanceBar> rows)
{
    std::string out = std::string(kDistanceHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.scope, r.strategy, csv::format_double(r.benign_mean),
                           csv::format_double(r.benign_std), csv::format_double(r.adversarial_mean),
                           csv::format_double(r.adversarial_std), csv::format_double(r.welch_t),
                           csv::format_double(r.welch_p));
    }
    return out;
}

std::vector<DistanceBar> parse_distance_csv(const std::string& text)
{
    std::vector<std::string> storage;
    std::vector<DistanceBar> out;
    for (const auto& f : data_lines(text, kDistanceHeader, storage)) {
        out.push_back({std::string(f[0]), std::string(f[1]), csv::parse_double(f[2]), csv::parse_double(f[3]),
                       csv::parse_double(f[4]), csv::parse_double(f[5]), csv::parse_double(f[6]), csv::parse_double(f[7])});
    }
    return out;
}

std::string retrain_csv(std::span<const RetrainBar> rows)
{
    std::string out = std::string(kRetrainHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv::format_double(r.fraction), r.scope,
                           csv::format_double(r.benign_accuracy), csv::format_double(r.attack_accuracy),
                           opt_cell(r.undefended_attack_accuracy), csv::format_double(r.benign_mean),
                           csv::format_double(r.adversarial_mean), opt_cell(r.undefended_adversarial_mean),
                           csv::format_double(r.welch_p));
    }
    return out;
}

std::vector<RetrainBar> parse_retrain_csv(const std::string& text)
{
    std::vector<std::string> storage;
    std::vector<RetrainBar> out;
    for (const auto& f : data_lines(text, kRetrainHeader, storage)) {
        RetrainBar r;
        r.fraction = csv::parse_double(f[0]);
        r.scope = std::string(f[1]);
        r.benign_accuracy = csv::parse_double(f[2]);
        r.attack_accuracy = csv::parse_double(f[3]);
        r.undefended_attack_accuracy = parse_opt(f[4]);
        r.benign_mean = csv::parse_double(f[5]);
        r.adversarial_mean = csv::parse_double(f[6]);
        r.undefended_adversarial_mean = parse_opt(f[7]);
        r.welch_p = csv::parse_double(f[8]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_report(const std::filesystem::path& dir, const EvaluationReport& report)
{
    write_text(dir / "table3.csv", table_csv(report.table));
    write_text(dir / "fig3_accuracy.csv", accuracy_csv(report.accuracy_points));
    write_text(dir / "fig4_distances.csv", distance_csv(report.distance_bars));
    write_text(dir / "fig6_retrain.csv", retrain_csv(report.retrain_bars));
}

EvaluationReport read_report(const std::filesystem::path& dir)
{
    EvaluationReport r;
    r.table = parse_table_csv(read_text(dir / "table3.csv"));
    r.accuracy_points = parse_accuracy_csv(read_text(dir / "fig3_accuracy.csv"));
    r.distance_bars = parse_distance_csv(read_text(dir / "fig4_distances.csv"));
    r.retrain_bars = parse_retrain_csv(read_text(dir / "fig6_retrain.csv"));
    return r;
}

}  // namespace eyeadv
