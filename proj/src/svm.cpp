#include "eyeadv/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace eyeadv {

void SvmTrainConfig::validate() const
{
    if (!(C > 0.0)) throw std::invalid_argument("svm: C must be positive");
    if (!(tolerance > 0.0)) throw std::invalid_argument("svm: tolerance must be positive");
    if (max_iterations == 0) throw std::invalid_argument("svm: max_iterations must be positive");
}

namespace {

inline double rbf(std::span<const double> a, std::span<const double> b, double gamma)
{
    return std::exp(-gamma * squared_distance(a, b));
}

// Dual C-SVC solver with second-order working-set selection and no shrinking.
// Q rows are computed lazily and kept for the lifetime of the solver.
class SmoSolver {
public:
    SmoSolver(const Matrix& x, std::vector<std::size_t> rows, std::vector<signed char> y, double gamma, double c)
        : x_(x), rows_(std::move(rows)), y_(std::move(y)), gamma_(gamma), c_(c), n_(rows_.size()),
          alpha_(n_, 0.0), grad_(n_, -1.0), qd_(n_, 1.0), cache_(n_)
    {
    }

    void solve(double eps, std::size_t max_iterations)
    {
        for (std::size_t iter = 0; iter < max_iterations; ++iter) {
            std::size_t i = 0;
            std::size_t j = 0;
            if (!select_working_set(eps, i, j)) return;
            update(i, j);
        }
        // Out of iterations: keep the current (feasible) iterate.
    }

    const std::vector<double>& alpha() const { return alpha_; }

    double rho() const
    {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t nr_free = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double yg = y_[t] * grad_[t];
            if (upper(t)) {
                if (y_[t] == -1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (lower(t)) {
                if (y_[t] == +1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++nr_free;
                sum_free += yg;
            }
        }
        return nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;
    }

private:
    static constexpr double kTau = 1e-12;

    bool upper(std::size_t t) const { return alpha_[t] >= c_; }
    bool lower(std::size_t t) const { return alpha_[t] <= 0.0; }

    const std::vector<double>& q_row(std::size_t i)
    {
        auto& r = cache_[i];
        if (r.empty()) {
            r.resize(n_);
            const auto xi = x_.row(rows_[i]);
            for (std::size_t t = 0; t < n_; ++t) {
                r[t] = static_cast<double>(y_[i] * y_[t]) * rbf(xi, x_.row(rows_[t]), gamma_);
            }
        }
        return r;
    }

    bool select_working_set(double eps, std::size_t& out_i, std::size_t& out_j)
    {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t gmax_idx = -1;
        std::ptrdiff_t gmin_idx = -1;
        double obj_diff_min = std::numeric_limits<double>::infinity();

        for (std::size_t t = 0; t < n_; ++t) {
            if (y_[t] == +1) {
                if (!upper(t) && -grad_[t] >= gmax) {
                    gmax = -grad_[t];
                    gmax_idx = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!lower(t) && grad_[t] >= gmax) {
                gmax = grad_[t];
                gmax_idx = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (gmax_idx < 0) return false;
        const auto i = static_cast<std::size_t>(gmax_idx);
        const auto& qi = q_row(i);

        for (std::size_t t = 0; t < n_; ++t) {
            double grad_diff = 0.0;
            double quad = 0.0;
            if (y_[t] == +1) {
                if (lower(t)) continue;
                grad_diff = gmax + grad_[t];
                gmax2 = std::max(gmax2, grad_[t]);
                quad = qd_[i] + qd_[t] - 2.0 * y_[i] * qi[t];
            } else {
                if (upper(t)) continue;
                grad_diff = gmax - grad_[t];
                gmax2 = std::max(gmax2, -grad_[t]);
                quad = qd_[i] + qd_[t] + 2.0 * y_[i] * qi[t];
            }
            if (grad_diff > 0.0) {
                const double obj_diff = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                if (obj_diff <= obj_diff_min) {
                    gmin_idx = static_cast<std::ptrdiff_t>(t);
                    obj_diff_min = obj_diff;
                }
            }
        }
        if (gmax + gmax2 < eps || gmin_idx < 0) return false;
        out_i = i;
        out_j = static_cast<std::size_t>(gmin_idx);
        return true;
    }

    void update(std::size_t i, std::size_t j)
    {
        const auto& qi = q_row(i);
        const auto& qj = q_row(j);
        const double old_i = alpha_[i];
        const double old_j = alpha_[j];
        double& ai = alpha_[i];
        double& aj = alpha_[j];

        if (y_[i] != y_[j]) {
            double quad = qd_[i] + qd_[j] + 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > c_) {
                    ai = c_;
                    aj = c_ - diff;
                }
            } else if (aj > c_) {
                aj = c_;
                ai = c_ + diff;
            }
        } else {
            double quad = qd_[i] + qd_[j] - 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c_) {
                if (ai > c_) {
                    ai = c_;
                    aj = sum - c_;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > c_) {
                if (aj > c_) {
                    aj = c_;
                    ai = sum - c_;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double dai = ai - old_i;
        const double daj = aj - old_j;
        for (std::size_t t = 0; t < n_; ++t) grad_[t] += qi[t] * dai + qj[t] * daj;
    }

    const Matrix& x_;
    std::vector<std::size_t> rows_;
    std::vector<signed char> y_;
    double gamma_;
    double c_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> grad_;
    std::vector<double> qd_;  // K(x,x) = 1 for RBF
    std::vector<std::vector<double>> cache_;
};

}  // namespace

double SvmPairModel::decision(std::span<const double> x, double gamma) const
{
    double f = intercept;
    for (std::size_t s = 0; s < dual_coef.size(); ++s) f += dual_coef[s] * rbf(support_vectors.row(s), x, gamma);
    return f;
}

std::size_t SvmRbfModel::class_index(int label) const
{
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw std::invalid_argument("svm: unknown class label " + std::to_string(label));
    return static_cast<std::size_t>(it - classes.begin());
}

SvmRbfModel train_svm(const Matrix& features, std::span<const int> labels, const SvmTrainConfig& config)
{
    config.validate();
    if (features.rows() != labels.size()) throw std::invalid_argument("svm: feature/label count mismatch");
    for (const double v : features.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("svm: non-finite feature value");
    }
    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) throw std::invalid_argument("svm: degenerate training set");

    SvmRbfModel model;
    model.classes = classes;
    model.dim = features.cols();
    model.gamma = config.gamma > 0.0 ? config.gamma : 1.0 / static_cast<double>(features.cols());

    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            std::vector<std::size_t> rows;
            std::vector<signed char> y;
            for (std::size_t r = 0; r < labels.size(); ++r) {
                if (labels[r] == classes[a]) {
                    rows.push_back(r);
                    y.push_back(+1);
                } else if (labels[r] == classes[b]) {
                    rows.push_back(r);
                    y.push_back(-1);
                }
            }
            SmoSolver solver(features, rows, y, model.gamma, config.C);
            solver.solve(config.tolerance, config.max_iterations);

            SvmPairModel pair;
            pair.positive = classes[a];
            pair.negative = classes[b];
            pair.intercept = -solver.rho();
            const auto& alpha = solver.alpha();
            for (std::size_t t = 0; t < rows.size(); ++t) {
                if (alpha[t] > 0.0) {
                    pair.support_vectors.append_row(features.row(rows[t]));
                    pair.dual_coef.push_back(alpha[t] * y[t]);
                }
            }
            if (pair.support_vectors.cols() == 0) pair.support_vectors = Matrix(0, model.dim);
            model.pairs.push_back(std::move(pair));
        }
    }
    return model;
}

SvmPrediction tally_votes(const SvmRbfModel& model, std::vector<double> decision_values)
{
    const std::size_t k = model.classes.size();
    SvmPrediction p;
    p.votes.assign(k, 0);
    std::vector<double> score(k, 0.0);
    std::size_t idx = 0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b, ++idx) {
            const double f = decision_values[idx];
            ++p.votes[f > 0.0 ? a : b];
            score[a] += f;
            score[b] -= f;
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (p.votes[c] > p.votes[best] || (p.votes[c] == p.votes[best] && score[c] > score[best])) best = c;
    }
    p.label = model.classes[best];
    p.decision_values = std::move(decision_values);
    return p;
}

SvmPrediction svm_predict(const SvmRbfModel& model, std::span<const double> x)
{
    if (x.size() != model.dim) throw std::invalid_argument("svm: dimension mismatch");
    std::vector<double> dv;
    dv.reserve(model.pairs.size());
    for (const auto& pair : model.pairs) dv.push_back(pair.decision(x, model.gamma));
    return tally_votes(model, std::move(dv));
}

int svm_predict_label(const SvmRbfModel& model, std::span<const double> x)
{
    return svm_predict(model, x).label;
}

namespace {

std::size_t pair_index(std::size_t a, std::size_t b, std::size_t k)
{
    // a < b; pairs enumerated row by row.
    return a * k - a * (a + 1) / 2 + (b - a - 1);
}

}  // namespace

double oriented_decision(const SvmRbfModel& model, int a, int b, std::span<const double> x)
{
    const std::size_t ia = model.class_index(a);
    const std::size_t ib = model.class_index(b);
    if (ia == ib) throw std::invalid_argument("svm: oriented decision needs two distinct classes");
    const std::size_t k = model.classes.size();
    if (ia < ib) return model.pairs[pair_index(ia, ib, k)].decision(x, model.gamma);
    return -model.pairs[pair_index(ib, ia, k)].decision(x, model.gamma);
}

LossGradient svm_loss_gradient(const SvmRbfModel& model, std::span<const double> x, int reference)
{
    if (x.size() != model.dim) throw std::invalid_argument("svm: dimension mismatch");
    const std::size_t ref = model.class_index(reference);
    const std::size_t k = model.classes.size();

    LossGradient out;
    out.loss = -std::numeric_limits<double>::infinity();
    std::size_t best = k;
    for (std::size_t c = 0; c < k; ++c) {
        if (c == ref) continue;
        const double g = oriented_decision(model, model.classes[c], reference, x);
        if (g > out.loss) {
            out.loss = g;
            best = c;
        }
    }
    out.rival = model.classes[best];

    const bool flip = best > ref;  // the stored pair is (ref, best): decision favours ref
    const SvmPairModel& pair = model.pairs[flip ? pair_index(ref, best, k) : pair_index(best, ref, k)];
    const double sign = flip ? -1.0 : 1.0;
    out.gradient.assign(model.dim, 0.0);
    for (std::size_t s = 0; s < pair.dual_coef.size(); ++s) {
        const auto sv = pair.support_vectors.row(s);
        const double w = sign * pair.dual_coef[s] * 2.0 * model.gamma * rbf(sv, x, model.gamma);
        for (std::size_t d = 0; d < model.dim; ++d) out.gradient[d] += w * (sv[d] - x[d]);
    }
    out.zero = std::all_of(out.gradient.begin(), out.gradient.end(), [](double v) { return v == 0.0; });
    return out;
}

namespace {

constexpr const char* kSvmMagic = "eyeadv-svm";
constexpr int kSvmVersion = 1;

std::string hex(double v) { return fmt::format("{:a}", v); }

double parse_hex(const std::string& token)
{
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw std::runtime_error("model file: bad number '" + token + "'");
    return v;
}

template <typename T>
T expect_read(std::istream& is, const char* what)
{
    T v{};
    if (!(is >> v)) throw std::runtime_error(std::string("model file: expected ") + what);
    return v;
}

void expect_keyword(std::istream& is, const std::string& kw)
{
    const auto tok = expect_read<std::string>(is, kw.c_str());
    if (tok != kw) throw std::runtime_error("model file: expected '" + kw + "', got '" + tok + "'");
}

}  // namespace

void save_svm(std::ostream& os, const SvmRbfModel& model)
{
    os << kSvmMagic << ' ' << kSvmVersion << '\n';
    os << "dim " << model.dim << '\n';
    os << "gamma " << hex(model.gamma) << '\n';
    os << "classes " << model.classes.size();
    for (const int c : model.classes) os << ' ' << c;
    os << '\n';
    os << "pairs " << model.pairs.size() << '\n';
    for (const auto& p : model.pairs) {
        os << "pair " << p.positive << ' ' << p.negative << " nsv " << p.dual_coef.size() << " intercept "
           << hex(p.intercept) << '\n';
        for (std::size_t s = 0; s < p.dual_coef.size(); ++s) {
            os << hex(p.dual_coef[s]);
            for (const double v : p.support_vectors.row(s)) os << ' ' << hex(v);
            os << '\n';
        }
    }
    os << "end\n";
}

SvmRbfModel load_svm(std::istream& is)
{
    expect_keyword(is, kSvmMagic);
    const int version = expect_read<int>(is, "version");
    if (version != kSvmVersion) throw std::runtime_error("model file: unsupported svm format version");
    SvmRbfModel m;
    expect_keyword(is, "dim");
    m.dim = expect_read<std::size_t>(is, "dim");
    expect_keyword(is, "gamma");
    m.gamma = parse_hex(expect_read<std::string>(is, "gamma"));
    expect_keyword(is, "classes");
    const auto nc = expect_read<std::size_t>(is, "class count");
    for (std::size_t c = 0; c < nc; ++c) m.classes.push_back(expect_read<int>(is, "class"));
    expect_keyword(is, "pairs");
    const auto np = expect_read<std::size_t>(is, "pair count");
    for (std::size_t p = 0; p < np; ++p) {
        SvmPairModel pair;
        expect_keyword(is, "pair");
        pair.positive = expect_read<int>(is, "positive class");
        pair.negative = expect_read<int>(is, "negative class");
        expect_keyword(is, "nsv");
        const auto nsv = expect_read<std::size_t>(is, "support vector count");
        expect_keyword(is, "intercept");
        pair.intercept = parse_hex(expect_read<std::string>(is, "intercept"));
        pair.support_vectors = Matrix(nsv, m.dim);
        for (std::size_t s = 0; s < nsv; ++s) {
            pair.dual_coef.push_back(parse_hex(expect_read<std::string>(is, "coefficient")));
            for (std::size_t d = 0; d < m.dim; ++d) {
                pair.support_vectors(s, d) = parse_hex(expect_read<std::string>(is, "support vector value"));
            }
        }
        m.pairs.push_back(std::move(pair));
    }
    expect_keyword(is, "end");
    return m;
}

}  // namespace eyeadv
