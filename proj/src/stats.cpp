#include "eyeadv/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eyeadv {

double mean(std::span<const double> v)
{
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df)
{
    if (!(df > 0.0)) throw std::invalid_argument("student t: df must be positive");
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch: each sample needs >= 2 elements");
    return welch_t_test({static_cast<double>(a.size()), mean(a), sample_variance(a)},
                        {static_cast<double>(b.size()), mean(b), sample_variance(b)});
}

WelchResult welch_t_test(const SampleSummary& a, const SampleSummary& b)
{
    if (a.n < 2.0 || b.n < 2.0) throw std::invalid_argument("welch: each sample needs >= 2 elements");
    const double va = a.variance / a.n;
    const double vb = b.variance / b.n;
    const double se2 = va + vb;

    WelchResult r;
    if (se2 == 0.0) {
        r.degrees_of_freedom = a.n + b.n - 2.0;
        if (a.mean == b.mean) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_statistic =
                a.mean > b.mean ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
            r.degenerate = true;
        }
        return r;
    }
    r.t_statistic = (a.mean - b.mean) / std::sqrt(se2);
    r.degrees_of_freedom = se2 * se2 / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
    r.p_value = student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom);
    return r;
}

SampleSummary summarize(std::span<const double> v)
{
    if (v.empty()) return {};
    return {static_cast<double>(v.size()), mean(v), v.size() >= 2 ? sample_variance(v) : 0.0};
}

SampleSummary pool(std::span<const SampleSummary> parts)
{
    double n = 0.0;
    double sum = 0.0;
    for (const auto& p : parts) {
        n += p.n;
        sum += p.n * p.mean;
    }
    if (n == 0.0) return {};
    const double m = sum / n;
    double ss = 0.0;
    for (const auto& p : parts) {
        if (p.n == 0.0) continue;
        ss += (p.n - 1.0) * p.variance + p.n * (p.mean - m) * (p.mean - m);
    }
    return {n, m, n >= 2.0 ? ss / (n - 1.0) : 0.0};
}

}  // namespace eyeadv
