#pragma once

#include <span>

namespace eyeadv {

struct WelchResult {
    double t_statistic = 0.0;
    /// Welch-Satterthwaite degrees of freedom.
    double degrees_of_freedom = 0.0;
    /// Two-sided.
    double p_value = 1.0;
    /// Set when both samples have zero variance but different means (p is the 0 limit).
    bool degenerate = false;
};

/// Count, mean and unbiased variance of a sample.
struct SampleSummary {
    double n = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

SampleSummary summarize(std::span<const double> v);
/// Summary of the concatenation of the summarized samples.
SampleSummary pool(std::span<const SampleSummary> parts);

/// Two-sample t-test without the equal-variance assumption.
/// Throws std::invalid_argument when a sample has fewer than two elements.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);
WelchResult welch_t_test(const SampleSummary& a, const SampleSummary& b);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

double mean(std::span<const double> v);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> v);

}  // namespace eyeadv
