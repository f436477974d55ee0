#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace contagion::stats {

// ── moments ─────────────────────────────────────────────────────────────────

[[nodiscard]] double mean(std::span<const double> x);

// Population variance (divide by n); used for z-score standardisation.
[[nodiscard]] double variance_population(std::span<const double> x);

// Sample variance (divide by n-1); used by t statistics.
[[nodiscard]] double variance_sample(std::span<const double> x);

[[nodiscard]] double sd_population(std::span<const double> x);
[[nodiscard]] double sd_sample(std::span<const double> x);

// ── special functions ───────────────────────────────────────────────────────

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
[[nodiscard]] double incomplete_beta(double a, double b, double x);

// log C(n, k) via lgamma.
[[nodiscard]] double log_choose(double n, double k);

// ── distribution tails ──────────────────────────────────────────────────────

// P(Z > z) for standard normal Z.
[[nodiscard]] double normal_sf(double z);

// Two-sided normal p-value 2 P(Z > |t|).
[[nodiscard]] double normal_two_sided_p(double t);

// P(T > t) for Student t with nu degrees of freedom.
[[nodiscard]] double student_t_sf(double t, double nu);

// ── t tests ─────────────────────────────────────────────────────────────────

struct TTestResult {
    double statistic{0.0};
    double p_value{1.0};
    double dof{0.0};
};

// Two-sided one-sample test of H0: mean(x) == mu0.
[[nodiscard]] TTestResult one_sample_t_test(std::span<const double> x, double mu0);

// One-sided paired test of H_alt: mean(a - b) > 0.
[[nodiscard]] TTestResult paired_t_test_greater(std::span<const double> a,
                                                std::span<const double> b);

}  // namespace contagion::stats
