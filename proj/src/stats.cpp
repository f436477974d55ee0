#include "contagion/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace contagion::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

static double sum_sq_dev(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s;
}

double variance_population(std::span<const double> x) {
    return sum_sq_dev(x) / static_cast<double>(x.size());
}

double variance_sample(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance_sample: need n >= 2");
    return sum_sq_dev(x) / static_cast<double>(x.size() - 1);
}

double sd_population(std::span<const double> x) { return std::sqrt(variance_population(x)); }
double sd_sample(std::span<const double> x) { return std::sqrt(variance_sample(x)); }

// ── special functions ───────────────────────────────────────────────────────

// Lentz continued fraction for the incomplete beta, after Numerical Recipes.
static double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("incomplete_beta: a, b must be > 0");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // Use the symmetry relation to keep the continued fraction convergent.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double log_choose(double n, double k) {
    if (k < 0.0 || n < 0.0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// ── distribution tails ──────────────────────────────────────────────────────

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_two_sided_p(double t) { return std::erfc(std::fabs(t) / std::sqrt(2.0)); }

double student_t_sf(double t, double nu) {
    if (nu <= 0.0) throw std::invalid_argument("student_t_sf: nu must be > 0");
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double x = nu / (nu + t * t);
    const double half_tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

// ── t tests ─────────────────────────────────────────────────────────────────

TTestResult one_sample_t_test(std::span<const double> x, double mu0) {
    if (x.size() < 2) throw std::invalid_argument("one_sample_t_test: need n >= 2");
    const double n = static_cast<double>(x.size());
    const double se = sd_sample(x) / std::sqrt(n);
    TTestResult r;
    r.dof = n - 1.0;
    if (se == 0.0) {
        // Degenerate sample: zero spread. Report an exact decision.
        r.statistic = mean(x) == mu0 ? 0.0 : std::numeric_limits<double>::infinity();
        r.p_value = mean(x) == mu0 ? 1.0 : 0.0;
        return r;
    }
    r.statistic = (mean(x) - mu0) / se;
    r.p_value = 2.0 * student_t_sf(std::fabs(r.statistic), r.dof);
    return r;
}

TTestResult paired_t_test_greater(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_t_test_greater: size mismatch");
    if (a.size() < 2) throw std::invalid_argument("paired_t_test_greater: need n >= 2");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double n = static_cast<double>(diff.size());
    const double se = sd_sample(diff) / std::sqrt(n);
    TTestResult r;
    r.dof = n - 1.0;
    if (se == 0.0) {
        const double m = mean(diff);
        r.statistic = m == 0.0 ? 0.0 : (m > 0.0 ? 1.0 : -1.0) * std::numeric_limits<double>::infinity();
        r.p_value = m == 0.0 ? 0.5 : (m > 0.0 ? 0.0 : 1.0);
        return r;
    }
    r.statistic = mean(diff) / se;
    r.p_value = student_t_sf(r.statistic, r.dof);
    return r;
}

}  // namespace contagion::stats
