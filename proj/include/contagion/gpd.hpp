#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "contagion/tda.hpp"

namespace contagion::gpd {

// ── model ───────────────────────────────────────────────────────────────────

// Gibbs point-process model on projected persistence points. The local energy
// of a location z given a neighbor set N is
//     h(z | N) = (sum_{q=1..K} theta_q d_q(z, N)) * g(z)^theta_0,
// where d_q is the q-th smallest distance from z to N and g is a KDE on the
// projected plane. theta_0 is constrained to be non-negative.
struct GibbsModel {
    int K{0};
    Eigen::VectorXd theta;      // size K+1, theta(0) = density exponent
    Eigen::VectorXd variances;  // diagonal of the inverse empirical Fisher
    double nll{0.0};
    bool converged{false};
    bool singular_fisher{false};
};

// Reference density for the g^theta_0 factor.
struct PlaneKde {
    Eigen::MatrixXd points;  // m x 2
    double eta{0.0};
};

// Scott-rule KDE over the projected points themselves.
[[nodiscard]] PlaneKde default_plane_kde(const tda::ProjectedDiagram& points);

// Integration rectangle: the point bounding box expanded to three times its
// per-axis spread, with the persistence axis floored at zero.
struct Domain {
    double x_lo{0.0}, x_hi{1.0};
    double y_lo{0.0}, y_hi{1.0};
};
[[nodiscard]] Domain default_domain(const tda::ProjectedDiagram& points);

struct FitOptions {
    int max_iters{200};
    double grad_tol{1e-6};
    int restarts{4};             // random starts tried in addition to theta = 0
    std::uint64_t seed{0};
    int quad_order{64};          // Gauss-Legendre points per axis
    bool fix_theta0{false};      // pin theta_0 = 0 (pure distance model)
};

// ── operations ──────────────────────────────────────────────────────────────

// L_q: sum over points of the distance to their q-th nearest neighbor.
[[nodiscard]] double neighbor_energy(const tda::ProjectedDiagram& points, int q);

[[nodiscard]] double energy(const Eigen::Vector2d& z,
                            std::span<const Eigen::Vector2d> neighbors,
                            const Eigen::VectorXd& theta, const PlaneKde& kde);

// exp(-h(z|N)) / Z with Z integrated over the domain by Gauss-Legendre
// quadrature; integrates to 1 over the domain up to quadrature error.
[[nodiscard]] double conditional_density(const Eigen::Vector2d& z,
                                         std::span<const Eigen::Vector2d> neighbors,
                                         const Eigen::VectorXd& theta, const PlaneKde& kde,
                                         const Domain& domain, int quad_order = 64);

// Maximum pseudo-likelihood fit: each point is conditioned on its K nearest
// neighbors, and the negative log pseudo-likelihood is minimized by a
// projected quasi-Newton method with multiple starts. Parameter variances
// come from the inverse empirical Fisher information of per-point scores.
[[nodiscard]] GibbsModel fit(const tda::ProjectedDiagram& points, int K, const PlaneKde& kde,
                             const FitOptions& options = {});

// Negative log pseudo-likelihood and its analytic gradient at theta, using
// the same neighbor structure and quadrature as fit(); exposed for testing.
[[nodiscard]] double nll_with_gradient(const tda::ProjectedDiagram& points, int K,
                                       const PlaneKde& kde, const Eigen::VectorXd& theta,
                                       Eigen::VectorXd* gradient, int quad_order = 64);

// ── model comparison ────────────────────────────────────────────────────────

struct ParamTest {
    int param{0};
    double t_stat{0.0};
    double p_value{1.0};
    bool reject_bonferroni{false};
};

// Per-parameter two-sided z test T = |t1 - t2| / sqrt(v1 + v2) with a
// Bonferroni-corrected decision at level alpha / m. A parameter whose
// variance vanished in both fits (unidentified direction) reports t = 0,
// p = 1.
[[nodiscard]] std::vector<ParamTest> compare(const GibbsModel& a, const GibbsModel& b,
                                             double alpha = 0.1, int bonferroni_m = 5);

// One-sided paired t test of H_alt: mean(statistic_a - statistic_b) > 0.
struct PairedTestResult {
    double t_stat{0.0};
    double p_value{1.0};
    double dof{0.0};
};
[[nodiscard]] PairedTestResult paired_difference_test(std::span<const double> statistics_a,
                                                      std::span<const double> statistics_b);

// Parameter-count sweep 1..max_params (1 = pure distance model with K = 1;
// c >= 2 = free theta_0 with K = c - 1) scored by held-out per-point log
// density on an even/odd split. Returns the best parameter count.
struct OrderSelection {
    int best_count{1};
    std::vector<double> held_out_scores;  // indexed by parameter count - 1
};
[[nodiscard]] OrderSelection select_order(const tda::ProjectedDiagram& points,
                                          const PlaneKde& kde, int max_params = 4,
                                          const FitOptions& options = {});

// ── CSV I/O ─────────────────────────────────────────────────────────────────

struct FitRecord {
    int agent_id{0};
    int company_id{-1};
    std::string period;  // "pre" or "non"
    GibbsModel model;
};

// `agent_id,company_id,period,K,theta_0..theta_K,var_0..var_K,converged`
void write_fits_csv(std::span<const FitRecord> fits, const std::string& path);

struct TestRecord {
    int agent_id{0};
    int company_id{-1};
    ParamTest test;
};

// `agent_id,company_id,param,T,p_value,reject_at_0.1_bonferroni`
void write_tests_csv(std::span<const TestRecord> tests, const std::string& path);

}  // namespace contagion::gpd
