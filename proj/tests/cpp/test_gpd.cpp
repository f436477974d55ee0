#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "contagion/gpd.hpp"
#include "contagion/rng.hpp"
#include "oracles.hpp"

namespace gpd = contagion::gpd;
namespace tda = contagion::tda;
using contagion::Rng;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

tda::ProjectedDiagram random_projected(Rng& rng, int n) {
    tda::ProjectedDiagram pts;
    for (int i = 0; i < n; ++i) {
        pts.emplace_back(rng.uniform(0.0, 1.0), rng.uniform(0.05, 2.0));
    }
    return pts;
}

// Oracle energy computed straight from the definition: sorted distances and a
// directly summed Gaussian kernel, sharing no code with the library.
double oracle_energy(const Eigen::Vector2d& z, const tda::ProjectedDiagram& neighbors,
                     const Eigen::VectorXd& theta, const gpd::PlaneKde& kde) {
    std::vector<double> dists;
    for (const auto& nb : neighbors) dists.push_back((z - nb).norm());
    std::sort(dists.begin(), dists.end());
    double sum = 0.0;
    for (int q = 1; q < theta.size(); ++q) sum += theta(q) * dists[q - 1];
    double g = 0.0;
    const double eta = kde.eta;
    for (int i = 0; i < kde.points.rows(); ++i) {
        const double dx = z.x() - kde.points(i, 0);
        const double dy = z.y() - kde.points(i, 1);
        g += std::exp(-(dx * dx + dy * dy) / (2.0 * eta * eta));
    }
    g /= static_cast<double>(kde.points.rows()) * 2.0 * 3.141592653589793 * eta * eta;
    return sum * std::pow(g, theta(0));
}

// Trapezoid sum of f over the domain on a (2m+1)^2 grid.
template <typename F>
double trapezoid2d(const F& f, const gpd::Domain& dom, int half) {
    const int n = 2 * half + 1;
    const double hx = (dom.x_hi - dom.x_lo) / (n - 1);
    const double hy = (dom.y_hi - dom.y_lo) / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        for (int j = 0; j < n; ++j) {
            const double wy = (j == 0 || j == n - 1) ? 0.5 : 1.0;
            total += wx * wy * f(dom.x_lo + i * hx, dom.y_lo + j * hy);
        }
    }
    return total * hx * hy;
}

// Richardson-extrapolated trapezoid (one halving step).
template <typename F>
double trapezoid_refined(const F& f, const gpd::Domain& dom, int half) {
    const double coarse = trapezoid2d(f, dom, half);
    const double fine = trapezoid2d(f, dom, 2 * half);
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

// ── building blocks ─────────────────────────────────────────────────────────

TEST_CASE("nearest-neighbor energy of collinear points") {
    tda::ProjectedDiagram pts{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
    CHECK(gpd::neighbor_energy(pts, 1) == doctest::Approx(4.0).epsilon(1e-12));
    // Second-nearest distances: 2, 1, 1, 2.
    CHECK(gpd::neighbor_energy(pts, 2) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK_THROWS((void)gpd::neighbor_energy(pts, 4));
    CHECK_THROWS((void)gpd::neighbor_energy(pts, 0));
}

TEST_CASE("energy matches the oracle formula on random configurations") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto cloud = random_projected(rng, 8);
        const auto neighbors = random_projected(rng, 5);
        gpd::PlaneKde kde = gpd::default_plane_kde(cloud);
        const int K = 1 + trial % 3;
        Eigen::VectorXd theta(K + 1);
        theta(0) = rng.uniform(0.0, 0.8);
        for (int q = 1; q <= K; ++q) theta(q) = rng.uniform(-1.0, 1.0);
        const Eigen::Vector2d z(rng.uniform(0.0, 1.0), rng.uniform(0.0, 2.0));
        CHECK(gpd::energy(z, neighbors, theta, kde) ==
              doctest::Approx(oracle_energy(z, neighbors, theta, kde)).epsilon(1e-10));
    }
}

TEST_CASE("default domain covers the points with a padded, non-negative box") {
    Rng rng(42);
    const auto pts = random_projected(rng, 20);
    const auto dom = gpd::default_domain(pts);
    for (const auto& p : pts) {
        CHECK(p.x() > dom.x_lo);
        CHECK(p.x() < dom.x_hi);
        CHECK(p.y() > dom.y_lo);
        CHECK(p.y() < dom.y_hi);
    }
    CHECK(dom.y_lo >= 0.0);
}

// ── conditional density ─────────────────────────────────────────────────────

TEST_CASE("conditional density integrates to one against a trapezoid oracle") {
    Rng rng(43);
    const auto neighbors = random_projected(rng, 4);
    const auto cloud = random_projected(rng, 6);
    const gpd::PlaneKde kde = gpd::default_plane_kde(cloud);
    Eigen::VectorXd theta(3);
    theta << 0.4, 0.8, -0.3;
    gpd::Domain dom{-0.5, 1.8, 0.0, 2.6};

    // The density is pointwise exp(-h)/Z for one constant Z, so integrating it
    // with the trapezoid rule equals integrating exp(-h) and dividing by Z.
    // Recover Z from several probe evaluations and require them to agree,
    // which pins the pointwise form, then measure the mass of exp(-h) with a
    // Richardson-refined trapezoid oracle.
    std::vector<double> z_probes;
    for (int i = 0; i < 5; ++i) {
        const Eigen::Vector2d z(rng.uniform(dom.x_lo, dom.x_hi),
                                rng.uniform(dom.y_lo, dom.y_hi));
        const double dens = gpd::conditional_density(z, neighbors, theta, kde, dom, 128);
        z_probes.push_back(std::exp(-oracle_energy(z, neighbors, theta, kde)) / dens);
    }
    const double z_bar =
        std::accumulate(z_probes.begin(), z_probes.end(), 0.0) / z_probes.size();
    for (const double zi : z_probes) CHECK(zi == doctest::Approx(z_bar).epsilon(1e-9));

    const auto raw = [&](double x, double y) {
        return std::exp(-oracle_energy({x, y}, neighbors, theta, kde));
    };
    const double integral = trapezoid_refined(raw, dom, 128) / z_bar;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("conditional density matches exp(-energy) normalized by an oracle constant") {
    Rng rng(44);
    const auto neighbors = random_projected(rng, 5);
    const auto cloud = random_projected(rng, 6);
    const gpd::PlaneKde kde = gpd::default_plane_kde(cloud);
    Eigen::VectorXd theta(2);
    theta << 0.2, 1.1;
    gpd::Domain dom{-0.4, 1.6, 0.0, 2.4};
    const auto unnorm = [&](double x, double y) {
        return std::exp(-oracle_energy({x, y}, neighbors, theta, kde));
    };
    const double z_oracle = trapezoid_refined(unnorm, dom, 256);
    for (int i = 0; i < 10; ++i) {
        const Eigen::Vector2d z(rng.uniform(dom.x_lo, dom.x_hi),
                                rng.uniform(dom.y_lo, dom.y_hi));
        const double lib = gpd::conditional_density(z, neighbors, theta, kde, dom, 64);
        const double want = unnorm(z.x(), z.y()) / z_oracle;
        CHECK(lib == doctest::Approx(want).epsilon(1e-6));
    }
}

// ── gradients ───────────────────────────────────────────────────────────────

TEST_CASE("analytic nll gradient matches central finite differences") {
    Rng rng(45);
    for (int trial = 0; trial < 6; ++trial) {
        const int K = 1 + trial % 3;
        const int n = K + 4 + static_cast<int>(rng.uniform_int(0, 6));
        const auto pts = random_projected(rng, n);
        const gpd::PlaneKde kde = gpd::default_plane_kde(pts);
        Eigen::VectorXd theta(K + 1);
        theta(0) = rng.uniform(0.05, 0.6);
        for (int q = 1; q <= K; ++q) theta(q) = rng.uniform(-0.8, 0.8);
        Eigen::VectorXd grad;
        (void)gpd::nll_with_gradient(pts, K, kde, theta, &grad, 48);
        REQUIRE(grad.size() == K + 1);
        for (int j = 0; j <= K; ++j) {
            const double h = 1e-5 * std::max(1.0, std::fabs(theta(j)));
            Eigen::VectorXd tp = theta, tm = theta;
            tp(j) += h;
            tm(j) -= h;
            const double fp = gpd::nll_with_gradient(pts, K, kde, tp, nullptr, 48);
            const double fm = gpd::nll_with_gradient(pts, K, kde, tm, nullptr, 48);
            const double fd = (fp - fm) / (2.0 * h);
            const double rel =
                std::fabs(grad(j) - fd) / std::max(1e-6, std::fabs(grad(j)) + std::fabs(fd));
            CHECK(rel < 1e-4);
        }
    }
}

// ── fitting ─────────────────────────────────────────────────────────────────

TEST_CASE("fit reaches a lower nll than the origin and random probes") {
    Rng rng(46);
    const auto pts = random_projected(rng, 14);
    const gpd::PlaneKde kde = gpd::default_plane_kde(pts);
    gpd::FitOptions opt;
    opt.restarts = 2;
    opt.quad_order = 32;
    opt.seed = 7;
    const auto model = gpd::fit(pts, 2, kde, opt);
    REQUIRE(model.theta.size() == 3);
    REQUIRE(model.variances.size() == 3);
    const double at_fit = gpd::nll_with_gradient(pts, 2, kde, model.theta, nullptr, 32);
    CHECK(model.nll == doctest::Approx(at_fit).epsilon(1e-8));
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK(model.nll <=
          gpd::nll_with_gradient(pts, 2, kde, zero, nullptr, 32) + 1e-9);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd probe = model.theta;
        for (int j = 0; j < 3; ++j) probe(j) += rng.uniform(-0.3, 0.3);
        probe(0) = std::max(0.0, probe(0));
        CHECK(model.nll <= gpd::nll_with_gradient(pts, 2, kde, probe, nullptr, 32) + 1e-7);
    }
    for (int j = 0; j < 3; ++j) CHECK(model.variances(j) >= 0.0);
    CHECK(model.theta(0) >= 0.0);
}

TEST_CASE("fit is deterministic and invariant to point order") {
    Rng rng(47);
    auto pts = random_projected(rng, 12);
    const gpd::PlaneKde kde = gpd::default_plane_kde(pts);
    gpd::FitOptions opt;
    opt.restarts = 2;
    opt.quad_order = 32;
    const auto a = gpd::fit(pts, 1, kde, opt);
    const auto b = gpd::fit(pts, 1, kde, opt);
    CHECK(a.theta == b.theta);
    std::reverse(pts.begin(), pts.end());
    const auto c = gpd::fit(pts, 1, kde, opt);
    CHECK(a.nll == doctest::Approx(c.nll).epsilon(1e-6));
}

TEST_CASE("with theta_0 pinned at zero the density factor is inert") {
    Rng rng(48);
    const auto pts = random_projected(rng, 10);
    gpd::PlaneKde kde1 = gpd::default_plane_kde(pts);
    gpd::PlaneKde kde2 = kde1;
    kde2.eta *= 3.0;  // a very different reference density
    Eigen::VectorXd theta(2);
    theta << 0.0, 0.7;
    const double n1 = gpd::nll_with_gradient(pts, 1, kde1, theta, nullptr, 32);
    const double n2 = gpd::nll_with_gradient(pts, 1, kde2, theta, nullptr, 32);
    CHECK(n1 == doctest::Approx(n2).epsilon(1e-12));
}

TEST_CASE("fit rejects undersized inputs") {
    Rng rng(49);
    const auto pts = random_projected(rng, 3);
    const gpd::PlaneKde kde = gpd::default_plane_kde(pts);
    CHECK_THROWS((void)gpd::fit(pts, 2, kde, {}));
}

// ── comparison tests ────────────────────────────────────────────────────────

TEST_CASE("parameter z test reproduces the two-sided normal p for a unit gap") {
    gpd::GibbsModel a, b;
    a.K = b.K = 1;
    a.theta = Eigen::Vector2d(0.0, 1.0);
    b.theta = Eigen::Vector2d(0.0, 0.0);
    a.variances = Eigen::Vector2d(0.0, 0.5);
    b.variances = Eigen::Vector2d(0.0, 0.5);
    const auto tests = gpd::compare(a, b, 0.1, 5);
    REQUIRE(tests.size() == 2);
    CHECK(tests[0].param == 0);
    CHECK(tests[0].t_stat == doctest::Approx(0.0));
    CHECK(tests[0].p_value == doctest::Approx(1.0));
    CHECK(tests[1].param == 1);
    CHECK(tests[1].t_stat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tests[1].p_value == doctest::Approx(0.3173105078629141).epsilon(1e-4));
    CHECK_FALSE(tests[1].reject_bonferroni);  // 0.317 > 0.1 / 5
}

TEST_CASE("bonferroni rejection uses alpha over m") {
    gpd::GibbsModel a, b;
    a.K = b.K = 1;
    a.theta = Eigen::Vector2d(0.0, 1.0);
    b.theta = Eigen::Vector2d(0.0, 0.0);
    a.variances = Eigen::Vector2d(0.0, 0.01);
    b.variances = Eigen::Vector2d(0.0, 0.01);
    // T = 1 / sqrt(0.02) ~ 7.07: p ~ 1.5e-12 < 0.1 / 5.
    const auto tests = gpd::compare(a, b, 0.1, 5);
    CHECK(tests[1].reject_bonferroni);
}

TEST_CASE("compare handles mismatched models and zero variance") {
    gpd::GibbsModel a, b;
    a.K = 1;
    b.K = 2;
    a.theta = Eigen::Vector2d(0.0, 1.0);
    b.theta = Eigen::Vector3d(0.0, 1.0, 0.5);
    a.variances = Eigen::Vector2d(0.1, 0.1);
    b.variances = Eigen::Vector3d(0.1, 0.1, 0.1);
    CHECK_THROWS((void)gpd::compare(a, b));

    b = a;
    a.theta(1) = 2.0;
    a.variances.setZero();
    b.variances.setZero();
    const auto tests = gpd::compare(a, b);
    CHECK(tests[0].p_value == doctest::Approx(1.0));  // equal params, no variance
    CHECK(tests[1].p_value == doctest::Approx(0.0));  // unequal params, no variance
}

TEST_CASE("paired difference test matches the quadrature oracle") {
    const std::vector<double> a{1.2, 0.8, 1.5, 0.9, 1.1, 1.3};
    const std::vector<double> b{0.9, 0.85, 1.1, 1.0, 0.7, 1.0};
    const auto res = gpd::paired_difference_test(a, b);
    std::vector<double> diff(a.size());
    for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    double mean = 0.0;
    for (const double d : diff) mean += d;
    mean /= static_cast<double>(diff.size());
    double var = 0.0;
    for (const double d : diff) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diff.size() - 1);
    const double t = mean / std::sqrt(var / static_cast<double>(diff.size()));
    CHECK(res.t_stat == doctest::Approx(t).epsilon(1e-10));
    CHECK(res.p_value == doctest::Approx(oracles::t_sf_oracle(t, 5.0)).epsilon(1e-10));

    const auto flat = gpd::paired_difference_test(a, a);
    CHECK(flat.p_value == doctest::Approx(0.5));
}

// ── order selection ─────────────────────────────────────────────────────────

TEST_CASE("order selection scores every candidate and picks the argmax") {
    Rng rng(51);
    tda::ProjectedDiagram pts;
    // Clustered pattern with strong first-neighbor structure.
    for (int i = 0; i < 15; ++i) {
        const double cx = rng.uniform(0.0, 1.0), cy = rng.uniform(0.3, 1.5);
        pts.emplace_back(cx, cy);
        pts.emplace_back(cx + rng.uniform(-0.02, 0.02), cy + rng.uniform(-0.02, 0.02));
    }
    const gpd::PlaneKde kde = gpd::default_plane_kde(pts);
    gpd::FitOptions opt;
    opt.restarts = 1;
    opt.quad_order = 24;
    const auto sel = gpd::select_order(pts, kde, 4, opt);
    REQUIRE(sel.held_out_scores.size() == 4);
    CHECK(sel.best_count >= 1);
    CHECK(sel.best_count <= 4);
    for (const double s : sel.held_out_scores) CHECK(std::isfinite(s));
    const auto best = std::max_element(sel.held_out_scores.begin(), sel.held_out_scores.end());
    CHECK(sel.best_count ==
          static_cast<int>(std::distance(sel.held_out_scores.begin(), best)) + 1);
}

// ── CSV I/O ─────────────────────────────────────────────────────────────────

TEST_CASE("fit and test records serialize with the documented headers") {
    gpd::GibbsModel m;
    m.K = 1;
    m.theta = Eigen::Vector2d(0.2, -0.4);
    m.variances = Eigen::Vector2d(0.01, 0.02);
    m.nll = 12.5;
    m.converged = true;
    std::vector<gpd::FitRecord> fits{{3, 1, "pre", m}, {3, 1, "non", m}};
    const auto fits_path = temp_file("contagion_test_fits.csv");
    gpd::write_fits_csv(fits, fits_path.string());
    std::ifstream in(fits_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "agent_id,company_id,period,K,theta_0,theta_1,var_0,var_1,converged");
    std::string row;
    std::getline(in, row);
    CHECK(row.find("3,1,pre,1,") == 0);
    std::filesystem::remove(fits_path);

    std::vector<gpd::TestRecord> tests{{3, 1, {1, 2.5, 0.0124, false}}};
    const auto tests_path = temp_file("contagion_test_tests.csv");
    gpd::write_tests_csv(tests, tests_path.string());
    std::ifstream tin(tests_path);
    std::getline(tin, header);
    CHECK(header == "agent_id,company_id,param,T,p_value,reject_at_0.1_bonferroni");
    std::getline(tin, row);
    CHECK(row.find("3,1,theta_1,") == 0);
    std::filesystem::remove(tests_path);
}
