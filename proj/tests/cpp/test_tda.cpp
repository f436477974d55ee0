#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "contagion/rng.hpp"
#include "contagion/tda.hpp"
#include "oracles.hpp"

namespace tda = contagion::tda;
using contagion::Rng;

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

Eigen::MatrixXd random_field(Rng& rng, int rows, int cols) {
    Eigen::MatrixXd f(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) f(i, j) = rng.uniform(0.0, 1.0);
    }
    return f;
}

// Euler characteristic of the full cubical complex on an r x c grid.
int euler_characteristic(int rows, int cols) {
    const int v = rows * cols;
    const int e = rows * (cols - 1) + cols * (rows - 1);
    const int f = (rows - 1) * (cols - 1);
    return v - e + f;
}

int essential_count(const std::vector<tda::DiagramPoint>& pts) {
    int n = 0;
    for (const auto& p : pts) n += p.essential;
    return n;
}

}  // namespace

// ── KDE ─────────────────────────────────────────────────────────────────────

TEST_CASE("kde closed forms in one and two dimensions") {
    Eigen::MatrixXd cloud1(1, 1);
    cloud1 << 0.0;
    Eigen::MatrixXd at0(1, 1);
    at0 << 0.0;
    CHECK(tda::kde_evaluate(cloud1, 1.0, at0)[0] ==
          doctest::Approx(kInvSqrt2Pi).epsilon(1e-12));

    Eigen::MatrixXd cloud2(2, 1);
    cloud2 << 0.0, 2.0;
    Eigen::MatrixXd at1(1, 1);
    at1 << 1.0;
    CHECK(tda::kde_evaluate(cloud2, 1.0, at1)[0] ==
          doctest::Approx(std::exp(-0.5) * kInvSqrt2Pi).epsilon(1e-12));

    Eigen::MatrixXd origin(1, 2);
    origin << 0.0, 0.0;
    CHECK(tda::kde_evaluate(origin, 1.0, origin)[0] ==
          doctest::Approx(1.0 / (2.0 * 3.141592653589793)).epsilon(1e-12));
}

TEST_CASE("kde bandwidth scales as expected") {
    Eigen::MatrixXd cloud(1, 1), q(1, 1);
    cloud << 0.0;
    q << 0.0;
    const double eta = 0.25;
    CHECK(tda::kde_evaluate(cloud, eta, q)[0] ==
          doctest::Approx(kInvSqrt2Pi / eta).epsilon(1e-12));
}

TEST_CASE("log kde agrees with the linear version and survives underflow") {
    Rng rng(12);
    Eigen::MatrixXd cloud(20, 2), queries(5, 2);
    for (int i = 0; i < 20; ++i) {
        cloud(i, 0) = rng.normal(0.0, 1.0);
        cloud(i, 1) = rng.normal(0.0, 1.0);
    }
    for (int i = 0; i < 5; ++i) {
        queries(i, 0) = rng.uniform(-2.0, 2.0);
        queries(i, 1) = rng.uniform(-2.0, 2.0);
    }
    const auto lin = tda::kde_evaluate(cloud, 0.5, queries);
    const auto lg = tda::kde_log_evaluate(cloud, 0.5, queries);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::log(lin[i]) == doctest::Approx(lg[i]).epsilon(1e-10));
    }
    // A query so far away that the linear density underflows to zero.
    Eigen::MatrixXd far(1, 2);
    far << 1e4, 1e4;
    CHECK(tda::kde_evaluate(cloud, 0.5, far)[0] == 0.0);
    CHECK(std::isfinite(tda::kde_log_evaluate(cloud, 0.5, far)[0]));
}

TEST_CASE("kde field grid is padded and carries unit mass") {
    Rng rng(13);
    Eigen::MatrixXd cloud(200, 2);
    for (int i = 0; i < 200; ++i) {
        cloud(i, 0) = rng.normal(0.0, 2.0);
        cloud(i, 1) = rng.normal(5.0, 0.5);
    }
    const auto field = tda::build_kde_field(cloud, 64);
    REQUIRE(field.xs.size() == 64);
    REQUIRE(field.ys.size() == 64);
    CHECK(field.values.rows() == 64);
    CHECK(field.values.cols() == 64);
    CHECK(field.eta == doctest::Approx(std::pow(200.0, -1.0 / 6.0)).epsilon(1e-12));
    // Trapezoid mass over the grid: nearly all density lies inside the pad.
    const double dx = field.xs[1] - field.xs[0];
    const double dy = field.ys[1] - field.ys[0];
    double mass = 0.0;
    for (int i = 0; i + 1 < 64; ++i) {
        for (int j = 0; j + 1 < 64; ++j) {
            mass += 0.25 * dx * dy *
                    (field.values(i, j) + field.values(i + 1, j) + field.values(i, j + 1) +
                     field.values(i + 1, j + 1));
        }
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(0.02));
}

// ── persistence ─────────────────────────────────────────────────────────────

TEST_CASE("hand-checked one-dimensional profile") {
    // Values 0, 2, 1, 3: maxima at 2 and 3; the younger peak (2) merges into
    // the older one at the saddle value 1.
    Eigen::MatrixXd f(1, 4);
    f << 0.0, 2.0, 1.0, 3.0;
    const auto d = tda::superlevel_persistence(f);
    REQUIRE(d.h0.size() == 2);
    CHECK(d.h1.empty());
    bool found_finite = false, found_essential = false;
    for (const auto& p : d.h0) {
        if (p.essential) {
            found_essential = true;
            CHECK(p.birth == doctest::Approx(3.0));
            CHECK(p.death == doctest::Approx(0.0));
        } else {
            found_finite = true;
            CHECK(p.birth == doctest::Approx(2.0));
            CHECK(p.death == doctest::Approx(1.0));
        }
    }
    CHECK(found_finite);
    CHECK(found_essential);
}

TEST_CASE("constant and single-cell fields have exactly one essential class") {
    Eigen::MatrixXd one(1, 1);
    one << 4.0;
    auto d = tda::superlevel_persistence(one);
    REQUIRE(d.h0.size() == 1);
    CHECK(d.h0[0].essential);
    CHECK(d.h0[0].birth == doctest::Approx(4.0));
    CHECK(d.h0[0].death == doctest::Approx(4.0));

    Eigen::MatrixXd flat(3, 3);
    flat.setConstant(2.5);
    d = tda::superlevel_persistence(flat);
    REQUIRE(d.h0.size() == 1);
    CHECK(d.h0[0].essential);
    CHECK(d.h1.empty());
}

TEST_CASE("a ring of high values creates one loop that fills at the center value") {
    Eigen::MatrixXd f(3, 3);
    f << 1.0, 1.0, 1.0,
         1.0, 0.0, 1.0,
         1.0, 1.0, 1.0;
    const auto d = tda::superlevel_persistence(f);
    REQUIRE(d.h0.size() == 1);
    CHECK(d.h0[0].essential);
    CHECK(d.h0[0].birth == doctest::Approx(1.0));
    CHECK(d.h0[0].death == doctest::Approx(0.0));
    REQUIRE(d.h1.size() == 1);
    CHECK_FALSE(d.h1[0].essential);
    CHECK(d.h1[0].birth == doctest::Approx(1.0));
    CHECK(d.h1[0].death == doctest::Approx(0.0));
}

TEST_CASE("h0 matches the union-find elder-rule oracle on random 1-d profiles") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 16));
        auto f = random_field(rng, 1, n);
        if (trial % 3 == 0) {
            // Inject ties to exercise the tie-breaking path.
            for (int j = 0; j < n; ++j) f(0, j) = std::round(f(0, j) * 4.0) / 4.0;
        }
        const auto lib = tda::superlevel_persistence(f);
        const auto oracle = oracles::h0_union_find(f);
        CHECK(oracles::to_multiset(lib.h0) == oracles::to_multiset(oracle));
        CHECK(lib.h1.empty());
    }
}

TEST_CASE("h0 matches the oracle and the euler identity holds on random grids") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_field(rng, 8, 8);
        if (trial % 2 == 0) {
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 8; ++j) f(i, j) = std::round(f(i, j) * 8.0) / 8.0;
            }
        }
        const auto lib = tda::superlevel_persistence(f);
        const auto oracle = oracles::h0_union_find(f);
        CHECK(oracles::to_multiset(lib.h0) == oracles::to_multiset(oracle));
        CHECK(essential_count(lib.h0) - essential_count(lib.h1) == euler_characteristic(8, 8));
    }
}

TEST_CASE("every h0 and h1 pair is born no lower than it dies") {
    Rng rng(23);
    const auto f = random_field(rng, 12, 12);
    const auto d = tda::superlevel_persistence(f);
    for (const auto& p : d.h0) CHECK(p.birth >= p.death);
    for (const auto& p : d.h1) CHECK(p.birth >= p.death);
    CHECK(essential_count(d.h0) == 1);  // grids are connected
    CHECK(essential_count(d.h1) == 0);  // rectangles have no essential loops
}

// ── projection ──────────────────────────────────────────────────────────────

TEST_CASE("projection maps (birth, death) to (death, persistence) and drops zeros") {
    std::vector<tda::DiagramPoint> diagram{
        {3.0, 1.0, false}, {2.0, 2.0, false}, {5.0, 0.5, true}};
    const auto proj = tda::project_diagram(diagram);
    REQUIRE(proj.size() == 2);
    CHECK(proj[0].x() == doctest::Approx(1.0));
    CHECK(proj[0].y() == doctest::Approx(2.0));
    CHECK(proj[1].x() == doctest::Approx(0.5));
    CHECK(proj[1].y() == doctest::Approx(4.5));
}

// ── wasserstein distance ────────────────────────────────────────────────────

TEST_CASE("single off-diagonal point against the empty diagram") {
    const std::vector<tda::DiagramPoint> a{{3.0, 1.0, false}};
    const std::vector<tda::DiagramPoint> empty;
    CHECK(tda::wasserstein_distance(a, empty, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tda::wasserstein_distance(empty, a, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tda::wasserstein_distance(empty, empty, 2.0) == doctest::Approx(0.0));
    CHECK_THROWS((void)tda::wasserstein_distance(a, empty, 0.5));
}

TEST_CASE("wasserstein agrees with brute-force matching on tiny diagrams") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(0, 3));
        const int m = static_cast<int>(rng.uniform_int(0, 3));
        std::vector<tda::DiagramPoint> a(n), b(m);
        for (auto& p : a) {
            p.death = rng.uniform(0.0, 2.0);
            p.birth = p.death + rng.uniform(0.0, 2.0);
        }
        for (auto& p : b) {
            p.death = rng.uniform(0.0, 2.0);
            p.birth = p.death + rng.uniform(0.0, 2.0);
        }
        for (const double p : {1.0, 2.0}) {
            const double lib = tda::wasserstein_distance(a, b, p);
            const double brute = oracles::wasserstein_brute(a, b, p);
            CHECK(lib == doctest::Approx(brute).epsilon(1e-9));
        }
        const double lib_b = tda::bottleneck_distance(a, b);
        const double brute_b = oracles::wasserstein_brute(a, b, 1.0, /*bottleneck=*/true);
        CHECK(lib_b == doctest::Approx(brute_b).epsilon(1e-9));
    }
}

TEST_CASE("wasserstein metric axioms on random diagram triples") {
    Rng rng(32);
    const auto random_diagram = [&rng](int max_pts) {
        std::vector<tda::DiagramPoint> d(rng.uniform_int(0, max_pts));
        for (auto& p : d) {
            p.death = rng.uniform(0.0, 3.0);
            p.birth = p.death + rng.uniform(0.0, 3.0);
        }
        return d;
    };
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_diagram(6), b = random_diagram(6), c = random_diagram(6);
        for (const double p : {1.0, 2.0}) {
            const double ab = tda::wasserstein_distance(a, b, p);
            const double ba = tda::wasserstein_distance(b, a, p);
            const double ac = tda::wasserstein_distance(a, c, p);
            const double cb = tda::wasserstein_distance(c, b, p);
            CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
            CHECK(ab <= ac + cb + 1e-9);
            CHECK(ab >= 0.0);
            CHECK(tda::wasserstein_distance(a, a, p) == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("bottleneck distance is stable under field perturbations") {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_field(rng, 12, 12);
        const double eps = rng.uniform(0.01, 0.1);
        Eigen::MatrixXd g = f;
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < 12; ++j) g(i, j) += rng.uniform(-eps, eps);
        }
        const auto df = tda::superlevel_persistence(f);
        const auto dg = tda::superlevel_persistence(g);
        CHECK(tda::bottleneck_distance(df.h0, dg.h0) <= eps + 1e-12);
        CHECK(tda::bottleneck_distance(df.h1, dg.h1) <= eps + 1e-12);
    }
}

// ── exports ─────────────────────────────────────────────────────────────────

TEST_CASE("diagram csv round trips and svg writers emit well-formed documents") {
    tda::PersistenceDiagram d;
    d.h0 = {{3.0, 1.0, false}, {5.0, 0.0, true}};
    d.h1 = {{2.0, 0.5, false}};
    const auto csv_path = temp_file("contagion_test_diagram.csv");
    tda::write_diagram_csv(d, csv_path.string());
    const auto back = tda::read_diagram_csv(csv_path.string());
    REQUIRE(back.h0.size() == 2);
    REQUIRE(back.h1.size() == 1);
    CHECK(back.h0[0].birth == doctest::Approx(3.0));
    CHECK(back.h1[0].death == doctest::Approx(0.5));
    std::filesystem::remove(csv_path);

    for (const auto* name : {"contagion_test_diagram.svg", "contagion_test_barcode.svg"}) {
        const auto path = temp_file(name);
        if (std::string(name).find("barcode") != std::string::npos) {
            tda::write_barcode_svg(d, path.string());
        } else {
            tda::write_diagram_svg(d, path.string());
        }
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(text.find("<svg") != std::string::npos);
        CHECK(text.find("</svg>") != std::string::npos);
        std::filesystem::remove(path);
    }
}
