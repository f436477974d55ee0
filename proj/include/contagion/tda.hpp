#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace contagion::tda {

// ── kernel density estimation ───────────────────────────────────────────────

// Isotropic Gaussian KDE: g(y) = 1 / (n (sqrt(2 pi) eta)^D)
//                                * sum_i exp(-||y - z_i||^2 / (2 eta^2)).
// One density per query row.
[[nodiscard]] std::vector<double> kde_evaluate(const Eigen::MatrixXd& cloud, double eta,
                                               const Eigen::MatrixXd& queries);

// log g(y), evaluated stably via log-sum-exp; usable where g underflows.
[[nodiscard]] std::vector<double> kde_log_evaluate(const Eigen::MatrixXd& cloud, double eta,
                                                   const Eigen::MatrixXd& queries);

// Rectangular sample of a KDE over a standardized 2-D cloud.
struct KdeField {
    std::vector<double> xs;     // grid coordinates, first axis
    std::vector<double> ys;     // grid coordinates, second axis
    Eigen::MatrixXd values;     // values(i, j) = density at (xs[i], ys[j])
    double eta{0.0};            // bandwidth actually used (standardized units)
};

// Standardize each axis to unit variance, pick the n^(-1/(D+4)) bandwidth
// scaled by bandwidth_scale, and sample the KDE on a res x res grid padded by
// 3 eta beyond the data range.
[[nodiscard]] KdeField build_kde_field(const Eigen::MatrixXd& cloud, int res = 64,
                                       double bandwidth_scale = 1.0);

// ── persistence ─────────────────────────────────────────────────────────────

struct DiagramPoint {
    double birth{0.0};   // superlevel filtration: birth >= death
    double death{0.0};
    bool essential{false};
};

struct PersistenceDiagram {
    std::vector<DiagramPoint> h0;  // connected components
    std::vector<DiagramPoint> h1;  // loops
};

// Superlevel-set persistence of a function sampled on a full rectangular grid
// (1 x n and n x 1 inputs give the 1-D complex). Cell values are vertex
// minima; the essential component dies at the grid minimum; zero-persistence
// non-essential pairs are discarded.
[[nodiscard]] PersistenceDiagram superlevel_persistence(const Eigen::MatrixXd& field);

// (death, persistence) pairs with persistence = birth - death > 0.
using ProjectedDiagram = std::vector<Eigen::Vector2d>;
[[nodiscard]] ProjectedDiagram project_diagram(std::span<const DiagramPoint> diagram);

// ── diagram distances ───────────────────────────────────────────────────────

// p-Wasserstein matching distance with L-infinity ground metric and diagonal
// augmentation, solved exactly; p must be >= 1.
[[nodiscard]] double wasserstein_distance(std::span<const DiagramPoint> a,
                                          std::span<const DiagramPoint> b, double p);

// p = infinity analogue via binary search over candidate costs.
[[nodiscard]] double bottleneck_distance(std::span<const DiagramPoint> a,
                                         std::span<const DiagramPoint> b);

// ── exports ─────────────────────────────────────────────────────────────────

// `dim,birth,death` with dim in {0, 1}.
void write_diagram_csv(const PersistenceDiagram& diagram, const std::string& path);
[[nodiscard]] PersistenceDiagram read_diagram_csv(const std::string& path);

// Scatter plot (H0 dots, H1 triangles, diagonal reference line).
void write_diagram_svg(const PersistenceDiagram& diagram, const std::string& path);
// Bars spanning [death, birth] per feature, H0 above H1.
void write_barcode_svg(const PersistenceDiagram& diagram, const std::string& path);

}  // namespace contagion::tda
