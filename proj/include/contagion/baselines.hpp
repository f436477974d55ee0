#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace contagion::baselines {

enum class Method { KMeans, KMeansPP, DBSCAN, HClustWard, KNNDist, LOF, IForest };

[[nodiscard]] const char* to_string(Method m);
[[nodiscard]] Method method_from_string(const std::string& s);
[[nodiscard]] bool is_clustering(Method m);

struct BaselineConfig {
    Method method{Method::KMeans};
    int k_clusters{3};            // k-means / Ward cut
    int kmeans_restarts{10};      // best-of-n seedings by within-cluster SS
    double dbscan_eps{0.08};
    int dbscan_min_pts{30};
    int knn_k{20};                // k for the k-NN distance score and LOF
    int iforest_trees{100};
    int iforest_subsample{256};
    double anomaly_fraction{0.12};  // share of points flagged by anomaly scores
    std::uint64_t seed{0};
};

struct ClusterResult {
    std::vector<int> labels;  // cluster id per point; -1 marks DBSCAN noise
    int n_clusters{0};
};

struct AnomalyResult {
    std::vector<double> scores;          // higher = more anomalous
    std::vector<std::uint8_t> flagged;   // top ceil(fraction * n) scores
};

// ── clustering ──────────────────────────────────────────────────────────────

[[nodiscard]] ClusterResult cluster(const Eigen::MatrixXd& points, const BaselineConfig& cfg);

// Deterministic DBSCAN: points visited in index order, closed eps-ball
// neighborhoods counting the point itself, border points joining the first
// cluster that reaches them.
[[nodiscard]] ClusterResult dbscan(const Eigen::MatrixXd& points, double eps, int min_pts);

// Agglomerative Ward (Lance-Williams nearest-neighbor chain) cut at k
// clusters; cluster ids ordered by smallest member index.
[[nodiscard]] ClusterResult hclust_ward(const Eigen::MatrixXd& points, int k);

// Among non-noise clusters, the one with the highest mean composite score
// (ties to the lower id); -1 when there is no cluster.
[[nodiscard]] int select_positive_cluster(const ClusterResult& clusters,
                                          std::span<const double> composite);

// Members of the selected positive cluster, ascending.
[[nodiscard]] std::vector<int> predicted_positive(const ClusterResult& clusters,
                                                  std::span<const double> composite);

// ── anomaly scores ──────────────────────────────────────────────────────────

[[nodiscard]] AnomalyResult anomaly_scores(const Eigen::MatrixXd& points,
                                           const BaselineConfig& cfg);

[[nodiscard]] std::vector<double> knn_distance_score(const Eigen::MatrixXd& points, int k);
[[nodiscard]] std::vector<double> lof_score(const Eigen::MatrixXd& points, int k);
[[nodiscard]] std::vector<double> iforest_score(const Eigen::MatrixXd& points, int trees,
                                                int subsample, std::uint64_t seed);

}  // namespace contagion::baselines
