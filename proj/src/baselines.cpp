#include "contagion/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "contagion/kmeans.hpp"
#include "contagion/rng.hpp"

namespace contagion::baselines {

const char* to_string(Method m) {
    switch (m) {
        case Method::KMeans: return "kmeans";
        case Method::KMeansPP: return "kmeans++";
        case Method::DBSCAN: return "dbscan";
        case Method::HClustWard: return "hclust";
        case Method::KNNDist: return "knn";
        case Method::LOF: return "lof";
        case Method::IForest: return "iforest";
    }
    return "kmeans";
}

Method method_from_string(const std::string& s) {
    if (s == "kmeans") return Method::KMeans;
    if (s == "kmeans++" || s == "kmeanspp") return Method::KMeansPP;
    if (s == "dbscan") return Method::DBSCAN;
    if (s == "hclust" || s == "ward") return Method::HClustWard;
    if (s == "knn") return Method::KNNDist;
    if (s == "lof") return Method::LOF;
    if (s == "iforest") return Method::IForest;
    throw std::invalid_argument("unknown baseline method: " + s);
}

bool is_clustering(Method m) {
    return m == Method::KMeans || m == Method::KMeansPP || m == Method::DBSCAN ||
           m == Method::HClustWard;
}

namespace {

Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& p) {
    const Eigen::VectorXd sq = p.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * (p * p.transpose());
    d.colwise() += sq;
    d.rowwise() += sq.transpose();
    return d.cwiseMax(0.0);
}

}  // namespace

// ── clustering ──────────────────────────────────────────────────────────────

ClusterResult cluster(const Eigen::MatrixXd& points, const BaselineConfig& cfg) {
    switch (cfg.method) {
        case Method::KMeans: {
            const auto km = clustering::kmeans(points, cfg.k_clusters, cfg.seed,
                                               clustering::KMeansInit::Random, 100,
                                               cfg.kmeans_restarts);
            ClusterResult r;
            r.labels = km.labels;
            r.n_clusters = static_cast<int>(km.centroids.rows());
            return r;
        }
        case Method::KMeansPP: {
            const auto km = clustering::kmeans(points, cfg.k_clusters, cfg.seed,
                                               clustering::KMeansInit::PlusPlus, 100,
                                               cfg.kmeans_restarts);
            ClusterResult r;
            r.labels = km.labels;
            r.n_clusters = static_cast<int>(km.centroids.rows());
            return r;
        }
        case Method::DBSCAN:
            return dbscan(points, cfg.dbscan_eps, cfg.dbscan_min_pts);
        case Method::HClustWard:
            return hclust_ward(points, cfg.k_clusters);
        default:
            throw std::invalid_argument("cluster: not a clustering method");
    }
}

ClusterResult dbscan(const Eigen::MatrixXd& points, double eps, int min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
    const int n = static_cast<int>(points.rows());
    if (n == 0) throw std::invalid_argument("dbscan: no points");

    const Eigen::MatrixXd d2 = pairwise_sq_dist(points);
    const double eps2 = eps * eps;
    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (d2(i, j) <= eps2) neighbors[i].push_back(j);  // includes i itself
        }
    }

    ClusterResult r;
    r.labels.assign(n, -1);
    std::vector<std::uint8_t> visited(n, 0);
    for (int i = 0; i < n; ++i) {
        if (visited[i]) continue;
        if (static_cast<int>(neighbors[i].size()) < min_pts) continue;  // not core
        const int cid = r.n_clusters++;
        // Breadth-first expansion in index order.
        std::queue<int> frontier;
        visited[i] = 1;
        r.labels[i] = cid;
        frontier.push(i);
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop();
            if (static_cast<int>(neighbors[u].size()) < min_pts) continue;  // border point
            for (const int v : neighbors[u]) {
                if (r.labels[v] == -1) r.labels[v] = cid;  // claim noise/border
                if (!visited[v]) {
                    visited[v] = 1;
                    frontier.push(v);
                }
            }
        }
    }
    return r;
}

ClusterResult hclust_ward(const Eigen::MatrixXd& points, int k) {
    const int n = static_cast<int>(points.rows());
    if (n == 0) throw std::invalid_argument("hclust_ward: no points");
    if (k < 1) throw std::invalid_argument("hclust_ward: k must be >= 1");
    k = std::min(k, n);

    // Lance-Williams on squared Euclidean distances with Ward coefficients.
    Eigen::MatrixXd d = pairwise_sq_dist(points);
    std::vector<int> size(n, 1);
    std::vector<std::uint8_t> active(n, 1);
    std::vector<int> owner(n);  // cluster id each point currently belongs to
    std::iota(owner.begin(), owner.end(), 0);

    auto nearest = [&](int i) {
        int arg = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            if (d(i, j) < best) {
                best = d(i, j);
                arg = j;
            }
        }
        return arg;
    };

    int remaining = n;
    std::vector<int> chain;
    while (remaining > k) {
        if (chain.empty()) {
            for (int i = 0; i < n; ++i) {
                if (active[i]) {
                    chain.push_back(i);
                    break;
                }
            }
        }
        // Grow the nearest-neighbor chain until a reciprocal pair appears.
        while (true) {
            const int tip = chain.back();
            const int nn = nearest(tip);
            if (chain.size() >= 2 && nn == chain[chain.size() - 2]) break;
            chain.push_back(nn);
        }
        int a = chain.back();
        chain.pop_back();
        int b = chain.back();
        chain.pop_back();
        if (a > b) std::swap(a, b);  // merge into the lower index

        // Ward update for every other active cluster.
        const double dab = d(a, b);
        for (int c = 0; c < n; ++c) {
            if (!active[c] || c == a || c == b) continue;
            const double na = size[a], nb = size[b], nc = size[c];
            d(a, c) = d(c, a) =
                ((na + nc) * d(a, c) + (nb + nc) * d(b, c) - nc * dab) / (na + nb + nc);
        }
        size[a] += size[b];
        active[b] = 0;
        for (int p = 0; p < n; ++p) {
            if (owner[p] == b) owner[p] = a;
        }
        --remaining;
    }

    // Renumber surviving clusters by smallest member index.
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) {
        if (active[i]) ids.push_back(i);
    }
    std::sort(ids.begin(), ids.end());
    std::vector<int> remap(n, -1);
    for (std::size_t c = 0; c < ids.size(); ++c) remap[ids[c]] = static_cast<int>(c);
    ClusterResult r;
    r.n_clusters = static_cast<int>(ids.size());
    r.labels.resize(n);
    for (int p = 0; p < n; ++p) r.labels[p] = remap[owner[p]];
    return r;
}

int select_positive_cluster(const ClusterResult& clusters, std::span<const double> composite) {
    if (clusters.labels.size() != composite.size()) {
        throw std::invalid_argument("select_positive_cluster: size mismatch");
    }
    std::vector<double> sum(clusters.n_clusters, 0.0);
    std::vector<int> count(clusters.n_clusters, 0);
    for (std::size_t i = 0; i < clusters.labels.size(); ++i) {
        const int c = clusters.labels[i];
        if (c < 0) continue;
        sum[c] += composite[i];
        ++count[c];
    }
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < clusters.n_clusters; ++c) {
        if (count[c] == 0) continue;
        const double mean = sum[c] / count[c];
        if (mean > best_mean) {  // ties keep the lower cluster id
            best_mean = mean;
            best = c;
        }
    }
    return best;
}

std::vector<int> predicted_positive(const ClusterResult& clusters,
                                    std::span<const double> composite) {
    const int sel = select_positive_cluster(clusters, composite);
    std::vector<int> out;
    if (sel < 0) return out;
    for (std::size_t i = 0; i < clusters.labels.size(); ++i) {
        if (clusters.labels[i] == sel) out.push_back(static_cast<int>(i));
    }
    return out;
}

// ── anomaly scores ──────────────────────────────────────────────────────────

namespace {

// Sorted distances (ascending, self excluded) from each point.
std::vector<std::vector<double>> sorted_neighbor_distances(const Eigen::MatrixXd& points) {
    const int n = static_cast<int>(points.rows());
    const Eigen::MatrixXd d2 = pairwise_sq_dist(points);
    std::vector<std::vector<double>> out(n);
    for (int i = 0; i < n; ++i) {
        out[i].reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j != i) out[i].push_back(std::sqrt(d2(i, j)));
        }
        std::sort(out[i].begin(), out[i].end());
    }
    return out;
}

double harmonic(int n) {
    double h = 0.0;
    for (int i = 1; i <= n; ++i) h += 1.0 / i;
    return h;
}

// Average unsuccessful-search path length in a binary search tree of n items.
double avg_path_length(int n) {
    if (n <= 1) return 0.0;
    return 2.0 * harmonic(n - 1) - 2.0 * (n - 1.0) / n;
}

struct IForestNode {
    int feature{-1};
    double threshold{0.0};
    int left{-1}, right{-1};
    int size{0};  // external node size
};

}  // namespace

std::vector<double> knn_distance_score(const Eigen::MatrixXd& points, int k) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) throw std::invalid_argument("knn_distance_score: need >= 2 points");
    if (k < 1) throw std::invalid_argument("knn_distance_score: k must be >= 1");
    k = std::min(k, n - 1);
    const auto nb = sorted_neighbor_distances(points);
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) score[i] = nb[i][k - 1];
    return score;
}

std::vector<double> lof_score(const Eigen::MatrixXd& points, int k) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) throw std::invalid_argument("lof_score: need >= 2 points");
    if (k < 1) throw std::invalid_argument("lof_score: k must be >= 1");
    k = std::min(k, n - 1);

    const Eigen::MatrixXd d2 = pairwise_sq_dist(points);
    std::vector<std::vector<int>> knn(n);          // k-distance neighborhoods
    std::vector<double> k_dist(n);
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> order;
        order.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j != i) order.emplace_back(std::sqrt(d2(i, j)), j);
        }
        std::sort(order.begin(), order.end());
        k_dist[i] = order[k - 1].first;
        // Neighborhood holds everything within the k-distance (ties included).
        for (const auto& [dist, j] : order) {
            if (dist > k_dist[i]) break;
            knn[i].push_back(j);
        }
    }

    constexpr double kFloor = 1e-12;  // guards duplicates from dividing by zero
    std::vector<double> lrd(n);
    for (int i = 0; i < n; ++i) {
        double reach_sum = 0.0;
        for (const int j : knn[i]) {
            reach_sum += std::max(k_dist[j], std::sqrt(d2(i, j)));
        }
        lrd[i] = static_cast<double>(knn[i].size()) / std::max(reach_sum, kFloor);
    }
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) {
        double ratio_sum = 0.0;
        for (const int j : knn[i]) ratio_sum += lrd[j] / std::max(lrd[i], kFloor);
        score[i] = ratio_sum / static_cast<double>(knn[i].size());
    }
    return score;
}

std::vector<double> iforest_score(const Eigen::MatrixXd& points, int trees, int subsample,
                                  std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    const int dims = static_cast<int>(points.cols());
    if (n < 2) throw std::invalid_argument("iforest_score: need >= 2 points");
    if (trees < 1 || subsample < 2) {
        throw std::invalid_argument("iforest_score: invalid forest parameters");
    }
    const int psi = std::min(subsample, n);
    const int height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));

    std::vector<double> path_sum(n, 0.0);
    for (int t = 0; t < trees; ++t) {
        Rng rng = Rng::substream(seed, 0x1f0'0000ULL + static_cast<std::uint64_t>(t));
        // Subsample without replacement.
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < psi; ++i) {
            const int pick = static_cast<int>(rng.uniform_int(i, n - 1));
            std::swap(pool[i], pool[pick]);
        }
        std::vector<int> sample(pool.begin(), pool.begin() + psi);

        // Build the isolation tree.
        std::vector<IForestNode> tree;
        struct Item {
            std::vector<int> idx;
            int depth;
            int slot;
        };
        std::vector<Item> stack;
        tree.push_back({});
        stack.push_back({std::move(sample), 0, 0});
        while (!stack.empty()) {
            Item item = std::move(stack.back());
            stack.pop_back();
            double lo = 0.0, hi = 0.0;
            int feature = -1;
            if (static_cast<int>(item.idx.size()) > 1 && item.depth < height_limit) {
                // Pick a feature with spread, if any.
                const int start = static_cast<int>(rng.uniform_int(0, dims - 1));
                for (int off = 0; off < dims; ++off) {
                    const int f = (start + off) % dims;
                    double mn = points(item.idx[0], f), mx = mn;
                    for (const int i : item.idx) {
                        mn = std::min(mn, points(i, f));
                        mx = std::max(mx, points(i, f));
                    }
                    if (mx > mn) {
                        feature = f;
                        lo = mn;
                        hi = mx;
                        break;
                    }
                }
            }
            if (feature < 0) {
                tree[item.slot].size = static_cast<int>(item.idx.size());
                continue;
            }
            const double threshold = rng.uniform(lo, hi);
            std::vector<int> left, right;
            for (const int i : item.idx) {
                (points(i, feature) < threshold ? left : right).push_back(i);
            }
            // push_back may reallocate, so fill in the parent only afterwards.
            const int left_slot = static_cast<int>(tree.size());
            tree.push_back({});
            const int right_slot = static_cast<int>(tree.size());
            tree.push_back({});
            IForestNode& node = tree[item.slot];
            node.feature = feature;
            node.threshold = threshold;
            node.left = left_slot;
            node.right = right_slot;
            stack.push_back({std::move(left), item.depth + 1, left_slot});
            stack.push_back({std::move(right), item.depth + 1, right_slot});
        }

        for (int i = 0; i < n; ++i) {
            int cur = 0, depth = 0;
            while (tree[cur].feature >= 0) {
                cur = points(i, tree[cur].feature) < tree[cur].threshold ? tree[cur].left
                                                                        : tree[cur].right;
                ++depth;
            }
            path_sum[i] += depth + avg_path_length(tree[cur].size);
        }
    }

    const double norm = avg_path_length(psi);
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) {
        score[i] = std::pow(2.0, -path_sum[i] / trees / std::max(norm, 1e-12));
    }
    return score;
}

AnomalyResult anomaly_scores(const Eigen::MatrixXd& points, const BaselineConfig& cfg) {
    AnomalyResult r;
    switch (cfg.method) {
        case Method::KNNDist:
            r.scores = knn_distance_score(points, cfg.knn_k);
            break;
        case Method::LOF:
            r.scores = lof_score(points, cfg.knn_k);
            break;
        case Method::IForest:
            r.scores = iforest_score(points, cfg.iforest_trees, cfg.iforest_subsample, cfg.seed);
            break;
        default:
            throw std::invalid_argument("anomaly_scores: not an anomaly method");
    }
    const int n = static_cast<int>(r.scores.size());
    const int flag_n =
        std::min(n, static_cast<int>(std::ceil(cfg.anomaly_fraction * n)));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (r.scores[a] != r.scores[b]) return r.scores[a] > r.scores[b];
        return a < b;
    });
    r.flagged.assign(n, 0);
    for (int i = 0; i < flag_n; ++i) r.flagged[order[i]] = 1;
    return r;
}

}  // namespace contagion::baselines
