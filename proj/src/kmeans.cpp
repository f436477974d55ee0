#include "contagion/kmeans.hpp"

#include <limits>
#include <stdexcept>

#include "contagion/rng.hpp"

namespace contagion::clustering {

namespace {

// Squared distances of every point to every centroid via the expansion
// ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; keeps the inner loop a GEMM.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids) {
    const Eigen::VectorXd xs = points.rowwise().squaredNorm();
    const Eigen::VectorXd cs = centroids.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * (points * centroids.transpose());
    d.colwise() += xs;
    d.rowwise() += cs.transpose();
    return d.cwiseMax(0.0);
}

KMeansResult kmeans_once(const Eigen::MatrixXd& points, int k, Rng& rng, KMeansInit init,
                         int max_iters) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());

    Eigen::MatrixXd centroids(k, d);
    if (init == KMeansInit::Random) {
        // k distinct point indices.
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int j = 0; j < k; ++j) {
            const int pick = static_cast<int>(rng.uniform_int(j, n - 1));
            std::swap(pool[j], pool[pick]);
            centroids.row(j) = points.row(pool[j]);
        }
    } else {
        // k-means++: D^2-weighted seeding.
        const int first = static_cast<int>(rng.uniform_int(0, n - 1));
        centroids.row(0) = points.row(first);
        Eigen::VectorXd best =
            (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
        for (int j = 1; j < k; ++j) {
            const double total = best.sum();
            int pick = 0;
            if (total > 0.0) {
                const double target = rng.uniform() * total;
                double acc = 0.0;
                pick = n - 1;
                for (int i = 0; i < n; ++i) {
                    acc += best(i);
                    if (target < acc) {
                        pick = i;
                        break;
                    }
                }
            } else {
                // All remaining mass at distance zero: fall back to uniform.
                pick = static_cast<int>(rng.uniform_int(0, n - 1));
            }
            centroids.row(j) = points.row(pick);
            best = best.cwiseMin(
                (points.rowwise() - centroids.row(j)).rowwise().squaredNorm());
        }
    }

    KMeansResult res;
    res.labels.assign(n, -1);
    std::vector<int> counts(k, 0);
    for (int iter = 1; iter <= max_iters; ++iter) {
        res.iterations = iter;
        const Eigen::MatrixXd d2 = squared_distances(points, centroids);
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            int arg = 0;
            double best_d = d2(i, 0);
            for (int j = 1; j < k; ++j) {
                if (d2(i, j) < best_d) {
                    best_d = d2(i, j);
                    arg = j;
                }
            }
            if (arg != res.labels[i]) {
                res.labels[i] = arg;
                changed = true;
            }
            ++counts[arg];
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
        for (int i = 0; i < n; ++i) sums.row(res.labels[i]) += points.row(i);
        std::vector<std::uint8_t> stolen(n, 0);
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) {
                centroids.row(j) = sums.row(j) / counts[j];
                continue;
            }
            // Re-seed an empty cluster with the farthest unstolen point.
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (stolen[i] || counts[res.labels[i]] <= 1) continue;
                if (d2(i, res.labels[i]) > far_d) {
                    far_d = d2(i, res.labels[i]);
                    far = i;
                }
            }
            if (far >= 0) {
                stolen[far] = 1;
                --counts[res.labels[far]];
                sums.row(res.labels[far]) -= points.row(far);
                centroids.row(res.labels[far]) =
                    sums.row(res.labels[far]) / std::max(counts[res.labels[far]], 1);
                res.labels[far] = j;
                counts[j] = 1;
                centroids.row(j) = points.row(far);
                changed = true;
            } else {
                // Nothing to steal (duplicate points); keep the old centroid.
                centroids.row(j) = points.row(0);
            }
        }

        if (!changed) {
            res.converged = true;
            break;
        }
    }

    const Eigen::MatrixXd d2 = squared_distances(points, centroids);
    res.wcss = 0.0;
    for (int i = 0; i < n; ++i) res.wcss += d2(i, res.labels[i]);
    res.centroids = std::move(centroids);
    return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, KMeansInit init,
                    int max_iters, int n_init) {
    const int n = static_cast<int>(points.rows());
    if (n < 1) throw std::invalid_argument("kmeans: no points");
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be >= 1");
    if (n_init < 1) throw std::invalid_argument("kmeans: n_init must be >= 1");
    k = std::min(k, n);

    KMeansResult best;
    for (int r = 0; r < n_init; ++r) {
        Rng rng = Rng::substream(seed, 0x6b'6d'65'61'6eULL + static_cast<std::uint64_t>(r));
        KMeansResult res = kmeans_once(points, k, rng, init, max_iters);
        // Strict comparison keeps the earliest restart on ties.
        if (r == 0 || res.wcss < best.wcss) best = std::move(res);
    }
    return best;
}

}  // namespace contagion::clustering
