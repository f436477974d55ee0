#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace contagion::clustering {

enum class KMeansInit { Random, PlusPlus };

struct KMeansResult {
    std::vector<int> labels;      // one entry per point
    Eigen::MatrixXd centroids;    // k x d
    double wcss{0.0};             // within-cluster sum of squared distances
    int iterations{0};
    bool converged{false};
};

// Lloyd iterations with deterministic tie-breaking: assignment ties go to the
// lowest centroid index, and an emptied cluster is re-seeded with the point
// farthest from its current centroid. k is capped at the number of points.
// With n_init > 1 the seeding/Lloyd cycle is restarted that many times and the
// solution with the lowest within-cluster sum of squares is kept.
[[nodiscard]] KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                                  KMeansInit init = KMeansInit::PlusPlus, int max_iters = 100,
                                  int n_init = 1);

}  // namespace contagion::clustering
