#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "contagion/tda.hpp"

namespace contagion::tda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double linf(const DiagramPoint& a, const DiagramPoint& b) {
    return std::max(std::fabs(a.birth - b.birth), std::fabs(a.death - b.death));
}

// Distance to the closest diagonal point under the L-infinity ground metric.
double diag_cost(const DiagramPoint& a) { return std::fabs(a.birth - a.death) / 2.0; }

// Exact linear assignment (Jonker-Volgenant style shortest augmenting paths).
// Returns the minimal total cost of a perfect matching on a square matrix.
double solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<std::uint8_t> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

// Perfect matching feasibility when only edges with cost <= limit are usable
// (Kuhn's augmenting paths on the same augmented structure).
bool matching_feasible(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b,
                       double limit) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int size = n + m;
    if (size == 0) return true;
    const double tol = limit * (1.0 + 1e-12) + 1e-300;
    auto allowed = [&](int i, int j) {
        const bool real_i = i < n, real_j = j < m;
        if (real_i && real_j) return linf(a[i], b[j]) <= tol;
        if (real_i) return diag_cost(a[i]) <= tol;
        if (real_j) return diag_cost(b[j]) <= tol;
        return true;  // diagonal to diagonal is free
    };
    std::vector<int> match_col(size, -1);
    std::vector<std::uint8_t> seen(size, 0);
    std::function<bool(int)> augment = [&](int i) -> bool {
        for (int j = 0; j < size; ++j) {
            if (seen[j] || !allowed(i, j)) continue;
            seen[j] = 1;
            if (match_col[j] < 0 || augment(match_col[j])) {
                match_col[j] = i;
                return true;
            }
        }
        return false;
    };
    for (int i = 0; i < size; ++i) {
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(i)) return false;
    }
    return true;
}

}  // namespace

double wasserstein_distance(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b,
                            double p) {
    if (p < 1.0 || !std::isfinite(p)) {
        throw std::invalid_argument("wasserstein_distance: p must be finite and >= 1");
    }
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    if (n == 0 && m == 0) return 0.0;
    const int size = n + m;
    std::vector<std::vector<double>> cost(size, std::vector<double>(size, 0.0));
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const bool real_i = i < n, real_j = j < m;
            double c = 0.0;
            if (real_i && real_j) {
                c = linf(a[i], b[j]);
            } else if (real_i) {
                c = diag_cost(a[i]);
            } else if (real_j) {
                c = diag_cost(b[j]);
            }
            cost[i][j] = std::pow(c, p);
        }
    }
    const double total = solve_assignment(cost);
    return std::pow(total, 1.0 / p);
}

double bottleneck_distance(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    if (n == 0 && m == 0) return 0.0;

    // Bottleneck values are realized among pairwise and diagonal costs.
    std::vector<double> candidates{0.0};
    for (int i = 0; i < n; ++i) {
        candidates.push_back(diag_cost(a[i]));
        for (int j = 0; j < m; ++j) candidates.push_back(linf(a[i], b[j]));
    }
    for (int j = 0; j < m; ++j) candidates.push_back(diag_cost(b[j]));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    int lo = 0, hi = static_cast<int>(candidates.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (matching_feasible(a, b, candidates[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return candidates[lo];
}

}  // namespace contagion::tda
