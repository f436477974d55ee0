#pragma once

// Independent reference implementations used only by tests. Each oracle takes
// a deliberately different route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "contagion/graph_sim.hpp"
#include "contagion/rng.hpp"
#include "contagion/tda.hpp"

namespace oracles {

// ── Student t tail via adaptive Simpson integration of the density ──────────

inline double t_density(double x, double nu) {
    const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * 3.141592653589793);
    return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, int depth = 0) {
    const double c = 0.5 * (a + b);
    const double h = b - a;
    const double fa = f(a), fb = f(b), fc = f(c);
    const double s = h / 6.0 * (fa + 4.0 * fc + fb);
    const double lc = 0.5 * (a + c), rc = 0.5 * (c + b);
    const double flc = f(lc), frc = f(rc);
    const double left = (c - a) / 6.0 * (fa + 4.0 * flc + fc);
    const double right = (b - c) / 6.0 * (fc + 4.0 * frc + fb);
    if (depth > 40 || std::fabs(left + right - s) < 15.0 * eps) {
        return left + right + (left + right - s) / 15.0;
    }
    return adaptive_simpson(f, a, c, 0.5 * eps, depth + 1) +
           adaptive_simpson(f, c, b, 0.5 * eps, depth + 1);
}

// P(T > t); integrates the density from 0 to |t| and uses symmetry.
inline double t_sf_oracle(double t, double nu) {
    const double body =
        adaptive_simpson([nu](double x) { return t_density(x, nu); }, 0.0, std::fabs(t), 1e-14);
    return t >= 0.0 ? 0.5 - body : 0.5 + body;
}

// ── exact binomial coefficients (Pascal's triangle, n <= 62) ────────────────

inline std::uint64_t choose_exact(int n, int k) {
    if (k < 0 || k > n) return 0;
    static std::vector<std::vector<std::uint64_t>> tri;
    if (tri.empty()) {
        tri.resize(63);
        for (int i = 0; i <= 62; ++i) {
            tri[i].assign(i + 1, 1);
            for (int j = 1; j < i; ++j) tri[i][j] = tri[i - 1][j - 1] + tri[i - 1][j];
        }
    }
    return tri[n][k];
}

// Hypergeometric right tail from exact integer counts.
inline double hypergeom_tail_oracle(int total, int a, int b, int k) {
    long double denom = static_cast<long double>(choose_exact(total, b));
    long double p = 0.0L;
    for (int i = k; i <= std::min(a, b); ++i) {
        const long double num = static_cast<long double>(choose_exact(a, i)) *
                                static_cast<long double>(choose_exact(total - a, b - i));
        p += num / denom;
    }
    return static_cast<double>(std::min(p, 1.0L));
}

// ── H0 superlevel persistence via union-find (elder rule) ───────────────────

struct H0Pair {
    double birth;
    double death;
    bool essential;
};

// Grid version; neighbors are the 4-connected lattice. Vertices are processed
// in decreasing value (ties: lower linear index first), exactly matching the
// library's filtration order for vertices.
inline std::vector<H0Pair> h0_union_find(const Eigen::MatrixXd& field) {
    const int rows = static_cast<int>(field.rows());
    const int cols = static_cast<int>(field.cols());
    const int n = rows * cols;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double va = field(a / cols, a % cols), vb = field(b / cols, b % cols);
        if (va != vb) return va > vb;
        return a < b;
    });
    std::vector<int> rank_of(n);
    for (int r = 0; r < n; ++r) rank_of[order[r]] = r;

    std::vector<int> parent(n, -1);  // -1: not yet added
    std::vector<int> birth(n, -1);   // representative -> birth vertex
    const auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    std::vector<H0Pair> pairs;
    const double global_min = field.minCoeff();
    for (const int v : order) {
        parent[v] = v;
        birth[v] = v;
        const int r = v / cols, c = v % cols;
        const int nbs[4] = {c > 0 ? v - 1 : -1, c + 1 < cols ? v + 1 : -1,
                            r > 0 ? v - cols : -1, r + 1 < rows ? v + cols : -1};
        for (const int u : nbs) {
            if (u < 0 || parent[u] == -1) continue;
            const int ru = find(u), rv = find(v);
            if (ru == rv) continue;
            // Elder rule: the component whose birth vertex entered later dies.
            const int elder = rank_of[birth[ru]] < rank_of[birth[rv]] ? ru : rv;
            const int young = elder == ru ? rv : ru;
            pairs.push_back({field(birth[young] / cols, birth[young] % cols),
                             field(r, c), false});
            parent[young] = elder;
        }
    }
    // Surviving roots are essential; their births are the component births.
    for (int v = 0; v < n; ++v) {
        if (parent[v] == v) {
            const int bv = birth[v];
            pairs.push_back({field(bv / cols, bv % cols), global_min, true});
        }
    }
    // Drop zero persistence except essential, mirroring the library contract.
    std::vector<H0Pair> out;
    for (const auto& p : pairs) {
        if (p.essential || p.birth != p.death) out.push_back(p);
    }
    return out;
}

// Multiset comparison helper for diagram points.
inline std::multiset<std::pair<double, double>> to_multiset(
    const std::vector<contagion::tda::DiagramPoint>& pts) {
    std::multiset<std::pair<double, double>> out;
    for (const auto& p : pts) out.insert({p.birth, p.death});
    return out;
}

inline std::multiset<std::pair<double, double>> to_multiset(const std::vector<H0Pair>& pts) {
    std::multiset<std::pair<double, double>> out;
    for (const auto& p : pts) out.insert({p.birth, p.death});
    return out;
}

// ── brute-force diagram distances (small inputs) ────────────────────────────

// Enumerates every assignment of the points of a to points of b or the
// diagonal (leftover b points also go to the diagonal).
inline double wasserstein_brute(const std::vector<contagion::tda::DiagramPoint>& a,
                                const std::vector<contagion::tda::DiagramPoint>& b, double p,
                                bool bottleneck = false) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const auto linf = [](const contagion::tda::DiagramPoint& x,
                         const contagion::tda::DiagramPoint& y) {
        return std::max(std::fabs(x.birth - y.birth), std::fabs(x.death - y.death));
    };
    const auto diag = [](const contagion::tda::DiagramPoint& x) {
        return std::fabs(x.birth - x.death) / 2.0;
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> used(m, 0);
    std::function<void(int, double)> rec = [&](int i, double acc) {
        if (acc >= best) return;
        if (i == n) {
            double total = acc;
            for (int j = 0; j < m; ++j) {
                if (!used[j]) {
                    total = bottleneck ? std::max(total, diag(b[j]))
                                       : total + std::pow(diag(b[j]), p);
                }
            }
            best = std::min(best, total);
            return;
        }
        for (int j = 0; j < m; ++j) {
            if (used[j]) continue;
            used[j] = 1;
            rec(i + 1, bottleneck ? std::max(acc, linf(a[i], b[j]))
                                  : acc + std::pow(linf(a[i], b[j]), p));
            used[j] = 0;
        }
        rec(i + 1,
            bottleneck ? std::max(acc, diag(a[i])) : acc + std::pow(diag(a[i]), p));
    };
    rec(0, 0.0);
    return bottleneck ? best : std::pow(best, 1.0 / p);
}

// ── live-edge cascade (pre-flipped coins keyed per directed edge) ───────────

// Distributionally identical to the sequential cascade; keyed coins make
// reachability monotone under edge additions, which the test exploits.
inline std::vector<std::uint8_t> live_edge_cascade(const contagion::graph_sim::SocialGraph& g,
                                                   const std::vector<contagion::graph_sim::AgentProfile>& profiles,
                                                   const std::vector<int>& seeds,
                                                   std::uint64_t master, std::uint64_t run) {
    std::vector<std::uint8_t> informed(g.n, 0);
    std::vector<int> stack;
    const auto coin = [&](int u, int v) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(u) << 32) ^ static_cast<std::uint64_t>(v) ^ (run * 0x9e37ULL);
        contagion::Rng r = contagion::Rng::substream(master, key);
        return r.uniform() < profiles[u].transmission_q;
    };
    for (const int s : seeds) {
        informed[s] = 1;
        stack.push_back(s);
    }
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const int v : g.out_neighbors[u]) {
            if (!informed[v] && coin(u, v)) {
                informed[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return informed;
}

}  // namespace oracles
