#include "contagion/mapper.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "contagion/kmeans.hpp"
#include "contagion/rng.hpp"

namespace contagion::mapper {

std::vector<LevelSet> build_cover(std::span<const double> values, const MapperConfig& cfg) {
    if (values.empty()) throw std::invalid_argument("build_cover: no values");
    if (cfg.intervals < 1) throw std::invalid_argument("build_cover: intervals must be >= 1");
    if (cfg.overlap < 0.0 || cfg.overlap >= 1.0) {
        throw std::invalid_argument("build_cover: overlap must be in [0, 1)");
    }
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const double vmin = *min_it, vmax = *max_it;

    std::vector<LevelSet> cover;
    if (vmin == vmax) {
        // Degenerate range: one level set holding everything.
        LevelSet ls;
        ls.index = 0;
        ls.lo = vmin;
        ls.hi = vmax;
        ls.closed_hi = true;
        for (int i = 0; i < static_cast<int>(values.size()); ++i) ls.members.push_back(i);
        cover.push_back(std::move(ls));
        return cover;
    }

    const double w0 = (vmax - vmin) / cfg.intervals;
    const double w = w0 / (1.0 - cfg.overlap);
    for (int i = 0; i < cfg.intervals; ++i) {
        LevelSet ls;
        ls.index = i;
        const double centre = vmin + (i + 0.5) * w0;
        ls.lo = centre - 0.5 * w;
        ls.hi = centre + 0.5 * w;
        ls.closed_hi = i == cfg.intervals - 1;
        // Rounding in the width arithmetic must never push the extreme values
        // outside the first or last interval.
        if (i == 0) ls.lo = std::min(ls.lo, vmin);
        if (ls.closed_hi) ls.hi = std::max(ls.hi, vmax);
        cover.push_back(std::move(ls));
    }
    for (int p = 0; p < static_cast<int>(values.size()); ++p) {
        const double v = values[p];
        for (auto& ls : cover) {
            const bool in = v >= ls.lo && (ls.closed_hi ? v <= ls.hi : v < ls.hi);
            if (in) ls.members.push_back(p);
        }
    }
    return cover;
}

MapperGraph build_mapper_graph(const Eigen::MatrixXd& points, std::span<const double> filter,
                               const MapperConfig& cfg) {
    if (points.rows() != static_cast<Eigen::Index>(filter.size())) {
        throw std::invalid_argument("build_mapper_graph: filter length != point count");
    }
    MapperGraph g;
    g.level_sets = build_cover(filter, cfg);

    int next_node = 0;
    for (const auto& ls : g.level_sets) {
        if (ls.members.empty()) continue;
        const int bin_n = static_cast<int>(ls.members.size());
        Eigen::MatrixXd bin(bin_n, points.cols());
        for (int i = 0; i < bin_n; ++i) bin.row(i) = points.row(ls.members[i]);
        const auto km = clustering::kmeans(
            bin, std::min(cfg.k, bin_n),
            Rng::substream(cfg.seed, static_cast<std::uint64_t>(ls.index)).raw(),
            clustering::KMeansInit::PlusPlus, cfg.kmeans_max_iters);
        const int k_eff = static_cast<int>(km.centroids.rows());
        std::vector<std::vector<int>> clusters(k_eff);
        for (int i = 0; i < bin_n; ++i) clusters[km.labels[i]].push_back(ls.members[i]);
        for (int c = 0; c < k_eff; ++c) {
            if (clusters[c].empty()) continue;
            MapperNode node;
            node.node_id = next_node++;
            node.level_set = ls.index;
            node.cluster_id = c;
            node.members = clusters[c];
            std::sort(node.members.begin(), node.members.end());
            g.nodes.push_back(std::move(node));
        }
    }

    // Edges: clusters sharing at least one point.
    std::vector<std::vector<int>> point_nodes(points.rows());
    for (const auto& node : g.nodes) {
        for (const int m : node.members) point_nodes[m].push_back(node.node_id);
    }
    std::set<std::pair<int, int>> edges;
    for (const auto& nodes : point_nodes) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < nodes.size(); ++j) {
                edges.insert({std::min(nodes[i], nodes[j]), std::max(nodes[i], nodes[j])});
            }
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

namespace {

struct FilterSelection {
    int target_level{-1};
    std::vector<int> removed;
    std::vector<int> survivors_members;
};

// Apply the soft-cluster rule to one filter's mapper graph.
FilterSelection select_survivors(const MapperGraph& g, std::span<const double> composite) {
    FilterSelection sel;

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& ls : g.level_sets) {
        if (ls.members.empty()) continue;
        double sum = 0.0;
        for (const int m : ls.members) sum += composite[m];
        const double mean = sum / static_cast<double>(ls.members.size());
        if (mean > best) {  // ties keep the earlier (lower-index) level set
            best = mean;
            sel.target_level = ls.index;
        }
    }
    if (sel.target_level < 0) return sel;

    std::vector<std::vector<int>> point_nodes;
    point_nodes.resize(composite.size());
    for (const auto& node : g.nodes) {
        for (const int m : node.members) point_nodes[m].push_back(node.node_id);
    }
    std::vector<const MapperNode*> by_id(g.nodes.size());
    for (const auto& node : g.nodes) by_id[node.node_id] = &node;

    std::set<int> member_set;
    for (const auto& node : g.nodes) {
        if (node.level_set != sel.target_level) continue;
        // Soft cluster: shares a point with a cluster of another level set.
        bool soft = false;
        for (const int m : node.members) {
            for (const int other : point_nodes[m]) {
                if (by_id[other]->level_set != sel.target_level) {
                    soft = true;
                    break;
                }
            }
            if (soft) break;
        }
        if (soft) {
            sel.removed.push_back(node.node_id);
        } else {
            member_set.insert(node.members.begin(), node.members.end());
        }
    }
    sel.survivors_members.assign(member_set.begin(), member_set.end());
    return sel;
}

}  // namespace

Subpopulation identify_subpopulation(const Eigen::MatrixXd& points,
                                     std::span<const double> filter1,
                                     std::span<const double> filter2,
                                     std::span<const double> composite,
                                     const MapperConfig& cfg) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (filter1.size() != n || filter2.size() != n || composite.size() != n) {
        throw std::invalid_argument("identify_subpopulation: input length mismatch");
    }
    if (n == 0) throw std::invalid_argument("identify_subpopulation: no points");

    MapperConfig cfg1 = cfg;
    cfg1.seed = Rng::substream(cfg.seed, 1).raw();
    MapperConfig cfg2 = cfg;
    cfg2.seed = Rng::substream(cfg.seed, 2).raw();

    Subpopulation sub;
    sub.graph1 = build_mapper_graph(points, filter1, cfg1);
    sub.graph2 = build_mapper_graph(points, filter2, cfg2);

    const auto sel1 = select_survivors(sub.graph1, composite);
    const auto sel2 = select_survivors(sub.graph2, composite);
    sub.target_level1 = sel1.target_level;
    sub.target_level2 = sel2.target_level;
    sub.removed_nodes1 = sel1.removed;
    sub.removed_nodes2 = sel2.removed;
    sub.s1 = sel1.survivors_members;
    sub.s2 = sel2.survivors_members;
    std::set_intersection(sub.s1.begin(), sub.s1.end(), sub.s2.begin(), sub.s2.end(),
                          std::back_inserter(sub.q));
    return sub;
}

// ── exports ─────────────────────────────────────────────────────────────────

void write_nodes_csv(const MapperGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_nodes_csv: cannot write '" + path + "'");
    out << "node_id,level_set,size,member_ids\n";
    for (const auto& node : graph.nodes) {
        out << node.node_id << ',' << node.level_set << ',' << node.members.size() << ',';
        for (std::size_t i = 0; i < node.members.size(); ++i) {
            if (i) out << ';';
            out << node.members[i];
        }
        out << '\n';
    }
}

void write_edges_csv(const MapperGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_edges_csv: cannot write '" + path + "'");
    out << "source,target\n";
    for (const auto& [a, b] : graph.edges) out << a << ',' << b << '\n';
}

void write_dot(const MapperGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dot: cannot write '" + path + "'");
    out << "graph mapper {\n  node [shape=circle];\n";
    for (const auto& node : graph.nodes) {
        out << "  n" << node.node_id << " [label=\"L" << node.level_set << ":"
            << node.members.size() << "\"];\n";
    }
    for (const auto& [a, b] : graph.edges) out << "  n" << a << " -- n" << b << ";\n";
    out << "}\n";
}

}  // namespace contagion::mapper
