#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace contagion::mapper {

struct MapperConfig {
    int intervals{3};       // number of cover intervals |I|
    double overlap{0.25};   // fractional overlap p in [0, 1)
    int k{150};             // within-interval k-means clusters (capped at bin size)
    std::uint64_t seed{0};
    int kmeans_max_iters{100};
};

struct LevelSet {
    int index{0};
    double lo{0.0};
    double hi{0.0};
    bool closed_hi{false};        // last interval includes its upper bound
    std::vector<int> members;     // point indices, ascending
};

struct MapperNode {
    int node_id{0};
    int level_set{0};
    int cluster_id{0};
    std::vector<int> members;     // point indices, ascending
};

struct MapperGraph {
    std::vector<LevelSet> level_sets;
    std::vector<MapperNode> nodes;
    std::vector<std::pair<int, int>> edges;   // node id pairs, first < second
};

struct Subpopulation {
    std::vector<int> s1;          // survivors under the first filter
    std::vector<int> s2;          // survivors under the second filter
    std::vector<int> q;           // intersection s1 && s2: the flagged agents
    MapperGraph graph1;
    MapperGraph graph2;
    int target_level1{-1};
    int target_level2{-1};
    std::vector<int> removed_nodes1;  // soft clusters dropped from the target level
    std::vector<int> removed_nodes2;
};

// ── operations ──────────────────────────────────────────────────────────────

// Overlapping interval cover of [min, max]: base width w0 = range / intervals
// grows to w0 / (1 - p), centred on each base interval. Intervals are
// half-open [lo, hi) except the last, which closes at hi. A zero-width range
// degenerates to a single level set holding every point.
[[nodiscard]] std::vector<LevelSet> build_cover(std::span<const double> values,
                                                const MapperConfig& cfg);

// Cover the filter values, k-means each level set in the original point
// space, and connect clusters that share a point.
[[nodiscard]] MapperGraph build_mapper_graph(const Eigen::MatrixXd& points,
                                             std::span<const double> filter,
                                             const MapperConfig& cfg);

// Two-filter selection: per filter, take the level set with the highest mean
// composite score, drop its clusters that intersect a cluster of any other
// level set (soft clusters), and keep the union of the remaining members.
// The flagged set q is the intersection across the two filters.
[[nodiscard]] Subpopulation identify_subpopulation(const Eigen::MatrixXd& points,
                                                   std::span<const double> filter1,
                                                   std::span<const double> filter2,
                                                   std::span<const double> composite,
                                                   const MapperConfig& cfg);

// ── exports ─────────────────────────────────────────────────────────────────

// `node_id,level_set,size,member_ids` with ';'-separated member ids.
void write_nodes_csv(const MapperGraph& graph, const std::string& path);
// `source,target`
void write_edges_csv(const MapperGraph& graph, const std::string& path);
// Graphviz rendering of nodes (labelled level:size) and shared-member edges.
void write_dot(const MapperGraph& graph, const std::string& path);

}  // namespace contagion::mapper
