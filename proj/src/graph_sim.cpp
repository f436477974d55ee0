#include "contagion/graph_sim.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "contagion/csv.hpp"

namespace contagion::graph_sim {

const char* to_string(BehaviorClass b) {
    switch (b) {
        case BehaviorClass::Passive: return "passive";
        case BehaviorClass::Neutral: return "neutral";
        case BehaviorClass::Opportunistic: return "opportunistic";
    }
    return "passive";
}

BehaviorClass behavior_from_string(const std::string& s) {
    if (s == "passive") return BehaviorClass::Passive;
    if (s == "neutral") return BehaviorClass::Neutral;
    if (s == "opportunistic") return BehaviorClass::Opportunistic;
    throw std::invalid_argument("unknown behavior label: " + s);
}

bool SocialGraph::is_isolated(int node) const {
    return std::binary_search(isolated_ids.begin(), isolated_ids.end(), node);
}

namespace {

// Rebuild sorted adjacency and the isolated set from the edge list. The
// isolated set is every node outside the largest connected component.
void finalize(SocialGraph& g) {
    g.out_neighbors.assign(g.n, {});
    for (const auto& [u, v] : g.edges) {
        if (u < 0 || u >= g.n || v < 0 || v >= g.n) {
            throw std::invalid_argument("graph edge endpoint out of range");
        }
        g.out_neighbors[u].push_back(v);
    }
    for (auto& nb : g.out_neighbors) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    // Union-find over undirected reachability.
    std::vector<int> parent(g.n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<int> rank(g.n, 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
    };
    for (const auto& [u, v] : g.edges) unite(u, v);

    std::vector<int> comp_size(g.n, 0);
    for (int i = 0; i < g.n; ++i) ++comp_size[find(i)];
    int giant = 0;
    for (int i = 0; i < g.n; ++i) {
        if (comp_size[i] > comp_size[giant]) giant = i;
    }
    g.isolated_ids.clear();
    for (int i = 0; i < g.n; ++i) {
        if (find(i) != giant) g.isolated_ids.push_back(i);
    }
}

}  // namespace

SocialGraph generate_graph(int n_core, int n_isolated, int attach_param, std::uint64_t seed) {
    if (n_core < 2) throw std::invalid_argument("generate_graph: n_core must be >= 2");
    if (n_isolated < 0) throw std::invalid_argument("generate_graph: n_isolated must be >= 0");
    if (attach_param < 1) throw std::invalid_argument("generate_graph: attach_param must be >= 1");

    const int m = std::min(attach_param, n_core - 1);
    const int n_init = std::min(m + 1, n_core);

    SocialGraph g;
    g.n = n_core + n_isolated;

    std::set<std::pair<int, int>> undirected;
    auto add_link = [&](int a, int b) {
        if (a == b) return;
        undirected.insert({std::min(a, b), std::max(a, b)});
    };

    // Seed clique, then degree-proportional attachment by sampling from the
    // half-edge list.
    std::vector<int> half_edges;
    for (int i = 0; i < n_init; ++i) {
        for (int j = i + 1; j < n_init; ++j) {
            add_link(i, j);
            half_edges.push_back(i);
            half_edges.push_back(j);
        }
    }
    Rng rng = Rng::substream(seed, 0x6772'6170'68ULL);
    for (int v = n_init; v < n_core; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < std::min(m, v)) {
            const auto pick = half_edges[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(half_edges.size()) - 1))];
            targets.insert(pick);
        }
        for (const int t : targets) {
            add_link(v, t);
            half_edges.push_back(v);
            half_edges.push_back(t);
        }
    }

    for (const auto& [a, b] : undirected) {
        g.edges.emplace_back(a, b);
        g.edges.emplace_back(b, a);
    }
    std::sort(g.edges.begin(), g.edges.end());
    finalize(g);
    return g;
}

std::vector<AgentProfile> assign_profiles(const SocialGraph& graph, const ProfileRanges& ranges,
                                          std::uint64_t seed) {
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (ranges.fractions[i][j] < 0.0) {
                throw std::invalid_argument("assign_profiles: negative cell fraction");
            }
            total += ranges.fractions[i][j];
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("assign_profiles: cell fractions must sum to 1");
    }

    Rng rng = Rng::substream(seed, 0x70'726f'66ULL);
    std::vector<AgentProfile> profiles(graph.n);
    for (int a = 0; a < graph.n; ++a) {
        AgentProfile& p = profiles[a];
        if (graph.is_isolated(a)) {
            // Isolated agents never receive information; keep them in the
            // lowest cell so ground truth cannot mark them opportunistic.
            p.spread = SpreadClass::Q1;
            p.behavior = BehaviorClass::Passive;
        } else {
            const double u = rng.uniform();
            double acc = 0.0;
            int cell = 8;
            for (int c = 0; c < 9; ++c) {
                acc += ranges.fractions[c / 3][c % 3];
                if (u < acc) {
                    cell = c;
                    break;
                }
            }
            p.spread = static_cast<SpreadClass>(cell / 3);
            p.behavior = static_cast<BehaviorClass>(cell % 3);
        }
        const int si = static_cast<int>(p.spread);
        const int bi = static_cast<int>(p.behavior);
        p.transmission_q = rng.uniform(ranges.q_lo[si], ranges.q_hi[si]);
        p.trade_p = rng.uniform(ranges.p_lo[bi], ranges.p_hi[bi]);
    }
    return profiles;
}

std::vector<std::uint8_t> run_cascade(const SocialGraph& graph,
                                      const std::vector<AgentProfile>& profiles,
                                      const std::vector<int>& seeds, Rng& rng) {
    if (static_cast<int>(profiles.size()) != graph.n) {
        throw std::invalid_argument("run_cascade: profile count != node count");
    }
    std::vector<std::uint8_t> informed(graph.n, 0);
    std::vector<int> frontier;
    for (const int s : seeds) {
        if (s < 0 || s >= graph.n) throw std::invalid_argument("run_cascade: seed out of range");
        if (graph.is_isolated(s)) {
            throw std::invalid_argument("run_cascade: seed agent is isolated");
        }
        if (!informed[s]) {
            informed[s] = 1;
            frontier.push_back(s);
        }
    }
    std::sort(frontier.begin(), frontier.end());

    while (!frontier.empty()) {
        std::vector<int> next;
        for (const int u : frontier) {
            const double q = profiles[u].transmission_q;
            for (const int v : graph.out_neighbors[u]) {
                // One trial per outgoing edge of a newly informed agent; the
                // draw is consumed even when v already knows.
                const double r = rng.uniform();
                if (r < q && !informed[v]) {
                    informed[v] = 1;
                    next.push_back(v);
                }
            }
        }
        std::sort(next.begin(), next.end());
        frontier = std::move(next);
    }
    return informed;
}

ReturnMatrix simulate_returns(const SocialGraph& graph, const std::vector<AgentProfile>& profiles,
                              const CascadeConfig& cfg) {
    if (cfg.runs_per_block < 1) {
        throw std::invalid_argument("simulate_returns: runs_per_block must be >= 1");
    }
    if (cfg.informed_sd < 0.0 || cfg.baseline_sd < 0.0) {
        throw std::invalid_argument("simulate_returns: negative standard deviation");
    }
    if (cfg.seed_agents.empty()) {
        throw std::invalid_argument("simulate_returns: seed_agents must be non-empty");
    }
    if (static_cast<int>(profiles.size()) != graph.n) {
        throw std::invalid_argument("simulate_returns: profile count != node count");
    }

    const int n = graph.n;
    const int runs = cfg.runs_per_block;
    ReturnMatrix out;
    out.values = Eigen::MatrixXd::Zero(n, 2 * runs);
    out.runs_per_block = runs;
    out.informed.assign(static_cast<std::size_t>(n) * runs, 0);
    out.truth.resize(n);
    for (int a = 0; a < n; ++a) out.truth[a] = profiles[a].behavior;

    // Each run draws from its own substream, so the loop parallelizes without
    // changing results.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int r = 0; r < runs; ++r) {
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(r));
        const auto informed = run_cascade(graph, profiles, cfg.seed_agents, rng);
        for (int a = 0; a < n; ++a) {
            if (informed[a]) {
                out.informed[static_cast<std::size_t>(a) * runs + r] = 1;
                // Informed agents either act on the information or sit the
                // run out; only uninformed agents trade at the baseline rate.
                if (rng.uniform() < profiles[a].trade_p) {
                    out.values(a, r) = rng.normal(cfg.informed_mean, cfg.informed_sd);
                }
            } else if (rng.uniform() < cfg.p_uninformed) {
                out.values(a, r) = rng.normal(cfg.baseline_mean, cfg.baseline_sd);
            }
        }
    }

    // Baseline block: no cascade, everyone trades at the baseline rate.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int r = 0; r < runs; ++r) {
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(runs + r));
        for (int a = 0; a < n; ++a) {
            if (rng.uniform() < cfg.p_uninformed) {
                out.values(a, runs + r) = rng.normal(cfg.baseline_mean, cfg.baseline_sd);
            }
        }
    }
    return out;
}

// ── CSV I/O ─────────────────────────────────────────────────────────────────

void write_graph_csv(const SocialGraph& graph, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(graph.edges.size());
    for (const auto& [u, v] : graph.edges) {
        rows.push_back({std::to_string(u), std::to_string(v)});
    }
    csv::write_file(path, {"source", "target"}, rows);
}

SocialGraph read_graph_csv(const std::string& path, int n_total) {
    const auto t = csv::read_file(path);
    const int cs = t.require_column("source");
    const int ct = t.require_column("target");
    SocialGraph g;
    int max_id = -1;
    for (const auto& row : t.rows) {
        const int u = std::stoi(row[cs]);
        const int v = std::stoi(row[ct]);
        g.edges.emplace_back(u, v);
        max_id = std::max({max_id, u, v});
    }
    g.n = std::max(max_id + 1, n_total);
    if (g.n < 1) throw std::runtime_error("read_graph_csv: no nodes");
    std::sort(g.edges.begin(), g.edges.end());
    finalize(g);
    return g;
}

void write_return_matrix_csv(const ReturnMatrix& m, const std::string& path) {
    std::vector<std::string> header{"agent_id", "label"};
    for (int r = 1; r <= m.runs_per_block; ++r) header.push_back("r_pre_" + std::to_string(r));
    for (int r = 1; r <= m.runs_per_block; ++r) header.push_back("r_base_" + std::to_string(r));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(m.n_agents());
    for (int a = 0; a < m.n_agents(); ++a) {
        std::vector<std::string> row{std::to_string(a), to_string(m.truth[a])};
        for (int c = 0; c < m.values.cols(); ++c) row.push_back(csv::format_double(m.values(a, c)));
        rows.push_back(std::move(row));
    }
    csv::write_file(path, header, rows);
}

ReturnMatrix read_return_matrix_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const int ca = t.require_column("agent_id");
    const int cl = t.require_column("label");
    int pre_cols = 0, base_cols = 0;
    for (const auto& h : t.header) {
        if (h.rfind("r_pre_", 0) == 0) ++pre_cols;
        if (h.rfind("r_base_", 0) == 0) ++base_cols;
    }
    if (pre_cols == 0 || pre_cols != base_cols) {
        throw std::runtime_error("read_return_matrix_csv: malformed block columns");
    }
    const int first_value_col = t.column("r_pre_1");
    ReturnMatrix m;
    m.runs_per_block = pre_cols;
    m.values = Eigen::MatrixXd::Zero(static_cast<int>(t.rows.size()), 2 * pre_cols);
    m.truth.resize(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::stoul(t.rows[i][ca]) != i) {
            throw std::runtime_error("read_return_matrix_csv: agent ids must be 0..n-1 in order");
        }
        m.truth[i] = behavior_from_string(t.rows[i][cl]);
        for (int c = 0; c < 2 * pre_cols; ++c) {
            m.values(static_cast<int>(i), c) = std::stod(t.rows[i][first_value_col + c]);
        }
    }
    return m;
}

}  // namespace contagion::graph_sim
