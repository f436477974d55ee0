#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "contagion/rng.hpp"

namespace contagion::graph_sim {

// ── types ───────────────────────────────────────────────────────────────────

enum class SpreadClass { Q1 = 0, Q2 = 1, Q3 = 2 };
enum class BehaviorClass { Passive = 0, Neutral = 1, Opportunistic = 2 };

[[nodiscard]] const char* to_string(BehaviorClass b);
[[nodiscard]] BehaviorClass behavior_from_string(const std::string& s);

// Directed social graph; every undirected link is stored in both orientations.
struct SocialGraph {
    int n{0};
    std::vector<std::pair<int, int>> edges;        // directed pairs (source, target)
    std::vector<std::vector<int>> out_neighbors;   // sorted adjacency per node
    std::vector<int> isolated_ids;                 // no path to the giant component

    [[nodiscard]] bool is_isolated(int node) const;
};

// Per-agent information-spread and trading profile.
struct AgentProfile {
    SpreadClass spread{SpreadClass::Q1};
    BehaviorClass behavior{BehaviorClass::Passive};
    double transmission_q{0.0};   // per-edge probability of passing information on
    double trade_p{0.0};          // probability of trading when informed
};

// Sampling ranges for profiles: three spread classes, three behavior classes,
// and the joint cell fractions used to draw (spread, behavior) pairs.
struct ProfileRanges {
    double q_lo[3]{0.0, 0.2, 0.4};
    double q_hi[3]{0.2, 0.4, 0.6};
    double p_lo[3]{0.0, 0.3, 0.5};
    double p_hi[3]{0.4, 0.6, 0.8};
    // fractions[spread][behavior]; entries must sum to 1.
    double fractions[3][3]{{0.25, 0.10, 0.05},
                           {0.15, 0.20, 0.10},
                           {0.05, 0.07, 0.03}};
};

struct CascadeConfig {
    ProfileRanges ranges{};
    double informed_mean{0.003};    // return distribution for informed trades
    double informed_sd{0.0015};
    double baseline_mean{0.0005};   // return distribution for ordinary trades
    double baseline_sd{0.0015};
    double p_uninformed{0.5};       // trade probability when not informed
    int runs_per_block{1000};       // cascades per block; matrix has two blocks
    std::uint64_t seed{0};
    std::vector<int> seed_agents;   // initially informed agents, one company
};

// Agents x (2 * runs_per_block) returns: an information-event block followed
// by a baseline block. A zero entry means the agent did not trade in that run.
struct ReturnMatrix {
    Eigen::MatrixXd values;
    int runs_per_block{0};
    std::vector<BehaviorClass> truth;
    // informed[a * runs_per_block + r] != 0 iff agent a was informed in run r
    // of the first block.
    std::vector<std::uint8_t> informed;

    [[nodiscard]] int n_agents() const { return static_cast<int>(values.rows()); }
};

// ── operations ──────────────────────────────────────────────────────────────

// Preferential-attachment core of n_core nodes (each new node attaches
// attach_param links to existing nodes with probability proportional to
// degree), symmetrized, plus n_isolated isolated nodes appended at the end.
[[nodiscard]] SocialGraph generate_graph(int n_core, int n_isolated, int attach_param,
                                         std::uint64_t seed);

// Draw one profile per agent. Connected agents draw a (spread, behavior) cell
// from ranges.fractions; isolated agents are fixed to (Q1, Passive) so ground
// truth never marks them opportunistic.
[[nodiscard]] std::vector<AgentProfile> assign_profiles(const SocialGraph& graph,
                                                        const ProfileRanges& ranges,
                                                        std::uint64_t seed);

// Single independent cascade: every newly informed agent tries each outgoing
// edge exactly once, and edge (i, j) transmits iff a uniform draw r < q_i.
// Returns one flag per node.
[[nodiscard]] std::vector<std::uint8_t> run_cascade(const SocialGraph& graph,
                                                    const std::vector<AgentProfile>& profiles,
                                                    const std::vector<int>& seeds, Rng& rng);

// Two blocks of runs_per_block cascades/returns; identical seed gives a
// bit-identical matrix.
[[nodiscard]] ReturnMatrix simulate_returns(const SocialGraph& graph,
                                            const std::vector<AgentProfile>& profiles,
                                            const CascadeConfig& cfg);

// ── CSV I/O ─────────────────────────────────────────────────────────────────

// Edge list `source,target`. Isolated nodes carry no rows; readers that need
// them must pass the total node count.
void write_graph_csv(const SocialGraph& graph, const std::string& path);
[[nodiscard]] SocialGraph read_graph_csv(const std::string& path, int n_total = -1);

// `agent_id,label,r_pre_1..,r_base_1..`
void write_return_matrix_csv(const ReturnMatrix& m, const std::string& path);
[[nodiscard]] ReturnMatrix read_return_matrix_csv(const std::string& path);

}  // namespace contagion::graph_sim
