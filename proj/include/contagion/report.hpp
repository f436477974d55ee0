#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contagion/config.hpp"
#include "contagion/graph_sim.hpp"
#include "contagion/stats.hpp"

namespace contagion::report {

// ── evaluation ──────────────────────────────────────────────────────────────

struct EvaluationReport {
    int tp{0}, fp{0}, fn{0}, tn{0};
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> accuracy;

    [[nodiscard]] int predicted_positive() const { return tp + fp; }
};

// predicted holds ascending agent ids; truth holds one flag per agent.
// Metrics with an empty denominator stay unset.
[[nodiscard]] EvaluationReport evaluate(std::span<const int> predicted,
                                        std::span<const std::uint8_t> truth);

// P(overlap >= k) when drawing b of N items against a marked set of size a
// (hypergeometric right tail; Fisher's exact one-sided test).
[[nodiscard]] double fisher_overlap(int total, int size_a, int size_b, int overlap);

// ── diagram-distance summary ────────────────────────────────────────────────

// Paired comparison of diagram distances for suspected agents and matched
// reference agents.
struct DistanceSummary {
    int n_pairs{0};
    double mean_suspected{0.0};
    double mean_reference{0.0};
    stats::TTestResult suspected_nonzero;  // one-sample two-sided vs 0
    stats::TTestResult paired_greater;     // H_alt: suspected - reference > 0
};

[[nodiscard]] DistanceSummary distance_summary(std::span<const double> suspected,
                                               std::span<const double> reference);

// ── benchmark orchestration ─────────────────────────────────────────────────

struct MethodOutcome {
    std::string method;
    std::vector<int> predicted;   // ascending agent ids
    std::vector<double> scores;   // per-agent ranking score (composite or anomaly)
    EvaluationReport eval;
    double fisher_p{1.0};
    double runtime_sec{0.0};
};

struct BenchmarkResult {
    int n_agents{0};
    int n_truth_positive{0};
    std::vector<MethodOutcome> methods;
};

struct SimulationBundle {
    graph_sim::SocialGraph graph;
    std::vector<graph_sim::AgentProfile> profiles;
    graph_sim::CascadeConfig cascade;
    graph_sim::ReturnMatrix matrix;
};

// Build graph, profiles, seed agents and the return matrix from config keys
// (n_core, n_isolated, attach_param, seeds_per_company, runs, mu_base,
// p_uninformed, seed, ...).
[[nodiscard]] SimulationBundle simulate_from_config(const config::Config& cfg);

// Run the selected detection methods (config key `methods`, comma separated)
// against a simulated matrix and score them on the ground truth.
[[nodiscard]] BenchmarkResult run_benchmark(const graph_sim::ReturnMatrix& matrix,
                                            const config::Config& cfg);

// `method,predicted_positive,tp,fp,fn,precision,recall,f1,fisher_p,runtime_sec`
void write_metrics_csv(const BenchmarkResult& result, const std::string& path);
// `agent_id,method,predicted_positive,score`
void write_predictions_csv(const BenchmarkResult& result, const std::string& path);
// Aligned text table of the metric rows.
[[nodiscard]] std::string format_table(const BenchmarkResult& result);

// JSON run manifest: config entries, config hash, outputs written.
void write_manifest(const config::Config& cfg, std::span<const std::string> outputs,
                    const std::string& path);

}  // namespace contagion::report
