#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contagion/graph_sim.hpp"
#include "contagion/market_data.hpp"

namespace contagion::filters {

struct FilterValues {
    int agent_id{0};
    int company_id{-1};  // -1 for the synthetic single-event setting
    double f1{0.0};
    double f2{0.0};
    bool f2_defined{true};  // false when the agent has an empty pre or non-pre side
    double z1{0.0};
    double z2{0.0};
    double composite{0.0};
};

struct StandardizeInfo {
    bool zero_variance_f1{false};
    bool zero_variance_f2{false};
};

// ── filter statistics ───────────────────────────────────────────────────────

// Count of pre-window entries with a strictly positive return.
[[nodiscard]] double profitability_count(std::span<const double> values,
                                         std::span<const std::uint8_t> pre_mask);

// Mean of the pre-window entries minus mean of the remaining entries. The
// caller passes executed transactions only; an agent with an empty side has
// no defined gap (nullopt) and drops out of the analysis.
[[nodiscard]] std::optional<double> pre_window_mean_gap(std::span<const double> values,
                                                        std::span<const std::uint8_t> pre_mask);

// ── batch computation ───────────────────────────────────────────────────────

[[nodiscard]] FilterValues compute_from_series(const market_data::AgentReturnSeries& series);

// One row per agent. Transactions are the nonzero cells; the first block of
// columns counts as the pre-announcement side.
[[nodiscard]] std::vector<FilterValues> compute_from_matrix(const graph_sim::ReturnMatrix& m);

// z-score both filters over the batch (population sd) and set the composite
// 0.5 z1 + 0.5 z2. A zero-variance filter yields z = 0 for everyone and is
// flagged. Requires >= 2 entries, all with f2 defined.
StandardizeInfo standardize_and_compose(std::vector<FilterValues>& batch);

// Descending composite; ties broken by (f1 descending, agent_id ascending).
void sort_by_composite(std::vector<FilterValues>& batch);

// ── CSV I/O ─────────────────────────────────────────────────────────────────

// `agent_id,company_id,f1,f2,z1,z2,composite`
void write_filters_csv(std::span<const FilterValues> batch, const std::string& path);
[[nodiscard]] std::vector<FilterValues> read_filters_csv(const std::string& path);

}  // namespace contagion::filters
