#include "contagion/filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "contagion/csv.hpp"
#include "contagion/stats.hpp"

namespace contagion::filters {

double profitability_count(std::span<const double> values,
                           std::span<const std::uint8_t> pre_mask) {
    if (values.size() != pre_mask.size()) {
        throw std::invalid_argument("profitability_count: mask size mismatch");
    }
    double count = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (pre_mask[i] && values[i] > 0.0) count += 1.0;
    }
    return count;
}

std::optional<double> pre_window_mean_gap(std::span<const double> values,
                                          std::span<const std::uint8_t> pre_mask) {
    if (values.size() != pre_mask.size()) {
        throw std::invalid_argument("pre_window_mean_gap: mask size mismatch");
    }
    double pre_sum = 0.0, non_sum = 0.0;
    std::size_t pre_n = 0, non_n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (pre_mask[i]) {
            pre_sum += values[i];
            ++pre_n;
        } else {
            non_sum += values[i];
            ++non_n;
        }
    }
    if (pre_n == 0 || non_n == 0) return std::nullopt;
    return pre_sum / static_cast<double>(pre_n) - non_sum / static_cast<double>(non_n);
}

FilterValues compute_from_series(const market_data::AgentReturnSeries& series) {
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    values.reserve(series.days.size());
    mask.reserve(series.days.size());
    for (const auto& d : series.days) {
        values.push_back(d.ret);
        mask.push_back(d.is_pre ? 1 : 0);
    }
    FilterValues out;
    out.agent_id = series.agent_id;
    out.company_id = series.company_id;
    out.f1 = profitability_count(values, mask);
    const auto gap = pre_window_mean_gap(values, mask);
    out.f2_defined = gap.has_value();
    out.f2 = gap.value_or(0.0);
    return out;
}

std::vector<FilterValues> compute_from_matrix(const graph_sim::ReturnMatrix& m) {
    const int cols = static_cast<int>(m.values.cols());
    std::vector<FilterValues> out;
    out.reserve(m.n_agents());
    // Non-trade cells are exact zeros; the filters run over executed
    // transactions, so collect the nonzero cells per agent.
    std::vector<double> tx;
    std::vector<std::uint8_t> tx_pre;
    for (int a = 0; a < m.n_agents(); ++a) {
        tx.clear();
        tx_pre.clear();
        for (int c = 0; c < cols; ++c) {
            const double v = m.values(a, c);
            if (v != 0.0) {
                tx.push_back(v);
                tx_pre.push_back(c < m.runs_per_block ? 1 : 0);
            }
        }
        FilterValues fv;
        fv.agent_id = a;
        fv.f1 = profitability_count(tx, tx_pre);
        const auto gap = pre_window_mean_gap(tx, tx_pre);
        fv.f2_defined = gap.has_value();
        fv.f2 = gap.value_or(0.0);
        out.push_back(fv);
    }
    return out;
}

StandardizeInfo standardize_and_compose(std::vector<FilterValues>& batch) {
    if (batch.size() < 2) {
        throw std::invalid_argument("standardize_and_compose: need at least 2 agents");
    }
    for (const auto& fv : batch) {
        if (!fv.f2_defined) {
            throw std::invalid_argument(
                "standardize_and_compose: batch contains an excluded (inactive) agent");
        }
    }
    std::vector<double> f1s, f2s;
    f1s.reserve(batch.size());
    f2s.reserve(batch.size());
    for (const auto& fv : batch) {
        f1s.push_back(fv.f1);
        f2s.push_back(fv.f2);
    }
    const double m1 = stats::mean(f1s), s1 = stats::sd_population(f1s);
    const double m2 = stats::mean(f2s), s2 = stats::sd_population(f2s);
    StandardizeInfo info;
    info.zero_variance_f1 = s1 == 0.0;
    info.zero_variance_f2 = s2 == 0.0;
    for (auto& fv : batch) {
        fv.z1 = s1 == 0.0 ? 0.0 : (fv.f1 - m1) / s1;
        fv.z2 = s2 == 0.0 ? 0.0 : (fv.f2 - m2) / s2;
        fv.composite = 0.5 * fv.z1 + 0.5 * fv.z2;
    }
    return info;
}

void sort_by_composite(std::vector<FilterValues>& batch) {
    std::stable_sort(batch.begin(), batch.end(), [](const FilterValues& a, const FilterValues& b) {
        if (a.composite != b.composite) return a.composite > b.composite;
        if (a.f1 != b.f1) return a.f1 > b.f1;
        return a.agent_id < b.agent_id;
    });
}

void write_filters_csv(std::span<const FilterValues> batch, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(batch.size());
    for (const auto& fv : batch) {
        rows.push_back({std::to_string(fv.agent_id), std::to_string(fv.company_id),
                        csv::format_double(fv.f1), csv::format_double(fv.f2),
                        csv::format_double(fv.z1), csv::format_double(fv.z2),
                        csv::format_double(fv.composite)});
    }
    csv::write_file(path, {"agent_id", "company_id", "f1", "f2", "z1", "z2", "composite"}, rows);
}

std::vector<FilterValues> read_filters_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const int ca = t.require_column("agent_id");
    const int cc = t.require_column("company_id");
    const int c1 = t.require_column("f1");
    const int c2 = t.require_column("f2");
    const int cz1 = t.require_column("z1");
    const int cz2 = t.require_column("z2");
    const int cco = t.require_column("composite");
    std::vector<FilterValues> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        FilterValues fv;
        fv.agent_id = std::stoi(row[ca]);
        fv.company_id = std::stoi(row[cc]);
        fv.f1 = std::stod(row[c1]);
        fv.f2 = std::stod(row[c2]);
        fv.z1 = std::stod(row[cz1]);
        fv.z2 = std::stod(row[cz2]);
        fv.composite = std::stod(row[cco]);
        out.push_back(fv);
    }
    return out;
}

}  // namespace contagion::filters
