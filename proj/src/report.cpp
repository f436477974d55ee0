#include "contagion/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "contagion/baselines.hpp"
#include "contagion/csv.hpp"
#include "contagion/filters.hpp"
#include "contagion/mapper.hpp"

namespace contagion::report {

EvaluationReport evaluate(std::span<const int> predicted, std::span<const std::uint8_t> truth) {
    const int n = static_cast<int>(truth.size());
    std::vector<std::uint8_t> pred_flag(n, 0);
    for (const int id : predicted) {
        if (id < 0 || id >= n) throw std::invalid_argument("evaluate: predicted id out of range");
        pred_flag[id] = 1;
    }
    EvaluationReport r;
    for (int i = 0; i < n; ++i) {
        if (pred_flag[i] && truth[i]) {
            ++r.tp;
        } else if (pred_flag[i]) {
            ++r.fp;
        } else if (truth[i]) {
            ++r.fn;
        } else {
            ++r.tn;
        }
    }
    if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / (r.tp + r.fp);
    if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / (r.tp + r.fn);
    if (r.precision && r.recall && *r.precision + *r.recall > 0.0) {
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    }
    if (n > 0) r.accuracy = static_cast<double>(r.tp + r.tn) / n;
    return r;
}

double fisher_overlap(int total, int size_a, int size_b, int overlap) {
    if (total < 0 || size_a < 0 || size_b < 0 || overlap < 0) {
        throw std::invalid_argument("fisher_overlap: negative argument");
    }
    if (size_a > total || size_b > total) {
        throw std::invalid_argument("fisher_overlap: set larger than the population");
    }
    const int hi = std::min(size_a, size_b);
    if (overlap > hi) {
        throw std::invalid_argument("fisher_overlap: observed overlap exceeds the smaller set");
    }
    const double log_denom = stats::log_choose(total, size_b);
    double p = 0.0;
    for (int i = overlap; i <= hi; ++i) {
        const double lt = stats::log_choose(size_a, i) +
                          stats::log_choose(total - size_a, size_b - i) - log_denom;
        if (std::isfinite(lt)) p += std::exp(lt);
    }
    return std::min(p, 1.0);
}

DistanceSummary distance_summary(std::span<const double> suspected,
                                 std::span<const double> reference) {
    if (suspected.size() != reference.size()) {
        throw std::invalid_argument("distance_summary: groups must be paired (equal length)");
    }
    if (suspected.size() < 2) {
        throw std::invalid_argument("distance_summary: need at least 2 pairs");
    }
    DistanceSummary s;
    s.n_pairs = static_cast<int>(suspected.size());
    s.mean_suspected = stats::mean(suspected);
    s.mean_reference = stats::mean(reference);
    s.suspected_nonzero = stats::one_sample_t_test(suspected, 0.0);
    s.paired_greater = stats::paired_t_test_greater(suspected, reference);
    return s;
}

// ── benchmark orchestration ─────────────────────────────────────────────────

SimulationBundle simulate_from_config(const config::Config& cfg) {
    SimulationBundle b;
    const int n_core = static_cast<int>(cfg.get_int("n_core", 1703));
    const int n_isolated = static_cast<int>(cfg.get_int("n_isolated", 127));
    const int attach = static_cast<int>(cfg.get_int("attach_param", 8));
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));

    b.graph = graph_sim::generate_graph(n_core, n_isolated, attach, seed);
    b.profiles = graph_sim::assign_profiles(b.graph, graph_sim::ProfileRanges{}, seed);

    b.cascade.seed = seed;
    b.cascade.runs_per_block = static_cast<int>(cfg.get_int("runs", 1000));
    b.cascade.baseline_mean = cfg.get_double("mu_base", 0.0005);
    b.cascade.p_uninformed = cfg.get_double("p_uninformed", 0.5);

    // A fixed set of source agents drawn from the connected component.
    const int n_seeds = static_cast<int>(cfg.get_int("seeds_per_company", 5));
    std::vector<int> connected;
    for (int i = 0; i < b.graph.n; ++i) {
        if (!b.graph.is_isolated(i)) connected.push_back(i);
    }
    if (static_cast<int>(connected.size()) < n_seeds) {
        throw std::invalid_argument("simulate_from_config: not enough connected agents for seeds");
    }
    Rng rng = Rng::substream(seed, 0x5e'ed'5ULL);
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < n_seeds) {
        chosen.insert(connected[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(connected.size()) - 1))]);
    }
    b.cascade.seed_agents.assign(chosen.begin(), chosen.end());

    b.matrix = graph_sim::simulate_returns(b.graph, b.profiles, b.cascade);
    return b;
}

namespace {

std::vector<std::string> split_methods(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

BenchmarkResult run_benchmark(const graph_sim::ReturnMatrix& matrix, const config::Config& cfg) {
    const int n = matrix.n_agents();
    std::vector<std::uint8_t> truth(n, 0);
    for (int i = 0; i < n; ++i) {
        truth[i] = matrix.truth[i] == graph_sim::BehaviorClass::Opportunistic ? 1 : 0;
    }

    // Agents with no trade on one side of the announcement boundary have no
    // defined mean-gap filter and drop out of the filter-based analysis.
    auto batch = filters::compute_from_matrix(matrix);
    std::vector<int> active;
    for (int i = 0; i < n; ++i) {
        if (batch[i].f2_defined) active.push_back(i);
    }
    std::vector<filters::FilterValues> active_batch;
    active_batch.reserve(active.size());
    for (const int i : active) active_batch.push_back(batch[i]);
    filters::standardize_and_compose(active_batch);

    const int na = static_cast<int>(active.size());
    std::vector<double> f1(na), f2(na), composite(na);
    // Both filters, standardized: the working space for Mapper and for the
    // clustering baselines ("features extracted using the same filter
    // functions").
    Eigen::MatrixXd feats(na, 2);
    std::vector<double> score_by_agent(n, 0.0);
    for (int j = 0; j < na; ++j) {
        f1[j] = active_batch[j].f1;
        f2[j] = active_batch[j].f2;
        composite[j] = active_batch[j].composite;
        feats(j, 0) = active_batch[j].z1;
        feats(j, 1) = active_batch[j].z2;
        score_by_agent[active[j]] = active_batch[j].composite;
    }
    const auto to_agent_ids = [&](const std::vector<int>& local) {
        std::vector<int> ids;
        ids.reserve(local.size());
        for (const int j : local) ids.push_back(active[j]);
        return ids;
    };

    BenchmarkResult result;
    result.n_agents = n;
    for (const auto t : truth) result.n_truth_positive += t;

    const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    const auto methods = split_methods(cfg.get_string(
        "methods", "mapper,kmeans,kmeans++,dbscan,hclust,knn,lof,iforest"));

    for (const auto& name : methods) {
        MethodOutcome out;
        out.method = name;
        const auto t0 = std::chrono::steady_clock::now();
        if (name == "mapper") {
            mapper::MapperConfig mc;
            mc.intervals = static_cast<int>(cfg.get_int("mapper.intervals", 3));
            mc.overlap = cfg.get_double("mapper.overlap", 0.25);
            mc.k = static_cast<int>(cfg.get_int("mapper.k", 150));
            mc.seed = seed;
            const auto sub = mapper::identify_subpopulation(feats, f1, f2, composite, mc);
            out.predicted = to_agent_ids(sub.q);
            out.scores = score_by_agent;
        } else {
            baselines::BaselineConfig bc;
            bc.method = baselines::method_from_string(name);
            bc.k_clusters = static_cast<int>(cfg.get_int("baseline.k", 3));
            bc.dbscan_eps = cfg.get_double("dbscan.eps", 0.08);
            bc.dbscan_min_pts = static_cast<int>(cfg.get_int("dbscan.min_pts", 30));
            bc.knn_k = static_cast<int>(cfg.get_int("anomaly.k", 20));
            bc.iforest_trees = static_cast<int>(cfg.get_int("iforest.trees", 100));
            bc.iforest_subsample = static_cast<int>(cfg.get_int("iforest.subsample", 256));
            bc.anomaly_fraction = cfg.get_double("anomaly.fraction", 0.12);
            bc.seed = seed;
            if (baselines::is_clustering(bc.method)) {
                const auto clusters = baselines::cluster(feats, bc);
                out.predicted = to_agent_ids(baselines::predicted_positive(clusters, composite));
                out.scores = score_by_agent;
            } else {
                const auto an = baselines::anomaly_scores(matrix.values, bc);
                for (int i = 0; i < n; ++i) {
                    if (an.flagged[i]) out.predicted.push_back(i);
                }
                out.scores = an.scores;
            }
        }
        const auto t1 = std::chrono::steady_clock::now();
        out.runtime_sec = std::chrono::duration<double>(t1 - t0).count();
        out.eval = evaluate(out.predicted, truth);
        out.fisher_p = fisher_overlap(n, result.n_truth_positive,
                                      out.eval.predicted_positive(), out.eval.tp);
        result.methods.push_back(std::move(out));
    }
    return result;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : "";
}

}  // namespace

void write_metrics_csv(const BenchmarkResult& result, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : result.methods) {
        rows.push_back({m.method, std::to_string(m.eval.predicted_positive()),
                        std::to_string(m.eval.tp), std::to_string(m.eval.fp),
                        std::to_string(m.eval.fn), opt_str(m.eval.precision),
                        opt_str(m.eval.recall), opt_str(m.eval.f1),
                        csv::format_double(m.fisher_p), csv::format_double(m.runtime_sec)});
    }
    csv::write_file(path,
                    {"method", "predicted_positive", "tp", "fp", "fn", "precision", "recall",
                     "f1", "fisher_p", "runtime_sec"},
                    rows);
}

void write_predictions_csv(const BenchmarkResult& result, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : result.methods) {
        std::vector<std::uint8_t> flag(result.n_agents, 0);
        for (const int id : m.predicted) flag[id] = 1;
        for (int i = 0; i < result.n_agents; ++i) {
            rows.push_back({std::to_string(i), m.method, flag[i] ? "1" : "0",
                            m.scores.empty() ? "" : csv::format_double(m.scores[i])});
        }
    }
    csv::write_file(path, {"agent_id", "method", "predicted_positive", "score"}, rows);
}

std::string format_table(const BenchmarkResult& result) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %9s %6s %6s %6s %10s %8s %8s\n", "method",
                  "predicted", "tp", "fp", "fn", "precision", "recall", "f1");
    out << line;
    const auto fmt = [](const std::optional<double>& v) {
        char buf[16];
        if (v) {
            std::snprintf(buf, sizeof(buf), "%.4f", *v);
        } else {
            std::snprintf(buf, sizeof(buf), "%s", "-");
        }
        return std::string(buf);
    };
    for (const auto& m : result.methods) {
        std::snprintf(line, sizeof(line), "%-10s %9d %6d %6d %6d %10s %8s %8s\n",
                      m.method.c_str(), m.eval.predicted_positive(), m.eval.tp, m.eval.fp,
                      m.eval.fn, fmt(m.eval.precision).c_str(), fmt(m.eval.recall).c_str(),
                      fmt(m.eval.f1).c_str());
        out << line;
    }
    return out.str();
}

void write_manifest(const config::Config& cfg, std::span<const std::string> outputs,
                    const std::string& path) {
    nlohmann::json j;
    j["config"] = nlohmann::json::object();
    for (const auto& [k, v] : cfg.entries()) j["config"][k] = v;
    j["config_hash"] = cfg.hash();
    j["outputs"] = nlohmann::json::array();
    for (const auto& o : outputs) j["outputs"].push_back(o);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace contagion::report
