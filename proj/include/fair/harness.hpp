#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fair/environment.hpp"
#include "fair/learner.hpp"
#include "fair/serialization.hpp"
#include "fair/traffic.hpp"
#include "fair/welfare.hpp"

namespace fair::harness {

enum class Algorithm { UtilitarianQLearning, GgiQLearning, GgiPolicyGradient };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct AlgorithmSpec {
    std::string name;
    Algorithm algorithm;
    WelfareSpec welfare;
    LearnConfig learn;
};

struct MdpEnvSpec {
    MoMdp mdp;
    std::size_t horizon;
};

using EnvSpec = std::variant<traffic::TrafficConfig, MdpEnvSpec>;

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);

struct ExperimentConfig {
    explicit ExperimentConfig(EnvSpec e) : env(std::move(e)) {}

    EnvSpec env;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t n_seeds = 20;
    std::size_t eval_episodes = 20;
    std::filesystem::path output_path = "results";
    std::uint64_t master_seed = 0;
    /// Weights for the ggi_welfare column; halving weights when unset.
    std::optional<GiniWeights> report_weights;
    /// Evaluation return: discount and per-step averaging (episodes and seed come from the harness).
    double eval_gamma = 1.0;
    bool eval_per_step = true;
};

/**
 * Reads an experiment document. Relative paths inside it ("preset", "file")
 * resolve against base_dir; every referenced file must exist.
 */
ExperimentConfig experiment_from_json(const io::Json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Per-cell seeds. Environment and evaluation seeds depend only on the seed index,
/// so all algorithms face the same traffic (paired comparison).
struct CellSeeds {
    std::uint64_t train_env;
    std::uint64_t agent;
    std::uint64_t eval;
};
CellSeeds cell_seeds(std::uint64_t master_seed, std::size_t algorithm_index, std::size_t seed_index);

struct RunResult {
    std::string algorithm;
    std::size_t algorithm_index = 0;
    std::size_t seed_index = 0;
    CellSeeds seeds{};
    bool ok = false;
    std::string error;
    ValueVector per_objective_mean;
    ValueVector per_objective_std;
    double utilitarian_mean = 0.0;
    double ggi_welfare = 0.0;
    double min_objective = 0.0;
    double wallclock_s = 0.0;

    /// Average per-objective cost, -utilitarian_mean / n.
    double mean_cost() const;
    /// Largest minus smallest per-objective cost.
    double cost_spread() const;
};

struct TrainedPolicy {
    std::string algorithm;
    Policy policy;
};

/// Trains one (algorithm, seed) cell and returns its policy.
TrainedPolicy train_cell(const ExperimentConfig& cfg, std::size_t algorithm_index, std::size_t seed_index);

/// Evaluates a policy with the evaluation stream of seed_index.
RunResult evaluate_cell(const ExperimentConfig& cfg, std::size_t algorithm_index, std::size_t seed_index,
                        const Policy& policy);

struct SummaryRow {
    std::string algorithm;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    // mean and sample std over successful seeds
    double utilitarian_mean = 0, utilitarian_mean_std = 0;
    double ggi_welfare = 0, ggi_welfare_std = 0;
    double min_objective = 0, min_objective_std = 0;
    double mean_cost = 0, mean_cost_std = 0;
    double cost_spread = 0, cost_spread_std = 0;
};

struct ExperimentReport {
    std::vector<RunResult> runs;    ///< ordered by (algorithm index, seed index)
    std::vector<SummaryRow> summary; ///< one row per algorithm
};

/// Cell concurrency from FAIR_MOMDP_THREADS: unset uses hardware concurrency, 0 means serial.
std::size_t threads_from_env();

/**
 * Trains and evaluates every (algorithm, seed) cell. A cell that throws is
 * recorded as a failed row; the rest still run. Results do not depend on the
 * thread count.
 */
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t threads);

std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& runs);

/// Column headers of results.csv, in order, for n objectives.
std::vector<std::string> results_columns(std::size_t n_objectives);
inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols{
        "algorithm",     "n_ok",          "n_failed",      "utilitarian_mean", "utilitarian_mean_std",
        "ggi_welfare",   "ggi_welfare_std", "min_objective", "min_objective_std", "mean_cost",
        "mean_cost_std", "cost_spread",   "cost_spread_std"};
    return cols;
}
inline const std::vector<std::string>& fig1_columns() {
    static const std::vector<std::string> cols{"lane", "algorithm", "mean_waiting_cost", "std"};
    return cols;
}

void write_results_csv(std::ostream& out, const std::vector<RunResult>& runs, std::size_t n_objectives);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/**
 * Per-lane cost table for a bar chart: one row per (lane, algorithm) in lane
 * order then algorithm order; mean and sample std over successful seeds of
 * -per_objective_mean. Throws InputError if the runs disagree on the number of
 * objectives or hold fewer than two algorithms.
 */
std::string emit_fig1_data(const std::vector<RunResult>& runs);

io::Json report_to_json(const ExperimentReport& report);

/**
 * Writes results.csv, summary.csv, fig1.csv and report.json (all byte-stable)
 * plus timings.csv (wall clock, not reproducible) into dir.
 */
void write_outputs(const ExperimentReport& report, std::size_t n_objectives, const std::filesystem::path& dir);

struct CrossCheckConfig {
    std::size_t n_instances = 50;
    std::uint64_t seed = 0;
    std::size_t n_states = 4;
    std::size_t n_actions = 2;
    std::size_t n_objectives = 3;
    double gamma = 0.9;
};

struct CrossCheckInstance {
    std::size_t index;
    bool ok;
    std::string error;
    double plan_welfare;
    double oracle_welfare;
    double abs_gap;
    double rel_gap; ///< abs_gap / (1 + |oracle|)
};

struct CrossCheckReport {
    std::vector<CrossCheckInstance> instances;
    double max_abs_gap = 0.0;
    double max_rel_gap = 0.0;
    std::size_t failures = 0;
};

/// Solves random instances with both ggi_plan and the enumeration oracle and records the welfare gaps.
CrossCheckReport run_plan_vs_oracle(const CrossCheckConfig& cfg);

io::Json to_json(const CrossCheckReport& r);

} // namespace fair::harness
