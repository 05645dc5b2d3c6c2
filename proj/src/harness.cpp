#include "fair/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "fair/planner.hpp"
#include "fair/random.hpp"

namespace fair::harness {

namespace {

// stream tags for derive_seed
constexpr std::uint64_t kTrainEnvStream = 1;
constexpr std::uint64_t kAgentStream = 2;
constexpr std::uint64_t kEvalStream = 3;

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd m;
    if (xs.empty()) {
        return m;
    }
    for (double x : xs) {
        m.mean += x;
    }
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - m.mean) * (x - m.mean);
        }
        m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

std::size_t n_objectives_of(const EnvSpec& spec) {
    if (const auto* t = std::get_if<traffic::TrafficConfig>(&spec)) {
        return t->n_lanes;
    }
    return std::get<MdpEnvSpec>(spec).mdp.n_objectives();
}

GiniWeights report_weights_of(const ExperimentConfig& cfg) {
    return cfg.report_weights ? *cfg.report_weights : GiniWeights::halving(n_objectives_of(cfg.env));
}

GiniWeights learner_weights(const AlgorithmSpec& spec, std::size_t n) {
    struct Visitor {
        std::size_t n;
        const std::string& name;
        GiniWeights operator()(const GgiWelfare& g) const { return g.weights; }
        GiniWeights operator()(const MaximinWelfare&) const { return GiniWeights::geometric(n, 1e-6); }
        GiniWeights operator()(const UtilitarianWelfare&) const {
            throw InputError("algorithm '" + name + "' needs a ggi or maximin welfare");
        }
    };
    return std::visit(Visitor{n, spec.name}, spec.welfare.kind());
}

std::filesystem::path resolve_existing(const std::filesystem::path& base, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_relative()) {
        p = base / p;
    }
    if (!std::filesystem::exists(p)) {
        throw InputError("referenced file does not exist: " + p.string());
    }
    return p;
}

EnvSpec env_from_json(const io::Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object() || !j.contains("type")) {
        throw InputError("env: expected an object with a 'type' key");
    }
    const auto type = j["type"].get<std::string>();
    if (type == "traffic") {
        if (j.contains("preset")) {
            return io::traffic_from_json(io::read_json_file(resolve_existing(base_dir, j["preset"].get<std::string>())));
        }
        if (j.contains("config")) {
            return io::traffic_from_json(j["config"]);
        }
        throw InputError("env: traffic needs 'preset' or 'config'");
    }
    if (type == "mdp") {
        if (!j.contains("horizon")) {
            throw InputError("env: mdp needs 'horizon'");
        }
        const auto horizon = j["horizon"].get<std::size_t>();
        if (j.contains("file")) {
            return MdpEnvSpec{io::mdp_from_json(io::read_json_file(resolve_existing(base_dir, j["file"].get<std::string>()))),
                              horizon};
        }
        if (j.contains("mdp")) {
            return MdpEnvSpec{io::mdp_from_json(j["mdp"]), horizon};
        }
        throw InputError("env: mdp needs 'file' or 'mdp'");
    }
    throw InputError("env: unknown type '" + type + "'");
}

} // namespace

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::UtilitarianQLearning:
        return "utilitarian_q_learning";
    case Algorithm::GgiQLearning:
        return "ggi_q_learning";
    case Algorithm::GgiPolicyGradient:
        return "ggi_policy_gradient";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
    for (auto a : {Algorithm::UtilitarianQLearning, Algorithm::GgiQLearning, Algorithm::GgiPolicyGradient}) {
        if (to_string(a) == s) {
            return a;
        }
    }
    throw InputError("unknown algorithm '" + s + "'");
}

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
    if (const auto* t = std::get_if<traffic::TrafficConfig>(&spec)) {
        return std::make_unique<TrafficEnv>(*t);
    }
    const auto& m = std::get<MdpEnvSpec>(spec);
    return std::make_unique<MdpEnv>(m.mdp, m.horizon);
}

ExperimentConfig experiment_from_json(const io::Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw InputError("experiment config must be a JSON object");
    }
    if (!j.contains("env")) {
        throw InputError("experiment config: missing key 'env'");
    }
    ExperimentConfig cfg(env_from_json(j["env"], base_dir));
    if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty()) {
        throw InputError("experiment config: 'algorithms' must be a non-empty array");
    }
    for (const auto& a : j["algorithms"]) {
        const auto algorithm = algorithm_from_string(a.at("algorithm").get<std::string>());
        std::string name = a.contains("name") ? a["name"].get<std::string>() : to_string(algorithm);
        WelfareSpec welfare = a.contains("welfare") ? io::welfare_from_json(a["welfare"])
                              : algorithm == Algorithm::UtilitarianQLearning
                                  ? WelfareSpec::utilitarian()
                                  : WelfareSpec::ggi(GiniWeights::halving(n_objectives_of(cfg.env)));
        LearnConfig learn = a.contains("learn") ? io::learn_config_from_json(a["learn"]) : LearnConfig{};
        cfg.algorithms.push_back({std::move(name), algorithm, std::move(welfare), learn});
    }
    cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
    if (cfg.n_seeds == 0) {
        throw InputError("experiment config: n_seeds must be at least 1");
    }
    cfg.eval_episodes = j.value("eval_episodes", cfg.eval_episodes);
    if (cfg.eval_episodes == 0) {
        throw InputError("experiment config: eval_episodes must be at least 1");
    }
    cfg.output_path = j.value("output_path", cfg.output_path.string());
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    if (j.contains("report_weights")) {
        cfg.report_weights = io::weights_from_json(j["report_weights"]);
        if (cfg.report_weights->size() != n_objectives_of(cfg.env)) {
            throw InputError("experiment config: report_weights length does not match the environment");
        }
    }
    if (j.contains("evaluation")) {
        const auto& e = j["evaluation"];
        cfg.eval_gamma = e.value("gamma", cfg.eval_gamma);
        cfg.eval_per_step = e.value("per_step", cfg.eval_per_step);
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    const auto doc = io::read_json_file(path);
    try {
        return experiment_from_json(doc, path.parent_path());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

CellSeeds cell_seeds(std::uint64_t master_seed, std::size_t algorithm_index, std::size_t seed_index) {
    return {derive_seed(master_seed, {seed_index, kTrainEnvStream}),
            derive_seed(master_seed, {algorithm_index, seed_index, kAgentStream}),
            derive_seed(master_seed, {seed_index, kEvalStream})};
}

double RunResult::mean_cost() const {
    return -utilitarian_mean / static_cast<double>(per_objective_mean.size());
}

double RunResult::cost_spread() const {
    if (per_objective_mean.empty()) {
        return 0.0;
    }
    auto [lo, hi] = std::minmax_element(per_objective_mean.begin(), per_objective_mean.end());
    return *hi - *lo; // costs are negated rewards: max cost - min cost = max reward - min reward
}

TrainedPolicy train_cell(const ExperimentConfig& cfg, std::size_t algorithm_index, std::size_t seed_index) {
    const AlgorithmSpec& spec = cfg.algorithms.at(algorithm_index);
    const CellSeeds seeds = cell_seeds(cfg.master_seed, algorithm_index, seed_index);
    auto env = make_environment(cfg.env);
    env->seed(seeds.train_env);
    LearnConfig learn = spec.learn;
    learn.seed = seeds.agent;

    switch (spec.algorithm) {
    case Algorithm::UtilitarianQLearning:
        return {spec.name, utilitarian_q_learning(*env, learn).greedy};
    case Algorithm::GgiQLearning:
        return {spec.name, ggi_q_learning(*env, learner_weights(spec, env->n_objectives()), learn).greedy};
    case Algorithm::GgiPolicyGradient:
        return {spec.name, ggi_policy_gradient(*env, learner_weights(spec, env->n_objectives()), learn).policy};
    }
    throw std::logic_error("unhandled algorithm");
}

RunResult evaluate_cell(const ExperimentConfig& cfg, std::size_t algorithm_index, std::size_t seed_index,
                        const Policy& policy) {
    RunResult r;
    r.algorithm = cfg.algorithms.at(algorithm_index).name;
    r.algorithm_index = algorithm_index;
    r.seed_index = seed_index;
    r.seeds = cell_seeds(cfg.master_seed, algorithm_index, seed_index);
    auto env = make_environment(cfg.env);
    EvalOptions opt;
    opt.episodes = cfg.eval_episodes;
    opt.seed = r.seeds.eval;
    opt.gamma = cfg.eval_gamma;
    opt.per_step = cfg.eval_per_step;
    const EvalResult e = evaluate_learned(*env, policy, opt, report_weights_of(cfg));
    r.ok = true;
    r.per_objective_mean = e.mean;
    r.per_objective_std = e.stddev;
    r.utilitarian_mean = e.utilitarian_mean;
    r.ggi_welfare = e.ggi;
    r.min_objective = e.min_objective;
    return r;
}

std::size_t threads_from_env() {
    const char* v = std::getenv("FAIR_MOMDP_THREADS");
    if (v == nullptr || *v == '\0') {
        return std::max(1U, std::thread::hardware_concurrency());
    }
    char* end = nullptr;
    const unsigned long n = std::strtoul(v, &end, 10);
    if (end == v || *end != '\0') {
        throw InputError("FAIR_MOMDP_THREADS must be a nonnegative integer");
    }
    return static_cast<std::size_t>(n);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
    const std::size_t n_cells = cfg.algorithms.size() * cfg.n_seeds;
    ExperimentReport report;
    report.runs.resize(n_cells);

    auto run_cell = [&](std::size_t cell) {
        const std::size_t alg = cell / cfg.n_seeds;
        const std::size_t seed = cell % cfg.n_seeds;
        const auto start = std::chrono::steady_clock::now();
        RunResult r;
        try {
            const TrainedPolicy trained = train_cell(cfg, alg, seed);
            r = evaluate_cell(cfg, alg, seed, trained.policy);
        } catch (const std::exception& e) {
            r = RunResult{};
            r.algorithm = cfg.algorithms[alg].name;
            r.algorithm_index = alg;
            r.seed_index = seed;
            r.seeds = cell_seeds(cfg.master_seed, alg, seed);
            r.ok = false;
            r.error = e.what();
        }
        r.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.runs[cell] = std::move(r);
    };

    const std::size_t workers = std::min(threads, n_cells);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_cells; ++c) {
            run_cell(c);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < n_cells; c = next++) {
                    run_cell(c);
                }
            });
        }
    }
    report.summary = summarize(cfg, report.runs);
    return report;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
    std::vector<SummaryRow> rows;
    for (std::size_t alg = 0; alg < cfg.algorithms.size(); ++alg) {
        SummaryRow row;
        row.algorithm = cfg.algorithms[alg].name;
        std::vector<double> util, ggi_w, mins, cost, spread;
        for (const auto& r : runs) {
            if (r.algorithm_index != alg) {
                continue;
            }
            if (!r.ok) {
                ++row.n_failed;
                continue;
            }
            ++row.n_ok;
            util.push_back(r.utilitarian_mean);
            ggi_w.push_back(r.ggi_welfare);
            mins.push_back(r.min_objective);
            cost.push_back(r.mean_cost());
            spread.push_back(r.cost_spread());
        }
        auto set = [](const std::vector<double>& xs, double& m, double& s) {
            const auto ms = mean_std(xs);
            m = ms.mean;
            s = ms.std;
        };
        set(util, row.utilitarian_mean, row.utilitarian_mean_std);
        set(ggi_w, row.ggi_welfare, row.ggi_welfare_std);
        set(mins, row.min_objective, row.min_objective_std);
        set(cost, row.mean_cost, row.mean_cost_std);
        set(spread, row.cost_spread, row.cost_spread_std);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> results_columns(std::size_t n_objectives) {
    std::vector<std::string> cols{"algorithm",   "seed_index",    "train_env_seed", "agent_seed",
                                  "eval_seed",   "status",        "error",          "utilitarian_mean",
                                  "ggi_welfare", "min_objective", "mean_cost",      "cost_spread"};
    for (std::size_t i = 0; i < n_objectives; ++i) {
        cols.push_back("mean_" + std::to_string(i));
    }
    for (std::size_t i = 0; i < n_objectives; ++i) {
        cols.push_back("std_" + std::to_string(i));
    }
    return cols;
}

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
}

} // namespace

void write_results_csv(std::ostream& out, const std::vector<RunResult>& runs, std::size_t n_objectives) {
    using io::format_double;
    write_header(out, results_columns(n_objectives));
    for (const auto& r : runs) {
        out << csv_escape(r.algorithm) << ',' << r.seed_index << ',' << r.seeds.train_env << ',' << r.seeds.agent << ','
            << r.seeds.eval << ',' << (r.ok ? "ok" : "failed") << ',' << csv_escape(r.error);
        if (r.ok) {
            out << ',' << format_double(r.utilitarian_mean) << ',' << format_double(r.ggi_welfare) << ','
                << format_double(r.min_objective) << ',' << format_double(r.mean_cost()) << ','
                << format_double(r.cost_spread());
            for (std::size_t i = 0; i < n_objectives; ++i) {
                out << ',' << format_double(r.per_objective_mean.at(i));
            }
            for (std::size_t i = 0; i < n_objectives; ++i) {
                out << ',' << format_double(r.per_objective_std.at(i));
            }
        } else {
            for (std::size_t i = 0; i < 5 + 2 * n_objectives; ++i) {
                out << ',';
            }
        }
        out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    using io::format_double;
    write_header(out, summary_columns());
    for (const auto& r : rows) {
        out << csv_escape(r.algorithm) << ',' << r.n_ok << ',' << r.n_failed << ',' << format_double(r.utilitarian_mean)
            << ',' << format_double(r.utilitarian_mean_std) << ',' << format_double(r.ggi_welfare) << ','
            << format_double(r.ggi_welfare_std) << ',' << format_double(r.min_objective) << ','
            << format_double(r.min_objective_std) << ',' << format_double(r.mean_cost) << ','
            << format_double(r.mean_cost_std) << ',' << format_double(r.cost_spread) << ','
            << format_double(r.cost_spread_std) << '\n';
    }
}

std::string emit_fig1_data(const std::vector<RunResult>& runs) {
    std::vector<std::string> algorithms;
    std::optional<std::size_t> n;
    for (const auto& r : runs) {
        if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) {
            algorithms.push_back(r.algorithm);
        }
        if (!r.ok) {
            continue;
        }
        if (n && *n != r.per_objective_mean.size()) {
            throw InputError("emit_fig1_data: runs disagree on the number of lanes");
        }
        n = r.per_objective_mean.size();
    }
    if (algorithms.size() < 2) {
        throw InputError("emit_fig1_data: need results from at least two algorithms");
    }
    std::ostringstream out;
    write_header(out, fig1_columns());
    for (std::size_t lane = 0; lane < n.value_or(0); ++lane) {
        for (const auto& alg : algorithms) {
            std::vector<double> costs;
            for (const auto& r : runs) {
                if (r.ok && r.algorithm == alg) {
                    costs.push_back(-r.per_objective_mean[lane]);
                }
            }
            const auto ms = mean_std(costs);
            out << lane << ',' << csv_escape(alg) << ',' << io::format_double(ms.mean) << ','
                << io::format_double(ms.std) << '\n';
        }
    }
    return out.str();
}

io::Json report_to_json(const ExperimentReport& report) {
    io::Json runs = io::Json::array();
    for (const auto& r : report.runs) {
        io::Json j{{"algorithm", r.algorithm},
                   {"seed_index", r.seed_index},
                   {"seeds", {{"train_env", r.seeds.train_env}, {"agent", r.seeds.agent}, {"eval", r.seeds.eval}}},
                   {"status", r.ok ? "ok" : "failed"}};
        if (r.ok) {
            j["per_objective_mean"] = r.per_objective_mean;
            j["per_objective_std"] = r.per_objective_std;
            j["utilitarian_mean"] = r.utilitarian_mean;
            j["ggi_welfare"] = r.ggi_welfare;
            j["min_objective"] = r.min_objective;
            j["mean_cost"] = r.mean_cost();
            j["cost_spread"] = r.cost_spread();
        } else {
            j["error"] = r.error;
        }
        runs.push_back(std::move(j));
    }
    io::Json summary = io::Json::array();
    for (const auto& s : report.summary) {
        summary.push_back({{"algorithm", s.algorithm},
                           {"n_ok", s.n_ok},
                           {"n_failed", s.n_failed},
                           {"utilitarian_mean", {{"mean", s.utilitarian_mean}, {"std", s.utilitarian_mean_std}}},
                           {"ggi_welfare", {{"mean", s.ggi_welfare}, {"std", s.ggi_welfare_std}}},
                           {"min_objective", {{"mean", s.min_objective}, {"std", s.min_objective_std}}},
                           {"mean_cost", {{"mean", s.mean_cost}, {"std", s.mean_cost_std}}},
                           {"cost_spread", {{"mean", s.cost_spread}, {"std", s.cost_spread_std}}}});
    }
    return io::Json{{"runs", std::move(runs)}, {"summary", std::move(summary)}};
}

void write_outputs(const ExperimentReport& report, std::size_t n_objectives, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
        return out;
    };
    {
        auto out = open("results.csv");
        write_results_csv(out, report.runs, n_objectives);
    }
    {
        auto out = open("summary.csv");
        write_summary_csv(out, report.summary);
    }
    std::vector<std::string> names;
    for (const auto& r : report.runs) {
        if (std::find(names.begin(), names.end(), r.algorithm) == names.end()) {
            names.push_back(r.algorithm);
        }
    }
    if (names.size() >= 2) {
        auto out = open("fig1.csv");
        out << emit_fig1_data(report.runs);
    }
    io::write_json_file(dir / "report.json", report_to_json(report));
    {
        auto out = open("timings.csv");
        out << "algorithm,seed_index,wallclock_s\n";
        for (const auto& r : report.runs) {
            out << csv_escape(r.algorithm) << ',' << r.seed_index << ',' << io::format_double(r.wallclock_s) << '\n';
        }
    }
}

CrossCheckReport run_plan_vs_oracle(const CrossCheckConfig& cfg) {
    CrossCheckReport report;
    const GiniWeights w = GiniWeights::halving(cfg.n_objectives);
    for (std::size_t k = 0; k < cfg.n_instances; ++k) {
        CrossCheckInstance inst{k, false, {}, 0.0, 0.0, 0.0, 0.0};
        try {
            const MoMdp mdp =
                random_mdp(derive_seed(cfg.seed, {k}), cfg.n_states, cfg.n_actions, cfg.n_objectives, cfg.gamma);
            const PlanResult plan = ggi_plan(mdp, w);
            if (plan.status != PlanStatus::Optimal) {
                throw std::runtime_error("ggi_plan status " + to_string(plan.status));
            }
            const OracleResult oracle = oracle_ggi_optimum(mdp, w);
            inst.ok = true;
            inst.plan_welfare = plan.welfare;
            inst.oracle_welfare = oracle.welfare;
            inst.abs_gap = std::abs(plan.welfare - oracle.welfare);
            inst.rel_gap = inst.abs_gap / (1.0 + std::abs(oracle.welfare));
            report.max_abs_gap = std::max(report.max_abs_gap, inst.abs_gap);
            report.max_rel_gap = std::max(report.max_rel_gap, inst.rel_gap);
        } catch (const std::exception& e) {
            inst.error = e.what();
            ++report.failures;
        }
        report.instances.push_back(std::move(inst));
    }
    return report;
}

io::Json to_json(const CrossCheckReport& r) {
    io::Json instances = io::Json::array();
    for (const auto& i : r.instances) {
        io::Json j{{"index", i.index}, {"status", i.ok ? "ok" : "failed"}};
        if (i.ok) {
            j["plan_welfare"] = i.plan_welfare;
            j["oracle_welfare"] = i.oracle_welfare;
            j["abs_gap"] = i.abs_gap;
            j["rel_gap"] = i.rel_gap;
        } else {
            j["error"] = i.error;
        }
        instances.push_back(std::move(j));
    }
    return io::Json{{"n_instances", r.instances.size()},
                    {"failures", r.failures},
                    {"max_abs_gap", r.max_abs_gap},
                    {"max_rel_gap", r.max_rel_gap},
                    {"instances", std::move(instances)}};
}

} // namespace fair::harness
