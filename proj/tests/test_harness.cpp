#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "fair/harness.hpp"

using namespace fair;
using namespace fair::harness;
using fair::io::Json;

namespace {

Json small_traffic_experiment(std::size_t n_seeds) {
    auto j = Json::parse(R"({
        "env": {"type": "traffic", "config": {
            "n_lanes": 4, "arrival_prob": [0.4, 0.15, 0.15, 0.15], "phases": [[0, 1], [2, 3]],
            "queue_cap": 3, "horizon": 60}},
        "algorithms": [
            {"algorithm": "utilitarian_q_learning", "learn": {"episodes": 30, "gamma": 0.95}},
            {"algorithm": "ggi_policy_gradient", "learn": {"episodes": 32, "batch_size": 8, "gamma": 0.9}}
        ],
        "eval_episodes": 3,
        "master_seed": 7
    })");
    j["n_seeds"] = n_seeds;
    return j;
}

Json small_mdp_experiment() {
    Json j{{"env", {{"type", "mdp"}, {"horizon", 20}, {"mdp", io::to_json(random_mdp(4, 4, 2, 2))}}},
           {"algorithms", Json::array({{{"algorithm", "ggi_q_learning"}, {"learn", {{"episodes", 50}}}}})},
           {"n_seeds", 2},
           {"eval_episodes", 5}};
    return j;
}

std::string results_text(const ExperimentReport& r, std::size_t n) {
    std::ostringstream out;
    write_results_csv(out, r.runs, n);
    return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("fair_momdp_harness_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("experiment parsing") {
    const auto cfg = experiment_from_json(small_traffic_experiment(3), ".");
    CHECK(cfg.algorithms.size() == 2);
    CHECK(cfg.algorithms[0].name == "utilitarian_q_learning");
    CHECK(cfg.algorithms[1].algorithm == Algorithm::GgiPolicyGradient);
    CHECK(cfg.algorithms[1].learn.batch_size == 8);
    CHECK(cfg.n_seeds == 3);
    CHECK(cfg.master_seed == 7);
    CHECK(std::get<traffic::TrafficConfig>(cfg.env).queue_cap == 3);

    auto j = small_traffic_experiment(1);
    j["algorithms"][0]["algorithm"] = "sarsa";
    CHECK_THROWS_AS(experiment_from_json(j, "."), InputError);
    j = small_traffic_experiment(1);
    j["env"] = {{"type", "traffic"}, {"preset", "no/such/preset.json"}};
    CHECK_THROWS_AS(experiment_from_json(j, "."), InputError);
    j = small_traffic_experiment(1);
    j["report_weights"] = {0.6, 0.4};
    CHECK_THROWS_AS(experiment_from_json(j, "."), InputError);
    j = small_traffic_experiment(0);
    CHECK_THROWS_AS(experiment_from_json(j, "."), InputError);
}

TEST_CASE("one algorithm, two seeds") {
    const auto cfg = experiment_from_json(small_mdp_experiment(), ".");
    const auto report = run_experiment(cfg, 1);
    REQUIRE(report.runs.size() == 2);
    REQUIRE(report.summary.size() == 1);
    CHECK(report.summary[0].n_ok == 2);
    CHECK(report.runs[0].seed_index == 0);
    CHECK(report.runs[1].seed_index == 1);
    const auto text = results_text(report, 2);
    CHECK(parse_csv(text).size() == 3);
    CHECK(results_text(run_experiment(cfg, 1), 2) == text);
    // fewer than two algorithms means no per-lane table
    CHECK_THROWS_AS(emit_fig1_data(report.runs), InputError);
}

TEST_CASE("run results are internally consistent") {
    const auto cfg = experiment_from_json(small_traffic_experiment(2), ".");
    const auto report = run_experiment(cfg, 1);
    const auto w = GiniWeights::halving(4);
    for (const auto& r : report.runs) {
        REQUIRE(r.ok);
        REQUIRE(r.per_objective_mean.size() == 4);
        double total = 0;
        for (double v : r.per_objective_mean) {
            CHECK(v <= 0.0);
            total += v;
        }
        CHECK(r.utilitarian_mean == doctest::Approx(total).epsilon(1e-12));
        CHECK(r.ggi_welfare == doctest::Approx(ggi(r.per_objective_mean, w)).epsilon(1e-12));
        CHECK(r.min_objective == *std::min_element(r.per_objective_mean.begin(), r.per_objective_mean.end()));
        CHECK(r.mean_cost() == doctest::Approx(-total / 4).epsilon(1e-12));
        CHECK(r.cost_spread() >= 0.0);
        CHECK(r.ggi_welfare <= r.utilitarian_mean / 4 + 1e-12);
        CHECK(r.ggi_welfare >= r.min_objective - 1e-12);
    }
    const auto& s = report.summary[1];
    CHECK(s.mean_cost ==
          doctest::Approx((report.runs[2].mean_cost() + report.runs[3].mean_cost()) / 2).epsilon(1e-12));
}

TEST_CASE("csv schemas") {
    const auto cols = results_columns(2);
    const std::vector<std::string> expected{"algorithm",     "seed_index", "train_env_seed", "agent_seed",
                                            "eval_seed",     "status",     "error",          "utilitarian_mean",
                                            "ggi_welfare",   "min_objective", "mean_cost",   "cost_spread",
                                            "mean_0",        "mean_1",     "std_0",          "std_1"};
    CHECK(cols == expected);

    const auto cfg = experiment_from_json(small_traffic_experiment(2), ".");
    const auto report = run_experiment(cfg, 1);
    const auto rows = parse_csv(results_text(report, 4));
    CHECK(rows[0] == results_columns(4));
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k].size() == rows[0].size());
    }

    std::ostringstream summary;
    write_summary_csv(summary, report.summary);
    const auto srows = parse_csv(summary.str());
    CHECK(srows[0] == summary_columns());
    CHECK(srows.size() == 3);

    const auto fig = parse_csv(emit_fig1_data(report.runs));
    CHECK(fig[0] == fig1_columns());
    REQUIRE(fig.size() == 1 + 4 * 2);
    // lane-major, then algorithm order
    CHECK(fig[1][0] == "0");
    CHECK(fig[1][1] == "utilitarian_q_learning");
    CHECK(fig[2][1] == "ggi_policy_gradient");
    CHECK(fig[8][0] == "3");
    for (std::size_t alg = 0; alg < 2; ++alg) {
        double lane_sum = 0;
        for (std::size_t lane = 0; lane < 4; ++lane) {
            const double cost = std::stod(fig[1 + lane * 2 + alg][2]);
            CHECK(cost >= 0.0);
            lane_sum += cost;
        }
        CHECK(lane_sum / 4 == doctest::Approx(report.summary[alg].mean_cost).epsilon(1e-9));
    }
}

TEST_CASE("failed cells are recorded and the rest still run") {
    auto j = small_traffic_experiment(2);
    j["algorithms"].push_back({{"algorithm", "ggi_q_learning"}, {"name", "broken, on purpose"},
                               {"welfare", {{"kind", "utilitarian"}}}, {"learn", {{"episodes", 5}}}});
    const auto cfg = experiment_from_json(j, ".");
    const auto report = run_experiment(cfg, 2);
    REQUIRE(report.runs.size() == 6);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(report.runs[k].ok);
    }
    CHECK_FALSE(report.runs[4].ok);
    CHECK(report.runs[4].error.find("ggi or maximin") != std::string::npos);
    CHECK(report.summary[2].n_failed == 2);
    CHECK(report.summary[2].n_ok == 0);
    const auto rows = parse_csv(results_text(report, 4));
    CHECK(rows[5][0] == "\"broken");
    CHECK(results_text(report, 4).find("failed") != std::string::npos);
    CHECK_NOTHROW(emit_fig1_data(report.runs));
}

TEST_CASE("seeds are paired across algorithms and isolated across cells") {
    const auto a = cell_seeds(0, 0, 3);
    const auto b = cell_seeds(0, 1, 3);
    CHECK(a.train_env == b.train_env);
    CHECK(a.eval == b.eval);
    CHECK(a.agent != b.agent);
    const auto c = cell_seeds(0, 0, 4);
    CHECK(c.train_env != a.train_env);
    CHECK(c.eval != a.eval);
    CHECK(a.train_env != a.eval);
    CHECK(cell_seeds(1, 0, 3).train_env != a.train_env);

    // a cell's outcome does not depend on how many seeds run beside it
    const auto two = run_experiment(experiment_from_json(small_traffic_experiment(2), "."), 1);
    const auto three = run_experiment(experiment_from_json(small_traffic_experiment(3), "."), 1);
    CHECK(two.runs[1].per_objective_mean == three.runs[1].per_objective_mean);
    CHECK(two.runs[2].per_objective_mean == three.runs[3].per_objective_mean);
}

TEST_CASE("results do not depend on the thread count") {
    const auto cfg = experiment_from_json(small_traffic_experiment(3), ".");
    const auto serial = run_experiment(cfg, 0);
    const auto parallel = run_experiment(cfg, 4);
    CHECK(results_text(serial, 4) == results_text(parallel, 4));
    CHECK(report_to_json(serial) == report_to_json(parallel));
}

TEST_CASE("output files") {
    const auto dir = scratch_dir("outputs");
    const auto cfg = experiment_from_json(small_traffic_experiment(2), ".");
    write_outputs(run_experiment(cfg, 1), 4, dir / "a");
    write_outputs(run_experiment(cfg, 2), 4, dir / "b");
    for (const char* f : {"results.csv", "summary.csv", "fig1.csv", "report.json"}) {
        CHECK(!slurp(dir / "a" / f).empty());
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    CHECK(std::filesystem::exists(dir / "a" / "timings.csv"));
    const auto report = io::read_json_file(dir / "a" / "report.json");
    CHECK(report["runs"].size() == 4);
    CHECK(report["summary"][0]["n_ok"] == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("plan versus oracle cross-check") {
    CrossCheckConfig cfg;
    cfg.n_instances = 0;
    const auto empty = run_plan_vs_oracle(cfg);
    CHECK(empty.instances.empty());
    CHECK(empty.failures == 0);
    CHECK(empty.max_abs_gap == 0.0);

    cfg.n_instances = 8;
    cfg.seed = 3;
    const auto a = run_plan_vs_oracle(cfg);
    const auto b = run_plan_vs_oracle(cfg);
    CHECK(to_json(a) == to_json(b));
    CHECK(a.failures == 0);
    CHECK(a.max_rel_gap <= 1e-6);
    for (const auto& inst : a.instances) {
        CHECK(inst.rel_gap == doctest::Approx(inst.abs_gap / (1 + std::abs(inst.oracle_welfare))));
    }
}

TEST_CASE("thread count from the environment") {
    ::setenv("FAIR_MOMDP_THREADS", "3", 1);
    CHECK(threads_from_env() == 3);
    ::setenv("FAIR_MOMDP_THREADS", "many", 1);
    CHECK_THROWS_AS(threads_from_env(), InputError);
    ::unsetenv("FAIR_MOMDP_THREADS");
    CHECK(threads_from_env() >= 1);
}

TEST_CASE("command line") {
    const char* cli = std::getenv("FAIR_MOMDP_CLI");
    const char* src = std::getenv("FAIR_MOMDP_SOURCE_DIR");
    if (cli == nullptr || src == nullptr) {
        MESSAGE("FAIR_MOMDP_CLI or FAIR_MOMDP_SOURCE_DIR unset; skipping");
        return;
    }
    const auto dir = scratch_dir("cli");
    const std::string exe = std::string("\"") + cli + "\"";
    auto run = [&](const std::string& args, const std::string& out) {
        const std::string cmd = exe + " " + args + " > \"" + (dir / out).string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };

    REQUIRE(run("random-mdp --seed 2 --states 3 --actions 2 --objectives 2", "mdp.json") == 0);
    CHECK(run("validate \"" + (dir / "mdp.json").string() + "\"", "validate.txt") == 0);
    CHECK(slurp(dir / "validate.txt") == "ok\n");

    REQUIRE(run("plan \"" + (dir / "mdp.json").string() + "\"", "plan.json") == 0);
    REQUIRE(run("oracle \"" + (dir / "mdp.json").string() + "\"", "oracle.json") == 0);
    const auto plan = io::read_json_file(dir / "plan.json");
    const auto oracle = io::read_json_file(dir / "oracle.json");
    CHECK(plan["status"] == "optimal");
    CHECK(std::abs(plan["welfare"].get<double>() - oracle["welfare"].get<double>()) <= 1e-6);
    CHECK(oracle["deterministic_policies"] == 8);

    auto broken = io::read_json_file(dir / "mdp.json");
    broken["gamma"] = 1.0;
    io::write_json_file(dir / "broken.json", broken);
    CHECK(run("validate \"" + (dir / "broken.json").string() + "\"", "broken.txt") == 1);
    CHECK(run("validate \"" + (dir / "missing.json").string() + "\"", "missing.txt") != 0);
    CHECK(run("plan \"" + (dir / "mdp.json").string() + "\" --weights 0.5,0.5", "badw.txt") == 1);

    REQUIRE(run("crosscheck --instances 3 --seed 1", "cross.json") == 0);
    CHECK(io::read_json_file(dir / "cross.json")["failures"] == 0);

    auto exp = small_traffic_experiment(2);
    io::write_json_file(dir / "exp.json", exp);
    CHECK(run("bench \"" + (dir / "exp.json").string() + "\" --output \"" + (dir / "bench").string() + "\"",
              "bench.txt") == 0);
    CHECK(slurp(dir / "bench.txt").rfind("algorithm,n_ok", 0) == 0);
    const auto cfg = experiment_from_json(exp, dir);
    std::ostringstream expected;
    write_results_csv(expected, run_experiment(cfg, 1).runs, 4);
    CHECK(slurp(dir / "bench" / "results.csv") == expected.str());

    REQUIRE(run("train \"" + (dir / "exp.json").string() + "\" --seed-index 1 --out \"" +
                    (dir / "policies.json").string() + "\"",
                "train.txt") == 0);
    const auto policies = io::read_json_file(dir / "policies.json");
    REQUIRE(policies.size() == 2);
    REQUIRE(run("eval \"" + (dir / "exp.json").string() + "\" --policy \"" + (dir / "policies.json").string() +
                    "\" --seed-index 1",
                "eval.txt") == 0);
    const auto evaluated = io::read_json_file(dir / "eval.txt");
    REQUIRE(evaluated.size() == 2);
    const auto direct = evaluate_cell(cfg, 1, 1, train_cell(cfg, 1, 1).policy);
    CHECK(evaluated[1]["ggi_welfare"].get<double>() == direct.ggi_welfare);

    traffic::TrafficConfig tiny;
    tiny.n_lanes = 2;
    tiny.arrival_prob = {0.3, 0.2};
    tiny.phases = {{0}, {1}};
    tiny.queue_cap = 2;
    io::write_json_file(dir / "tiny.json", io::to_json(tiny));
    REQUIRE(run("traffic-mdp \"" + (dir / "tiny.json").string() + "\" --gamma 0.9", "tiny_mdp.json") == 0);
    CHECK(io::mdp_from_json(io::read_json_file(dir / "tiny_mdp.json")).n_states() == traffic::state_count(tiny));

    const std::string preset = (std::filesystem::path(src) / "presets" / "eight_lane.json").string();
    CHECK(run("traffic-mdp \"" + preset + "\"", "traffic.txt") == 1);
    std::filesystem::remove_all(dir);
}
