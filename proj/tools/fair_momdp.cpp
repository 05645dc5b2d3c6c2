// fair-momdp: command line front end for planning, learning and benchmarks.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fair/harness.hpp"
#include "fair/momdp.hpp"
#include "fair/planner.hpp"
#include "fair/serialization.hpp"
#include "fair/traffic.hpp"

namespace {

using fair::io::Json;

fair::GiniWeights weights_or_default(const std::vector<double>& given, std::size_t n) {
    if (given.empty()) {
        return fair::GiniWeights::halving(n);
    }
    if (given.size() != n) {
        throw fair::InputError("--weights has " + std::to_string(given.size()) + " entries, the MDP has " +
                               std::to_string(n) + " objectives");
    }
    return fair::GiniWeights(given);
}

fair::MoMdp load_mdp(const std::string& path) { return fair::io::mdp_from_json(fair::io::read_json_file(path)); }

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_validate(const std::string& path) {
    const auto diag = fair::validate(load_mdp(path));
    if (diag.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    for (const auto& d : diag) {
        std::cout << d << '\n';
    }
    return 1;
}

int cmd_plan(const std::string& path, const std::vector<double>& weights, bool maximin) {
    const auto mdp = load_mdp(path);
    const auto result = maximin ? fair::maximin_plan(mdp) : fair::ggi_plan(mdp, weights_or_default(weights, mdp.n_objectives()));
    print(fair::io::to_json(result));
    return result.status == fair::PlanStatus::Optimal ? 0 : 2;
}

int cmd_oracle(const std::string& path, const std::vector<double>& weights) {
    const auto mdp = load_mdp(path);
    const auto result = fair::oracle_ggi_optimum(mdp, weights_or_default(weights, mdp.n_objectives()));
    print(Json{{"welfare", result.welfare},
               {"value", result.value},
               {"deterministic_policies", result.n_policies},
               {"best_deterministic_welfare", result.best_deterministic}});
    return 0;
}

int cmd_train(const std::string& path, std::size_t seed_index, const std::string& out) {
    const auto cfg = fair::harness::load_experiment(path);
    Json doc = Json::array();
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
        const auto trained = fair::harness::train_cell(cfg, a, seed_index);
        doc.push_back({{"algorithm", trained.algorithm},
                       {"algorithm_index", a},
                       {"seed_index", seed_index},
                       {"policy", fair::io::to_json(trained.policy)}});
        std::cerr << "trained " << trained.algorithm << '\n';
    }
    if (out.empty()) {
        print(doc);
    } else {
        fair::io::write_json_file(out, doc);
    }
    return 0;
}

int cmd_eval(const std::string& path, const std::string& policy_file, std::size_t seed_index) {
    const auto cfg = fair::harness::load_experiment(path);
    const Json doc = fair::io::read_json_file(policy_file);
    Json out = Json::array();
    for (const auto& entry : doc) {
        const auto a = entry.at("algorithm_index").get<std::size_t>();
        const auto r = fair::harness::evaluate_cell(cfg, a, seed_index, fair::io::policy_from_json(entry.at("policy")));
        out.push_back({{"algorithm", r.algorithm},
                       {"per_objective_mean", r.per_objective_mean},
                       {"per_objective_std", r.per_objective_std},
                       {"utilitarian_mean", r.utilitarian_mean},
                       {"ggi_welfare", r.ggi_welfare},
                       {"min_objective", r.min_objective},
                       {"mean_cost", r.mean_cost()},
                       {"cost_spread", r.cost_spread()}});
    }
    print(out);
    return 0;
}

int cmd_bench(const std::string& path, const std::string& output) {
    const auto cfg = fair::harness::load_experiment(path);
    const std::filesystem::path dir = output.empty() ? cfg.output_path : std::filesystem::path(output);
    const auto report = fair::harness::run_experiment(cfg, fair::harness::threads_from_env());
    const std::size_t n = std::visit(
        [](const auto& e) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(e)>, fair::traffic::TrafficConfig>) {
                return e.n_lanes;
            } else {
                return e.mdp.n_objectives();
            }
        },
        cfg.env);
    fair::harness::write_outputs(report, n, dir);
    fair::harness::write_summary_csv(std::cout, report.summary);
    for (const auto& row : report.summary) {
        if (row.n_failed > 0) {
            std::cerr << row.algorithm << ": " << row.n_failed << " failed cells\n";
            return 3;
        }
    }
    return 0;
}

int cmd_crosscheck(const fair::harness::CrossCheckConfig& cfg) {
    const auto report = fair::harness::run_plan_vs_oracle(cfg);
    print(fair::harness::to_json(report));
    return report.failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair welfare planning and learning for multiobjective MDPs"};
    app.require_subcommand(1);

    std::string file;
    std::vector<double> weights;
    bool maximin = false;

    auto* validate = app.add_subcommand("validate", "Check an MDP file and list every violated constraint");
    validate->add_option("mdp", file, "MDP JSON file")->required()->check(CLI::ExistingFile);

    auto* plan = app.add_subcommand("plan", "Exact GGI-optimal stationary policy via the occupancy LP");
    plan->add_option("mdp", file, "MDP JSON file")->required()->check(CLI::ExistingFile);
    plan->add_option("--weights", weights, "Strictly decreasing GGI weights (default: halving)")->delimiter(',');
    plan->add_flag("--maximin", maximin, "Plan for maximin through near-lexicographic weights");

    auto* oracle = app.add_subcommand("oracle", "GGI optimum by deterministic-policy enumeration");
    oracle->add_option("mdp", file, "MDP JSON file")->required()->check(CLI::ExistingFile);
    oracle->add_option("--weights", weights, "Strictly decreasing GGI weights (default: halving)")->delimiter(',');

    std::size_t seed_index = 0;
    std::string out;
    auto* train = app.add_subcommand("train", "Train every algorithm of an experiment for one seed");
    train->add_option("experiment", file, "Experiment JSON file")->required()->check(CLI::ExistingFile);
    train->add_option("--seed-index", seed_index, "Seed index within the experiment");
    train->add_option("--out", out, "Write learned policies here instead of stdout");

    std::string policy_file;
    auto* eval = app.add_subcommand("eval", "Evaluate policies written by train");
    eval->add_option("experiment", file, "Experiment JSON file")->required()->check(CLI::ExistingFile);
    eval->add_option("--policy", policy_file, "Policies JSON from train --out")->required()->check(CLI::ExistingFile);
    eval->add_option("--seed-index", seed_index, "Seed index of the evaluation stream");

    auto* bench = app.add_subcommand("bench", "Run the full (algorithm x seed) comparison and write CSV/JSON");
    bench->add_option("experiment", file, "Experiment JSON file")->required()->check(CLI::ExistingFile);
    bench->add_option("--output", out, "Output directory (default: output_path from the config)");

    fair::harness::CrossCheckConfig cross;
    auto* crosscheck = app.add_subcommand("crosscheck", "Compare ggi_plan against the enumeration oracle on random MDPs");
    crosscheck->add_option("--instances", cross.n_instances);
    crosscheck->add_option("--seed", cross.seed);
    crosscheck->add_option("--states", cross.n_states);
    crosscheck->add_option("--actions", cross.n_actions);
    crosscheck->add_option("--objectives", cross.n_objectives);
    crosscheck->add_option("--gamma", cross.gamma);

    std::uint64_t rseed = 0;
    std::size_t rs = 4, ra = 2, rn = 3;
    double rgamma = 0.9;
    auto* random = app.add_subcommand("random-mdp", "Print a random MDP instance");
    random->add_option("--seed", rseed);
    random->add_option("--states", rs);
    random->add_option("--actions", ra);
    random->add_option("--objectives", rn);
    random->add_option("--gamma", rgamma);

    double tgamma = 0.95;
    auto* traffic_mdp = app.add_subcommand("traffic-mdp", "Print the exact MDP of a (small) traffic config");
    traffic_mdp->add_option("config", file, "Traffic config JSON")->required()->check(CLI::ExistingFile);
    traffic_mdp->add_option("--gamma", tgamma);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            return cmd_validate(file);
        }
        if (*plan) {
            return cmd_plan(file, weights, maximin);
        }
        if (*oracle) {
            return cmd_oracle(file, weights);
        }
        if (*train) {
            return cmd_train(file, seed_index, out);
        }
        if (*eval) {
            return cmd_eval(file, policy_file, seed_index);
        }
        if (*bench) {
            return cmd_bench(file, out);
        }
        if (*crosscheck) {
            return cmd_crosscheck(cross);
        }
        if (*random) {
            print(fair::io::to_json(fair::random_mdp(rseed, rs, ra, rn, rgamma)));
            return 0;
        }
        if (*traffic_mdp) {
            const auto cfg = fair::io::traffic_from_json(fair::io::read_json_file(file));
            print(fair::io::to_json(fair::traffic::as_momdp(cfg, tgamma)));
            return 0;
        }
    } catch (const fair::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
