#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "fair/serialization.hpp"

using namespace fair;
using fair::io::Json;

namespace {

std::string error_of(auto&& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("mdp round trip is exact") {
    const auto m = random_mdp(3, 4, 3, 2, 0.85);
    const auto back = io::mdp_from_json(Json::parse(io::to_json(m).dump()));
    REQUIRE(back.n_states() == 4);
    REQUIRE(back.n_actions() == 3);
    REQUIRE(back.n_objectives() == 2);
    CHECK(back.gamma() == 0.85);
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(back.mu()[s] == m.mu()[s]);
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t t = 0; t < 4; ++t) {
                CHECK(back.probability(s, a, t) == m.probability(s, a, t));
            }
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(back.reward(s, a)[i] == m.reward(s, a)[i]);
            }
        }
    }
    CHECK(io::to_json(back) == io::to_json(m));
}

TEST_CASE("mdp reader names the problem") {
    auto j = io::to_json(random_mdp(0, 2, 2, 2));
    auto missing = j;
    missing.erase("gamma");
    CHECK(error_of([&] { io::mdp_from_json(missing); }).find("'gamma'") != std::string::npos);

    auto wrong_type = j;
    wrong_type["mu"] = "uniform";
    CHECK(error_of([&] { io::mdp_from_json(wrong_type); }).find("'mu'") != std::string::npos);

    auto short_reward = j;
    short_reward["reward"][1][0] = Json::array({1.0});
    CHECK(error_of([&] { io::mdp_from_json(short_reward); }).find("s=1, a=0") != std::string::npos);

    CHECK_THROWS_AS(io::mdp_from_json(Json::array()), InputError);
}

TEST_CASE("policy round trip and validation") {
    Policy pi(2, 3);
    pi(0, 0) = 0.1;
    pi(0, 1) = 0.2;
    pi(0, 2) = 0.7;
    pi(1, 2) = 1.0;
    const auto back = io::policy_from_json(Json::parse(io::to_json(pi).dump()));
    CHECK(back.matrix().rows() == 2);
    for (std::size_t a = 0; a < 3; ++a) {
        CHECK(back(0, a) == pi(0, a));
        CHECK(back(1, a) == pi(1, a));
    }
    CHECK_THROWS_AS(io::policy_from_json(Json::parse("[[0.5, 0.5], [1.0]]")), InputError);
    CHECK_THROWS_AS(io::policy_from_json(Json::parse("[]")), InputError);
    CHECK_THROWS_AS(io::policy_from_json(Json::parse("{\"a\": 1}")), InputError);
}

TEST_CASE("welfare and weights") {
    const auto w = GiniWeights::halving(3);
    const auto spec = io::welfare_from_json(io::to_json(WelfareSpec::ggi(w)));
    REQUIRE(spec.weights() != nullptr);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(spec.weights()->values()[i] == w.values()[i]);
    }
    CHECK(io::welfare_from_json(Json::parse(R"({"kind":"maximin"})")).name() == "maximin");
    CHECK(io::welfare_from_json(Json::parse(R"({"kind":"utilitarian"})")).name() == "utilitarian");
    CHECK(error_of([] { io::welfare_from_json(Json::parse(R"({"kind":"nash"})")); }).find("nash") !=
          std::string::npos);
    CHECK(error_of([] { io::welfare_from_json(Json::parse(R"({"kind":"ggi"})")); }).find("'weights'") !=
          std::string::npos);
    // equal weights are not strictly decreasing
    CHECK_THROWS_AS(io::weights_from_json(Json::parse("[0.5, 0.5]")), InputError);
    CHECK_THROWS_AS(io::weights_from_json(Json::parse("\"halving\"")), InputError);
}

TEST_CASE("traffic config round trip") {
    traffic::TrafficConfig cfg;
    cfg.arrival_prob = {0.1, 0.2, 0.3, 0.05};
    cfg.queue_cap = 4;
    cfg.switch_penalty_steps = 2;
    cfg.horizon = 77;
    cfg.seed = 5;
    const auto back = io::traffic_from_json(io::to_json(cfg));
    CHECK(back.n_lanes == cfg.n_lanes);
    CHECK(back.arrival_prob == cfg.arrival_prob);
    CHECK(back.phases == cfg.phases);
    CHECK(back.service_per_step == cfg.service_per_step);
    CHECK(back.queue_cap == 4);
    CHECK(back.switch_penalty_steps == 2);
    CHECK(back.horizon == 77);
    CHECK(back.seed == 5);

    auto j = io::to_json(cfg);
    j.erase("horizon");
    CHECK(io::traffic_from_json(j).horizon == traffic::TrafficConfig{}.horizon);
    j.erase("phases");
    CHECK(error_of([&] { io::traffic_from_json(j); }).find("'phases'") != std::string::npos);
    auto bad = io::to_json(cfg);
    bad["arrival_prob"] = Json::array({0.1, 0.2});
    CHECK_THROWS_AS(io::traffic_from_json(bad), InputError);
}

TEST_CASE("learn config") {
    LearnConfig cfg;
    cfg.episodes = 321;
    cfg.steps_per_episode = 50;
    cfg.learning_rate = {0.3, 500};
    cfg.epsilon = {0.9, 0.1, 0.25};
    cfg.gamma = 0.95;
    cfg.seed = 17;
    cfg.batch_size = 8;
    cfg.normalize_advantages = false;
    const auto back = io::learn_config_from_json(io::to_json(cfg));
    CHECK(io::to_json(back) == io::to_json(cfg));

    const auto partial = io::learn_config_from_json(Json::parse(R"({"episodes": 10, "learning_rate": 0.2, "epsilon": 0.1})"));
    CHECK(partial.episodes == 10);
    CHECK(partial.learning_rate.initial == 0.2);
    CHECK(partial.learning_rate.tau == LearningRateSchedule{}.tau);
    CHECK(partial.epsilon.start == 0.1);
    CHECK(partial.epsilon.end == 0.1);
    CHECK(partial.gamma == LearnConfig{}.gamma);

    CHECK(error_of([] { io::learn_config_from_json(Json::parse(R"({"gamma": "high"})")); }).find("'gamma'") !=
          std::string::npos);
    CHECK_THROWS_AS(io::learn_config_from_json(Json::parse(R"({"learning_rate": 1.5})")), InputError);
    CHECK_THROWS_AS(io::learn_config_from_json(Json::parse("[1]")), InputError);
}

TEST_CASE("plan result") {
    const auto r = ggi_plan(random_mdp(1, 3, 2, 2), GiniWeights::halving(2));
    const auto j = io::to_json(r);
    CHECK(j["status"] == "optimal");
    CHECK(j["welfare"].get<double>() == r.welfare);
    CHECK(j["value"].size() == 2);
    CHECK(j["policy"].size() == 3);
}

TEST_CASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "fair_momdp_serialization_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "mdp.json";
    const auto j = io::to_json(random_mdp(2, 3, 2, 2));
    io::write_json_file(path, j);
    CHECK(io::read_json_file(path) == j);
    CHECK_THROWS_AS(io::read_json_file(dir / "absent.json"), InputError);
    {
        std::ofstream(dir / "broken.json") << "{\"n_states\": ";
    }
    CHECK_THROWS_AS(io::read_json_file(dir / "broken.json"), InputError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("format_double") {
    CHECK(io::format_double(0.0) == "0");
    CHECK(io::format_double(-0.0) == "0");
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(-2.5) == "-2.5");
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(io::format_double(std::nan("")) == "nan");
    for (double v : {1.0 / 3.0, -0.6978856666666667, 1e-300, 123456789.125}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
}
