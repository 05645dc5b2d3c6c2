#include "fair/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fair::io {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) {
        throw InputError(std::string("expected a JSON object holding key '") + key + "'");
    }
    auto it = j.find(key);
    if (it == j.end()) {
        throw InputError(std::string("missing key '") + key + "'");
    }
    return *it;
}

template <typename T>
T get_as(const Json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("key '") + key + "': " + e.what());
    }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    return get_as<T>(j, key);
}

} // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

Json to_json(const GiniWeights& w) { return Json(std::vector<double>(w.values().begin(), w.values().end())); }

GiniWeights weights_from_json(const Json& j) {
    try {
        return GiniWeights(j.get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("weights: ") + e.what());
    }
}

Json to_json(const WelfareSpec& spec) {
    Json j{{"kind", spec.name()}};
    if (const auto* w = spec.weights()) {
        j["weights"] = to_json(*w);
    }
    return j;
}

WelfareSpec welfare_from_json(const Json& j) {
    const auto kind = get_as<std::string>(j, "kind");
    if (kind == "ggi") {
        return WelfareSpec::ggi(weights_from_json(field(j, "weights")));
    }
    if (kind == "maximin") {
        return WelfareSpec::maximin();
    }
    if (kind == "utilitarian") {
        return WelfareSpec::utilitarian();
    }
    throw InputError("unknown welfare kind '" + kind + "'");
}

Json to_json(const MoMdp& mdp) {
    const std::size_t S = mdp.n_states();
    const std::size_t A = mdp.n_actions();
    Json transition = Json::array();
    Json reward = Json::array();
    std::vector<double> dense(S);
    for (std::size_t s = 0; s < S; ++s) {
        Json trow = Json::array();
        Json rrow = Json::array();
        for (std::size_t a = 0; a < A; ++a) {
            std::fill(dense.begin(), dense.end(), 0.0);
            for (const auto& succ : mdp.successors(s, a)) {
                dense.at(succ.state) += succ.prob;
            }
            trow.push_back(dense);
            const auto r = mdp.reward(s, a);
            rrow.push_back(std::vector<double>(r.begin(), r.end()));
        }
        transition.push_back(std::move(trow));
        reward.push_back(std::move(rrow));
    }
    return Json{{"n_states", S},
                {"n_actions", A},
                {"n_objectives", mdp.n_objectives()},
                {"gamma", mdp.gamma()},
                {"mu", std::vector<double>(mdp.mu().begin(), mdp.mu().end())},
                {"transition", std::move(transition)},
                {"reward", std::move(reward)}};
}

MoMdp mdp_from_json(const Json& j) {
    const auto S = get_as<std::size_t>(j, "n_states");
    const auto A = get_as<std::size_t>(j, "n_actions");
    const auto n = get_as<std::size_t>(j, "n_objectives");
    MoMdp mdp(S, A, n, get_as<double>(j, "gamma"));
    mdp.set_mu(get_as<std::vector<double>>(j, "mu"));
    const auto transition = get_as<std::vector<std::vector<std::vector<double>>>>(j, "transition");
    const auto reward = get_as<std::vector<std::vector<std::vector<double>>>>(j, "reward");
    if (transition.size() != S || reward.size() != S) {
        throw InputError("transition and reward must have n_states rows");
    }
    for (std::size_t s = 0; s < S; ++s) {
        if (transition[s].size() != A || reward[s].size() != A) {
            throw InputError("state " + std::to_string(s) + ": expected n_actions entries");
        }
        for (std::size_t a = 0; a < A; ++a) {
            if (reward[s][a].size() != n) {
                throw InputError("reward (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                                 "): expected n_objectives entries");
            }
            mdp.set_transition_row(s, a, transition[s][a]);
            std::copy(reward[s][a].begin(), reward[s][a].end(), mdp.reward(s, a).begin());
        }
    }
    return mdp;
}

Json to_json(const Policy& pi) {
    Json rows = Json::array();
    for (std::size_t s = 0; s < pi.n_states(); ++s) {
        rows.push_back(std::vector<double>(pi.row(s).begin(), pi.row(s).end()));
    }
    return rows;
}

Policy policy_from_json(const Json& j) {
    std::vector<std::vector<double>> rows;
    try {
        rows = j.get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("policy: ") + e.what());
    }
    if (rows.empty() || rows.front().empty()) {
        throw InputError("policy: need at least one state and one action");
    }
    Policy pi(rows.size(), rows.front().size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != pi.n_actions()) {
            throw InputError("policy: ragged rows");
        }
        std::copy(rows[s].begin(), rows[s].end(), pi.row(s).begin());
    }
    return pi;
}

Json to_json(const traffic::TrafficConfig& cfg) {
    return Json{{"n_lanes", cfg.n_lanes},
                {"arrival_prob", cfg.arrival_prob},
                {"phases", cfg.phases},
                {"service_per_step", cfg.service_per_step},
                {"queue_cap", cfg.queue_cap},
                {"switch_penalty_steps", cfg.switch_penalty_steps},
                {"horizon", cfg.horizon},
                {"seed", cfg.seed}};
}

traffic::TrafficConfig traffic_from_json(const Json& j) {
    traffic::TrafficConfig cfg;
    cfg.n_lanes = get_as<std::size_t>(j, "n_lanes");
    cfg.arrival_prob = get_as<std::vector<double>>(j, "arrival_prob");
    cfg.phases = get_as<std::vector<std::vector<std::size_t>>>(j, "phases");
    cfg.service_per_step = get_or<std::size_t>(j, "service_per_step", cfg.service_per_step);
    cfg.queue_cap = get_or<std::size_t>(j, "queue_cap", cfg.queue_cap);
    cfg.switch_penalty_steps = get_or<std::size_t>(j, "switch_penalty_steps", cfg.switch_penalty_steps);
    cfg.horizon = get_or<std::size_t>(j, "horizon", cfg.horizon);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    traffic::validate(cfg);
    return cfg;
}

Json to_json(const LearnConfig& cfg) {
    return Json{{"episodes", cfg.episodes},
                {"steps_per_episode", cfg.steps_per_episode},
                {"learning_rate", {{"initial", cfg.learning_rate.initial}, {"tau", cfg.learning_rate.tau}}},
                {"epsilon",
                 {{"start", cfg.epsilon.start}, {"end", cfg.epsilon.end}, {"decay_fraction", cfg.epsilon.decay_fraction}}},
                {"gamma", cfg.gamma},
                {"seed", cfg.seed},
                {"batch_size", cfg.batch_size},
                {"normalize_advantages", cfg.normalize_advantages}};
}

LearnConfig learn_config_from_json(const Json& j) {
    LearnConfig cfg;
    if (!j.is_object()) {
        throw InputError("learn config must be a JSON object");
    }
    cfg.episodes = get_or<std::size_t>(j, "episodes", cfg.episodes);
    cfg.steps_per_episode = get_or<std::size_t>(j, "steps_per_episode", cfg.steps_per_episode);
    if (j.contains("learning_rate")) {
        const Json& lr = j["learning_rate"];
        if (lr.is_number()) {
            cfg.learning_rate.initial = lr.get<double>();
        } else {
            cfg.learning_rate.initial = get_or<double>(lr, "initial", cfg.learning_rate.initial);
            cfg.learning_rate.tau = get_or<double>(lr, "tau", cfg.learning_rate.tau);
        }
    }
    if (j.contains("epsilon")) {
        const Json& eps = j["epsilon"];
        if (eps.is_number()) {
            cfg.epsilon.start = cfg.epsilon.end = eps.get<double>();
        } else {
            cfg.epsilon.start = get_or<double>(eps, "start", cfg.epsilon.start);
            cfg.epsilon.end = get_or<double>(eps, "end", cfg.epsilon.end);
            cfg.epsilon.decay_fraction = get_or<double>(eps, "decay_fraction", cfg.epsilon.decay_fraction);
        }
    }
    cfg.gamma = get_or<double>(j, "gamma", cfg.gamma);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.batch_size = get_or<std::size_t>(j, "batch_size", cfg.batch_size);
    cfg.normalize_advantages = get_or<bool>(j, "normalize_advantages", cfg.normalize_advantages);
    validate(cfg);
    return cfg;
}

Json to_json(const PlanResult& r) {
    Json j{{"status", to_string(r.status)}};
    if (r.status == PlanStatus::Optimal) {
        j["welfare"] = r.welfare;
        j["value"] = r.value;
        j["policy"] = to_json(r.policy);
    }
    return j;
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (v == 0.0) {
        return "0"; // also folds -0
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace fair::io
