#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "fair/learner.hpp"
#include "fair/momdp.hpp"
#include "fair/planner.hpp"
#include "fair/traffic.hpp"
#include "fair/welfare.hpp"

// JSON forms of the toolkit's data types. Readers throw InputError with the
// offending key on malformed input. Objects are emitted with sorted keys.
namespace fair::io {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

/// {"kind":"ggi","weights":[...]} | {"kind":"maximin"} | {"kind":"utilitarian"}
Json to_json(const WelfareSpec& spec);
WelfareSpec welfare_from_json(const Json& j);

Json to_json(const GiniWeights& w);
GiniWeights weights_from_json(const Json& j);

/// {"n_states", "n_actions", "n_objectives", "gamma", "mu", "transition": [S][A][S], "reward": [S][A][n]}
Json to_json(const MoMdp& mdp);
MoMdp mdp_from_json(const Json& j);

/// [[pi(0|0), pi(1|0), ...], ...]
Json to_json(const Policy& pi);
Policy policy_from_json(const Json& j);

Json to_json(const traffic::TrafficConfig& cfg);
traffic::TrafficConfig traffic_from_json(const Json& j);

Json to_json(const LearnConfig& cfg);
/// Missing keys keep their defaults.
LearnConfig learn_config_from_json(const Json& j);

/// {"status", "welfare", "value", "policy"}
Json to_json(const PlanResult& r);

/// Shortest decimal form that round-trips, as used in CSV output.
std::string format_double(double v);

} // namespace fair::io
