#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fair/momdp.hpp"
#include "fair/random.hpp"
#include "fair/welfare.hpp"

namespace fair::traffic {

/**
 * Single intersection with Bernoulli arrivals.
 *
 * Each action selects a phase, i.e. the set of lanes that get green. Changing
 * phase costs switch_penalty_steps of all-red. Waiting is measured by queue
 * length, and the reward of lane i is minus its queue after the step.
 */
struct TrafficConfig {
    std::size_t n_lanes = 4;
    std::vector<double> arrival_prob{0.40, 0.15, 0.15, 0.15};
    std::vector<std::vector<std::size_t>> phases{{0, 1}, {2, 3}};
    std::size_t service_per_step = 1;
    std::size_t queue_cap = 5;
    std::size_t switch_penalty_steps = 1;
    std::size_t horizon = 500;
    std::uint64_t seed = 0;
};

/// Throws InputError on the first violated invariant.
void validate(const TrafficConfig& cfg);

struct EnvState {
    std::vector<std::size_t> queues;
    std::size_t current_phase = 0;
    std::size_t red_timer = 0;

    bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
    EnvState next_state;
    ValueVector reward;
    bool done = false;
};

/// All queues empty, phase 0, no red. Seeds rng for the episode stream.
EnvState reset(const TrafficConfig& cfg, Rng& rng, std::uint64_t seed);

/**
 * One control step:
 *   1. a phase change starts switch_penalty_steps of all-red;
 *   2. during red nothing is served (the timer counts down), otherwise every
 *      green lane discharges up to service_per_step vehicles;
 *   3. each lane receives a Bernoulli arrival, clipped at queue_cap;
 *   4. reward_i = -queue_i.
 * Exactly one uniform draw per lane is consumed per step. done is never set;
 * episode length is the caller's concern.
 */
StepOutcome step(const TrafficConfig& cfg, const EnvState& state, std::size_t action, Rng& rng);

/// In-place variant of step() used by the simulation loop; writes the reward into `reward`.
void step_inplace(const TrafficConfig& cfg, EnvState& state, std::size_t action, Rng& rng, std::span<double> reward);

/// (queue_cap + 1)^n_lanes * |phases| * (switch_penalty_steps + 1)
std::size_t state_count(const TrafficConfig& cfg);

/// Mixed-radix index: lane 0 fastest, then phase, then red timer. The zero state maps to 0.
std::size_t encode_state(const EnvState& state, const TrafficConfig& cfg);
EnvState decode_state(std::size_t index, const TrafficConfig& cfg);

inline constexpr std::size_t kMaxExactStates = 200'000;

/**
 * Exact tabular model of the intersection: arrivals are marginalized over all
 * 2^n_lanes outcomes and rewards are the expected post-step values. mu is a
 * point mass on the reset state.
 */
MoMdp as_momdp(const TrafficConfig& cfg, double gamma);

} // namespace fair::traffic
