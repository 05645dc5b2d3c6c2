#include "fair/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fair::traffic {

void validate(const TrafficConfig& cfg) {
    if (cfg.n_lanes == 0) {
        throw InputError("traffic: n_lanes must be at least 1");
    }
    if (cfg.arrival_prob.size() != cfg.n_lanes) {
        throw InputError("traffic: arrival_prob must have n_lanes entries");
    }
    for (double p : cfg.arrival_prob) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InputError("traffic: arrival probabilities must lie in [0, 1]");
        }
    }
    if (cfg.phases.empty()) {
        throw InputError("traffic: at least one phase required");
    }
    std::vector<bool> covered(cfg.n_lanes, false);
    for (const auto& phase : cfg.phases) {
        for (std::size_t lane : phase) {
            if (lane >= cfg.n_lanes) {
                throw InputError("traffic: phase references lane " + std::to_string(lane));
            }
            covered[lane] = true;
        }
    }
    for (std::size_t i = 0; i < cfg.n_lanes; ++i) {
        if (!covered[i]) {
            throw InputError("traffic: lane " + std::to_string(i) + " is not served by any phase");
        }
    }
    if (cfg.queue_cap == 0) {
        throw InputError("traffic: queue_cap must be at least 1");
    }
    if (cfg.horizon == 0) {
        throw InputError("traffic: horizon must be at least 1");
    }
}

EnvState reset(const TrafficConfig& cfg, Rng& rng, std::uint64_t seed) {
    validate(cfg);
    rng.seed(seed);
    return EnvState{std::vector<std::size_t>(cfg.n_lanes, 0), 0, 0};
}

void step_inplace(const TrafficConfig& cfg, EnvState& state, std::size_t action, Rng& rng, std::span<double> reward) {
    if (action >= cfg.phases.size()) {
        throw InputError("traffic: action " + std::to_string(action) + " is not a phase index");
    }
    if (action != state.current_phase) {
        state.red_timer = cfg.switch_penalty_steps;
        state.current_phase = action;
    }
    if (state.red_timer > 0) {
        --state.red_timer;
    } else {
        for (std::size_t lane : cfg.phases[state.current_phase]) {
            auto& q = state.queues[lane];
            q -= std::min(q, cfg.service_per_step);
        }
    }
    for (std::size_t i = 0; i < cfg.n_lanes; ++i) {
        if (rng.uniform() < cfg.arrival_prob[i] && state.queues[i] < cfg.queue_cap) {
            ++state.queues[i];
        }
        reward[i] = -static_cast<double>(state.queues[i]);
    }
}

StepOutcome step(const TrafficConfig& cfg, const EnvState& state, std::size_t action, Rng& rng) {
    StepOutcome out{state, ValueVector(cfg.n_lanes, 0.0), false};
    step_inplace(cfg, out.next_state, action, rng, out.reward);
    return out;
}

std::size_t state_count(const TrafficConfig& cfg) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < cfg.n_lanes; ++i) {
        n *= cfg.queue_cap + 1;
    }
    return n * cfg.phases.size() * (cfg.switch_penalty_steps + 1);
}

std::size_t encode_state(const EnvState& state, const TrafficConfig& cfg) {
    std::size_t index = state.red_timer;
    index = index * cfg.phases.size() + state.current_phase;
    for (std::size_t i = cfg.n_lanes; i-- > 0;) {
        index = index * (cfg.queue_cap + 1) + state.queues[i];
    }
    return index;
}

EnvState decode_state(std::size_t index, const TrafficConfig& cfg) {
    EnvState st;
    st.queues.resize(cfg.n_lanes);
    for (std::size_t i = 0; i < cfg.n_lanes; ++i) {
        st.queues[i] = index % (cfg.queue_cap + 1);
        index /= cfg.queue_cap + 1;
    }
    st.current_phase = index % cfg.phases.size();
    index /= cfg.phases.size();
    st.red_timer = index;
    return st;
}

MoMdp as_momdp(const TrafficConfig& cfg, double gamma) {
    validate(cfg);
    const std::size_t S = state_count(cfg);
    if (S > kMaxExactStates) {
        throw InputError("traffic: " + std::to_string(S) + " states exceeds the exact-model limit of " +
                         std::to_string(kMaxExactStates));
    }
    if (cfg.n_lanes > 20) {
        throw InputError("traffic: too many lanes to enumerate arrival outcomes");
    }
    const std::size_t A = cfg.phases.size();
    const std::size_t L = cfg.n_lanes;
    MoMdp mdp(S, A, L, gamma);

    const std::size_t outcomes = std::size_t{1} << L;
    std::map<std::size_t, double> row;
    for (std::size_t s = 0; s < S; ++s) {
        const EnvState start = decode_state(s, cfg);
        for (std::size_t a = 0; a < A; ++a) {
            // deterministic part of the step: phase switch and service
            EnvState served = start;
            if (a != served.current_phase) {
                served.red_timer = cfg.switch_penalty_steps;
                served.current_phase = a;
            }
            if (served.red_timer > 0) {
                --served.red_timer;
            } else {
                for (std::size_t lane : cfg.phases[a]) {
                    auto& q = served.queues[lane];
                    q -= std::min(q, cfg.service_per_step);
                }
            }
            row.clear();
            auto reward = mdp.reward(s, a);
            std::fill(reward.begin(), reward.end(), 0.0);
            EnvState next = served;
            for (std::size_t mask = 0; mask < outcomes; ++mask) {
                double p = 1.0;
                for (std::size_t i = 0; i < L; ++i) {
                    const bool arrives = (mask >> i) & 1U;
                    p *= arrives ? cfg.arrival_prob[i] : 1.0 - cfg.arrival_prob[i];
                    next.queues[i] = std::min(served.queues[i] + (arrives ? 1 : 0), cfg.queue_cap);
                }
                if (p == 0.0) {
                    continue;
                }
                row[encode_state(next, cfg)] += p;
                for (std::size_t i = 0; i < L; ++i) {
                    reward[i] -= p * static_cast<double>(next.queues[i]);
                }
            }
            std::vector<Successor> succ;
            succ.reserve(row.size());
            for (auto [t, p] : row) {
                succ.push_back({t, p});
            }
            mdp.set_successors(s, a, std::move(succ));
        }
    }
    std::vector<double> mu(S, 0.0);
    mu[encode_state(EnvState{std::vector<std::size_t>(L, 0), 0, 0}, cfg)] = 1.0;
    mdp.set_mu(std::move(mu));
    return mdp;
}

} // namespace fair::traffic
