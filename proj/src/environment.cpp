#include "fair/environment.hpp"

#include <string>

namespace fair {

TrafficEnv::TrafficEnv(traffic::TrafficConfig cfg) : cfg_(std::move(cfg)), n_states_(0), rng_(cfg_.seed) {
    traffic::validate(cfg_);
    n_states_ = traffic::state_count(cfg_);
    state_ = traffic::reset(cfg_, rng_, cfg_.seed);
    reward_.assign(cfg_.n_lanes, 0.0);
}

std::size_t TrafficEnv::reset() {
    std::fill(state_.queues.begin(), state_.queues.end(), 0);
    state_.current_phase = 0;
    state_.red_timer = 0;
    return 0;
}

Transition TrafficEnv::step(std::size_t action) {
    traffic::step_inplace(cfg_, state_, action, rng_, reward_);
    return {traffic::encode_state(state_, cfg_), reward_, false};
}

MdpEnv::MdpEnv(MoMdp mdp, std::size_t horizon) : mdp_(std::make_shared<const MoMdp>(std::move(mdp))), horizon_(horizon) {
    require_valid(*mdp_);
    if (horizon_ == 0) {
        throw InputError("MdpEnv: horizon must be at least 1");
    }
}

namespace {

template <typename Weights, typename Index>
std::size_t sample_index(double u, std::size_t n, Weights&& weight_of, Index&& index_of) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = weight_of(k);
        if (w <= 0.0) {
            continue;
        }
        acc += w;
        last = index_of(k);
        if (u < acc) {
            return last;
        }
    }
    return last; // rounding: fall back to the last positive entry
}

} // namespace

std::size_t MdpEnv::reset() {
    const auto mu = mdp_->mu();
    state_ = sample_index(
        rng_.uniform(), mu.size(), [&](std::size_t k) { return mu[k]; }, [](std::size_t k) { return k; });
    return state_;
}

Transition MdpEnv::step(std::size_t action) {
    if (action >= mdp_->n_actions()) {
        throw InputError("MdpEnv: action " + std::to_string(action) + " out of range");
    }
    const auto reward = mdp_->reward(state_, action);
    const auto succ = mdp_->successors(state_, action);
    state_ = sample_index(
        rng_.uniform(), succ.size(), [&](std::size_t k) { return succ[k].prob; },
        [&](std::size_t k) { return succ[k].state; });
    return {state_, reward, false};
}

} // namespace fair
