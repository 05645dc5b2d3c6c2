#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fair/momdp.hpp"
#include "fair/random.hpp"
#include "fair/traffic.hpp"

namespace fair {

struct Transition {
    std::size_t state;
    std::span<const double> reward; ///< valid until the next call on the environment
    bool done;
};

/**
 * Episodic environment with a finite encoded state space and vector rewards.
 *
 * Each instance owns its random stream. seed() resets the stream; reset()
 * starts a new episode without reseeding, so consecutive episodes differ.
 */
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::size_t n_states() const = 0;
    virtual std::size_t n_actions() const = 0;
    virtual std::size_t n_objectives() const = 0;
    /// Steps per episode.
    virtual std::size_t horizon() const = 0;

    virtual void seed(std::uint64_t s) = 0;
    virtual std::size_t reset() = 0;
    virtual Transition step(std::size_t action) = 0;

    virtual std::unique_ptr<Environment> clone() const = 0;
};

class TrafficEnv final : public Environment {
public:
    explicit TrafficEnv(traffic::TrafficConfig cfg);

    std::size_t n_states() const override { return n_states_; }
    std::size_t n_actions() const override { return cfg_.phases.size(); }
    std::size_t n_objectives() const override { return cfg_.n_lanes; }
    std::size_t horizon() const override { return cfg_.horizon; }

    void seed(std::uint64_t s) override { rng_.seed(s); }
    std::size_t reset() override;
    Transition step(std::size_t action) override;

    std::unique_ptr<Environment> clone() const override { return std::make_unique<TrafficEnv>(*this); }

    const traffic::TrafficConfig& config() const noexcept { return cfg_; }
    const traffic::EnvState& state() const noexcept { return state_; }

private:
    traffic::TrafficConfig cfg_;
    std::size_t n_states_;
    Rng rng_;
    traffic::EnvState state_;
    std::vector<double> reward_;
};

/// Samples trajectories of an MoMdp: initial state from mu, successors from the transition rows.
class MdpEnv final : public Environment {
public:
    MdpEnv(MoMdp mdp, std::size_t horizon);

    std::size_t n_states() const override { return mdp_->n_states(); }
    std::size_t n_actions() const override { return mdp_->n_actions(); }
    std::size_t n_objectives() const override { return mdp_->n_objectives(); }
    std::size_t horizon() const override { return horizon_; }

    void seed(std::uint64_t s) override { rng_.seed(s); }
    std::size_t reset() override;
    Transition step(std::size_t action) override;

    std::unique_ptr<Environment> clone() const override { return std::make_unique<MdpEnv>(*this); }

    const MoMdp& mdp() const noexcept { return *mdp_; }

private:
    std::shared_ptr<const MoMdp> mdp_;
    std::size_t horizon_;
    Rng rng_;
    std::size_t state_ = 0;
};

} // namespace fair
