#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fair/linalg.hpp"
#include "fair/welfare.hpp"

namespace fair {

struct Successor {
    std::size_t state;
    double prob;
};

/**
 * Finite multiobjective MDP with discounted criterion.
 *
 * Transitions are stored per (state, action) as a list of successors with
 * nonzero probability, so structured models (the traffic intersection) stay
 * compact. The JSON form is dense; see serialization.hpp.
 *
 * Construction does not check the model. Call validate() or require_valid().
 */
class MoMdp {
public:
    MoMdp(std::size_t n_states, std::size_t n_actions, std::size_t n_objectives, double gamma);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t n_objectives() const noexcept { return n_objectives_; }

    double gamma() const noexcept { return gamma_; }
    void set_gamma(double g) noexcept { gamma_ = g; }

    std::span<const double> mu() const noexcept { return mu_; }
    void set_mu(std::vector<double> mu);

    std::span<const Successor> successors(std::size_t s, std::size_t a) const { return transitions_[s * n_actions_ + a]; }
    void set_successors(std::size_t s, std::size_t a, std::vector<Successor> row);
    /// Dense row of length n_states; zero entries are dropped.
    void set_transition_row(std::size_t s, std::size_t a, std::span<const double> probs);
    double probability(std::size_t s, std::size_t a, std::size_t next) const;

    std::span<const double> reward(std::size_t s, std::size_t a) const {
        return {rewards_.data() + (s * n_actions_ + a) * n_objectives_, n_objectives_};
    }
    std::span<double> reward(std::size_t s, std::size_t a) {
        return {rewards_.data() + (s * n_actions_ + a) * n_objectives_, n_objectives_};
    }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::size_t n_objectives_;
    double gamma_;
    std::vector<double> mu_;
    std::vector<std::vector<Successor>> transitions_;
    std::vector<double> rewards_;
};

/// Stationary stochastic policy: probs(s, a) = pi(a | s).
class Policy {
public:
    Policy(std::size_t n_states, std::size_t n_actions) : probs_(n_states, n_actions) {}
    explicit Policy(DenseMatrix probs) : probs_(std::move(probs)) {}

    static Policy uniform(std::size_t n_states, std::size_t n_actions);
    static Policy deterministic(std::span<const std::size_t> actions, std::size_t n_actions);

    std::size_t n_states() const noexcept { return probs_.rows(); }
    std::size_t n_actions() const noexcept { return probs_.cols(); }

    double operator()(std::size_t s, std::size_t a) const { return probs_(s, a); }
    double& operator()(std::size_t s, std::size_t a) { return probs_(s, a); }
    std::span<const double> row(std::size_t s) const { return probs_.row(s); }
    std::span<double> row(std::size_t s) { return probs_.row(s); }

    const DenseMatrix& matrix() const noexcept { return probs_; }

private:
    DenseMatrix probs_;
};

/// Unnormalized discounted state-action visitation mass; total mass is 1/(1 - gamma).
class OccupancyMeasure {
public:
    OccupancyMeasure(std::size_t n_states, std::size_t n_actions) : x_(n_states, n_actions) {}
    explicit OccupancyMeasure(DenseMatrix x) : x_(std::move(x)) {}

    std::size_t n_states() const noexcept { return x_.rows(); }
    std::size_t n_actions() const noexcept { return x_.cols(); }

    double operator()(std::size_t s, std::size_t a) const { return x_(s, a); }
    double& operator()(std::size_t s, std::size_t a) { return x_(s, a); }
    std::span<const double> row(std::size_t s) const { return x_.row(s); }

    double total() const noexcept;

private:
    DenseMatrix x_;
};

/// Every violated model invariant, one message each. Empty means valid.
std::vector<std::string> validate(const MoMdp& mdp);

/// Throws InputError listing the diagnostics of validate(), if any.
void require_valid(const MoMdp& mdp);

std::vector<std::string> validate(const MoMdp& mdp, const Policy& pi);

/// Policy-averaged transition matrix and reward of pi.
struct PolicyModel {
    DenseMatrix transition; // S x S
    DenseMatrix reward;     // S x n
};
PolicyModel policy_model(const MoMdp& mdp, const Policy& pi);

/// V^pi as an S x n matrix: row s is the value vector of state s.
DenseMatrix evaluate_policy(const MoMdp& mdp, const Policy& pi);

/// sum_s mu(s) V(s, .)
ValueVector mu_average(const MoMdp& mdp, const DenseMatrix& values);

/// H(sum_s mu(s) V^pi(s)). Welfare is applied after averaging over initial states.
double objective_value(const MoMdp& mdp, const Policy& pi, const WelfareSpec& welfare);

OccupancyMeasure occupancy_measure(const MoMdp& mdp, const Policy& pi);

/// v_i = sum_{s,a} x(s,a) r_i(s,a)
ValueVector value_from_occupancy(const MoMdp& mdp, const OccupancyMeasure& x);

/// pi(a|s) proportional to x(s,a); uniform where the state carries (numerically) no mass.
Policy policy_from_occupancy(const OccupancyMeasure& x);

/// Largest flow-constraint violation of x, max_s |sum_a x(s,a) - mu(s) - gamma sum P(s|s',a') x(s',a')|.
double flow_violation(const MoMdp& mdp, const OccupancyMeasure& x);

/**
 * Random test instance. Transition rows are normalized uniform draws, rewards
 * uniform in [0, 1), mu uniform. Deterministic in seed.
 */
MoMdp random_mdp(std::uint64_t seed, std::size_t n_states, std::size_t n_actions, std::size_t n_objectives,
                 double gamma = 0.9);

} // namespace fair
