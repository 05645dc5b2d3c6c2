#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fair/environment.hpp"
#include "fair/linalg.hpp"
#include "fair/momdp.hpp"
#include "fair/welfare.hpp"

namespace fair {

/// alpha_t = initial / (1 + t / tau); t counts updates (Q-learning) or iterations (policy gradient).
struct LearningRateSchedule {
    double initial = 0.1;
    double tau = 1e4;

    double at(std::size_t t) const noexcept { return initial / (1.0 + static_cast<double>(t) / tau); }
};

/// Linear decay from start to end over the first decay_fraction of the episodes, then constant.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    double decay_fraction = 0.5;

    double at(std::size_t episode, std::size_t total_episodes) const noexcept;
};

struct LearnConfig {
    std::size_t episodes = 1000;
    /// 0 uses the environment's horizon.
    std::size_t steps_per_episode = 0;
    LearningRateSchedule learning_rate;
    EpsilonSchedule epsilon;
    double gamma = 0.99;
    std::uint64_t seed = 0;
    /// Episodes per policy-gradient iteration.
    std::size_t batch_size = 16;
    /// Rescale policy-gradient advantages to unit RMS within each batch.
    bool normalize_advantages = true;
};

void validate(const LearnConfig& cfg);

struct CurvePoint {
    std::size_t episode;  ///< episodes completed when the point was logged
    ValueVector returns;  ///< discounted return per objective (batch mean for policy gradient)
    double welfare;       ///< the learner's own criterion applied to returns
};

using LearningCurve = std::vector<CurvePoint>;

/// Ties go to the lowest action index.
std::size_t argmax_action(std::span<const double> values);

class VectorQTable {
public:
    VectorQTable(std::size_t n_states, std::size_t n_actions, std::size_t n_objectives)
        : n_states_(n_states), n_actions_(n_actions), n_objectives_(n_objectives),
          q_(n_states * n_actions * n_objectives, 0.0) {}

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t n_objectives() const noexcept { return n_objectives_; }

    std::span<double> operator()(std::size_t s, std::size_t a) {
        return {q_.data() + (s * n_actions_ + a) * n_objectives_, n_objectives_};
    }
    std::span<const double> operator()(std::size_t s, std::size_t a) const {
        return {q_.data() + (s * n_actions_ + a) * n_objectives_, n_objectives_};
    }

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::size_t n_objectives_;
    std::vector<double> q_;
};

/// Tabular logits; pi(.|s) = softmax(theta(s, .)).
class SoftmaxPolicyParams {
public:
    SoftmaxPolicyParams(std::size_t n_states, std::size_t n_actions) : theta_(n_states, n_actions) {}

    std::size_t n_states() const noexcept { return theta_.rows(); }
    std::size_t n_actions() const noexcept { return theta_.cols(); }

    std::span<double> logits(std::size_t s) { return theta_.row(s); }
    std::span<const double> logits(std::size_t s) const { return theta_.row(s); }

    /// Writes pi(.|s) into out (size n_actions).
    void probabilities(std::size_t s, std::span<double> out) const;

    Policy to_policy() const;

private:
    DenseMatrix theta_;
};

struct ScalarQResult {
    DenseMatrix q; // S x A
    Policy greedy{0, 0};
    LearningCurve curve;
};

struct VectorQResult {
    VectorQTable q{0, 0, 0};
    Policy greedy{0, 0};
    LearningCurve curve;
};

struct PolicyGradientResult {
    SoftmaxPolicyParams params{0, 0};
    Policy policy{0, 0};
    LearningCurve curve;
};

/**
 * Epsilon-greedy Q-learning on the summed reward sum_i r_i. The fairness-blind
 * baseline.
 */
ScalarQResult utilitarian_q_learning(Environment& env, const LearnConfig& cfg);

/**
 * Vector-valued Q-learning with GGI-greedy action selection.
 *
 * Q(s,a) += alpha (r + gamma Q(s', a*) - Q(s,a)) componentwise, with
 * a* = argmax_a' ggi(Q(s',a'), w). Heuristic: greedy selection on a
 * non-linear welfare of Q-values is not a Bellman operator for the
 * scalarized objective, so this carries no optimality guarantee.
 */
VectorQResult ggi_q_learning(Environment& env, const GiniWeights& w, const LearnConfig& cfg);

/**
 * Batch REINFORCE on J = ggi(V, w), with V the expected discounted return
 * vector from the initial state distribution.
 *
 * Each iteration rolls out batch_size episodes, estimates V by the batch mean
 * return and takes g = ggi_subgradient(V, w). The policy then ascends
 * g . V using the scalarized rewards g . r_t: discounted rewards-to-go with
 * the batch mean at each time step as baseline.
 */
PolicyGradientResult ggi_policy_gradient(Environment& env, const GiniWeights& w, const LearnConfig& cfg);

struct EvalOptions {
    std::size_t episodes = 100;
    std::uint64_t seed = 0;
    /// Discount applied to the per-episode return.
    double gamma = 1.0;
    /// Divide each return by the episode length (average reward per step).
    bool per_step = false;
    /// 0 uses the environment's horizon.
    std::size_t steps_per_episode = 0;
};

struct EvalResult {
    ValueVector mean;
    ValueVector stddev;
    double utilitarian_mean = 0.0;
    double ggi = 0.0;
    double min_objective = 0.0;
};

/**
 * Monte Carlo estimate of per-objective returns of pi. The environment is
 * cloned, so the caller's instance is untouched; all randomness derives from
 * options.seed. stddev is the sample standard deviation across episodes.
 */
EvalResult evaluate_learned(const Environment& env, const Policy& pi, const EvalOptions& options,
                            const GiniWeights& report_weights);

} // namespace fair
