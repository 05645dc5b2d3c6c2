#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fair/momdp.hpp"
#include "fair/simplex.hpp"
#include "fair/welfare.hpp"

namespace fair {

enum class PlanStatus { Optimal, Infeasible, NumericalFailure };

std::string to_string(PlanStatus s);

struct PlanResult {
    PlanStatus status = PlanStatus::NumericalFailure;
    Policy policy{0, 0};
    ValueVector value;  ///< mu-averaged per-objective value of the policy
    double welfare = 0.0;
    OccupancyMeasure occupancy{0, 0};
};

/**
 * Maximizes G_w(sum_s mu(s) V^pi(s)) over stationary policies with one LP in
 * occupancy variables x(s,a).
 *
 * The welfare is linearized through the ordered-weighted-average identity
 * G_w(v) = sum_k (w_k - w_{k+1}) L_k(v), where L_k(v), the sum of the k
 * smallest components, equals max_t { k t - sum_i max(0, t - v_i) }.
 * Each L_k gets a free variable t_k and nonnegative slacks d_ik >= t_k - v_i.
 */
PlanResult ggi_plan(const MoMdp& mdp, const GiniWeights& w, const LpOptions& options = {});

/// Maximin planning as GGI with weights (1, delta, delta^2, ...) normalized.
PlanResult maximin_plan(const MoMdp& mdp, double delta = 1e-6, const LpOptions& options = {});

/// Hard cap on |A|^|S| for the enumeration oracle.
inline constexpr std::size_t kEnumerationLimit = 1'000'000;

/// Number of deterministic stationary policies, or throws InputError past kEnumerationLimit.
std::size_t deterministic_policy_count(const MoMdp& mdp);

/**
 * Calls visit(actions, value) for every deterministic stationary policy in
 * lexicographic order of the action assignment (state 0 most significant),
 * where value is the mu-averaged value vector of that policy.
 */
void enumerate_deterministic_policies(
    const MoMdp& mdp, const std::function<void(const std::vector<std::size_t>&, const ValueVector&)>& visit);

struct OracleResult {
    double welfare = 0.0;
    ValueVector value;
    std::size_t n_policies = 0;
    /// Best welfare achieved by a single deterministic policy.
    double best_deterministic = 0.0;
};

/**
 * Independent check of ggi_plan: enumerates deterministic policies and
 * maximizes G_w over mixtures of their value vectors. Achievable discounted
 * values of stationary policies form the convex hull of the deterministic
 * ones, so both optima coincide.
 */
OracleResult oracle_ggi_optimum(const MoMdp& mdp, const GiniWeights& w, const LpOptions& options = {});

} // namespace fair
