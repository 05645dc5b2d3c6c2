#include "fair/planner.hpp"

#include <algorithm>
#include <cmath>

namespace fair {

std::string to_string(PlanStatus s) {
    switch (s) {
    case PlanStatus::Optimal:
        return "optimal";
    case PlanStatus::Infeasible:
        return "infeasible";
    case PlanStatus::NumericalFailure:
        return "numerical_failure";
    }
    return "unknown";
}

namespace {

void require_weights_match(const MoMdp& mdp, const GiniWeights& w) {
    if (w.size() != mdp.n_objectives()) {
        throw InputError("weights have " + std::to_string(w.size()) + " entries but the MDP has " +
                         std::to_string(mdp.n_objectives()) + " objectives");
    }
}

// w_k - w_{k+1}, with w_{n+1} = 0
std::vector<double> weight_increments(const GiniWeights& w) {
    std::vector<double> inc(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        inc[k] = w[k] - (k + 1 < w.size() ? w[k + 1] : 0.0);
    }
    return inc;
}

} // namespace

PlanResult ggi_plan(const MoMdp& mdp, const GiniWeights& w, const LpOptions& options) {
    require_valid(mdp);
    require_weights_match(mdp, w);

    const std::size_t S = mdp.n_states();
    const std::size_t A = mdp.n_actions();
    const std::size_t n = mdp.n_objectives();
    const std::size_t nx = S * A;
    auto x_index = [A](std::size_t s, std::size_t a) { return s * A + a; };
    auto t_index = [nx](std::size_t k) { return nx + k; };
    auto d_index = [nx, n](std::size_t k, std::size_t i) { return nx + n + k * n + i; };

    LinearProgram lp(nx + n + n * n);
    const auto inc = weight_increments(w);
    for (std::size_t k = 0; k < n; ++k) {
        lp.objective[t_index(k)] = inc[k] * static_cast<double>(k + 1);
        for (std::size_t i = 0; i < n; ++i) {
            lp.objective[d_index(k, i)] = -inc[k];
        }
        lp.set_bounds(t_index(k), VariableBounds::free());
    }

    // flow: sum_a x(s,a) - gamma sum_{s',a'} P(s|s',a') x(s',a') = mu(s)
    std::vector<std::vector<double>> flow(S, std::vector<double>(lp.n_vars(), 0.0));
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            flow[s][x_index(s, a)] += 1.0;
            for (const auto& succ : mdp.successors(s, a)) {
                flow[succ.state][x_index(s, a)] -= mdp.gamma() * succ.prob;
            }
        }
    }
    for (std::size_t s = 0; s < S; ++s) {
        lp.add_constraint(std::move(flow[s]), Relation::Equal, mdp.mu()[s]);
    }

    // d_ik - t_k + v_i(x) >= 0
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(lp.n_vars(), 0.0);
            row[d_index(k, i)] = 1.0;
            row[t_index(k)] = -1.0;
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    row[x_index(s, a)] = mdp.reward(s, a)[i];
                }
            }
            lp.add_constraint(std::move(row), Relation::GreaterEqual, 0.0);
        }
    }

    const LpSolution sol = solve_lp(lp, options);
    PlanResult result;
    if (sol.status == LpStatus::Infeasible) {
        result.status = PlanStatus::Infeasible;
        return result;
    }
    if (sol.status != LpStatus::Optimal) {
        result.status = PlanStatus::NumericalFailure;
        return result;
    }

    OccupancyMeasure x(S, A);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            x(s, a) = std::max(sol.x[x_index(s, a)], 0.0);
        }
    }
    result.value = value_from_occupancy(mdp, x);
    result.welfare = ggi(result.value, w);
    result.policy = policy_from_occupancy(x);
    result.occupancy = std::move(x);
    result.status = PlanStatus::Optimal;
    return result;
}

PlanResult maximin_plan(const MoMdp& mdp, double delta, const LpOptions& options) {
    return ggi_plan(mdp, GiniWeights::geometric(mdp.n_objectives(), delta), options);
}

std::size_t deterministic_policy_count(const MoMdp& mdp) {
    std::size_t count = 1;
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        if (mdp.n_actions() != 0 && count > kEnumerationLimit / mdp.n_actions()) {
            throw InputError("instance has more than " + std::to_string(kEnumerationLimit) +
                             " deterministic policies; shrink the state or action space");
        }
        count *= mdp.n_actions();
    }
    if (count > kEnumerationLimit) {
        throw InputError("instance has more than " + std::to_string(kEnumerationLimit) +
                         " deterministic policies; shrink the state or action space");
    }
    return count;
}

void enumerate_deterministic_policies(
    const MoMdp& mdp, const std::function<void(const std::vector<std::size_t>&, const ValueVector&)>& visit) {
    require_valid(mdp);
    const std::size_t count = deterministic_policy_count(mdp);
    const std::size_t S = mdp.n_states();
    const std::size_t A = mdp.n_actions();
    std::vector<std::size_t> actions(S, 0);
    for (std::size_t p = 0; p < count; ++p) {
        const Policy pi = Policy::deterministic(actions, A);
        visit(actions, mu_average(mdp, evaluate_policy(mdp, pi)));
        // odometer, last state fastest
        for (std::size_t s = S; s-- > 0;) {
            if (++actions[s] < A) {
                break;
            }
            actions[s] = 0;
        }
    }
}

OracleResult oracle_ggi_optimum(const MoMdp& mdp, const GiniWeights& w, const LpOptions& options) {
    require_weights_match(mdp, w);
    std::vector<ValueVector> vertices;
    OracleResult out;
    out.best_deterministic = -std::numeric_limits<double>::infinity();
    enumerate_deterministic_policies(mdp, [&](const std::vector<std::size_t>&, const ValueVector& v) {
        vertices.push_back(v);
        out.best_deterministic = std::max(out.best_deterministic, ggi(v, w));
    });
    out.n_policies = vertices.size();

    // Variables: lambda_1..lambda_K on the simplex, then for each level k a free
    // threshold and n shortfalls. Maximize sum_k inc_k (k t_k - sum_i shortfall_ik).
    const std::size_t K = vertices.size();
    const std::size_t n = w.size();
    const std::size_t level_width = 1 + n;
    const std::size_t total = K + n * level_width;
    LinearProgram lp(total);

    std::vector<double> simplex_row(total, 0.0);
    std::fill(simplex_row.begin(), simplex_row.begin() + static_cast<std::ptrdiff_t>(K), 1.0);
    lp.add_constraint(std::move(simplex_row), Relation::Equal, 1.0);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t base = K + k * level_width;
        const double inc = w[k] - (k + 1 < n ? w[k + 1] : 0.0);
        lp.objective[base] = inc * static_cast<double>(k + 1);
        lp.set_bounds(base, VariableBounds::free());
        for (std::size_t i = 0; i < n; ++i) {
            lp.objective[base + 1 + i] = -inc;
            // threshold - mixture_i <= shortfall_ik
            std::vector<double> row(total, 0.0);
            row[base] = 1.0;
            row[base + 1 + i] = -1.0;
            for (std::size_t p = 0; p < K; ++p) {
                row[p] = -vertices[p][i];
            }
            lp.add_constraint(std::move(row), Relation::LessEqual, 0.0);
        }
    }

    const LpSolution sol = solve_lp(lp, options);
    if (sol.status != LpStatus::Optimal) {
        throw std::runtime_error("oracle_ggi_optimum: mixture LP ended with status " + to_string(sol.status));
    }
    out.value.assign(n, 0.0);
    for (std::size_t p = 0; p < K; ++p) {
        const double lambda = std::max(sol.x[p], 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            out.value[i] += lambda * vertices[p][i];
        }
    }
    out.welfare = ggi(out.value, w);
    return out;
}

} // namespace fair
