#include "fair/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fair/random.hpp"

namespace fair {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kZeroMass = 1e-12;

void require_policy_dims(const MoMdp& mdp, const Policy& pi) {
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions()) {
        throw InputError("policy dimensions " + std::to_string(pi.n_states()) + "x" + std::to_string(pi.n_actions()) +
                         " do not match MDP " + std::to_string(mdp.n_states()) + "x" +
                         std::to_string(mdp.n_actions()));
    }
}

} // namespace

MoMdp::MoMdp(std::size_t n_states, std::size_t n_actions, std::size_t n_objectives, double gamma)
    : n_states_(n_states),
      n_actions_(n_actions),
      n_objectives_(n_objectives),
      gamma_(gamma),
      mu_(n_states, 0.0),
      transitions_(n_states * n_actions),
      rewards_(n_states * n_actions * n_objectives, 0.0) {
    if (n_states > 0) {
        mu_[0] = 1.0;
    }
}

void MoMdp::set_mu(std::vector<double> mu) {
    if (mu.size() != n_states_) {
        throw InputError("set_mu: expected " + std::to_string(n_states_) + " entries");
    }
    mu_ = std::move(mu);
}

void MoMdp::set_successors(std::size_t s, std::size_t a, std::vector<Successor> row) {
    transitions_.at(s * n_actions_ + a) = std::move(row);
}

void MoMdp::set_transition_row(std::size_t s, std::size_t a, std::span<const double> probs) {
    if (probs.size() != n_states_) {
        throw InputError("set_transition_row: expected " + std::to_string(n_states_) + " entries");
    }
    std::vector<Successor> row;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        if (probs[t] != 0.0) {
            row.push_back({t, probs[t]});
        }
    }
    set_successors(s, a, std::move(row));
}

double MoMdp::probability(std::size_t s, std::size_t a, std::size_t next) const {
    double p = 0.0;
    for (const auto& succ : successors(s, a)) {
        if (succ.state == next) {
            p += succ.prob;
        }
    }
    return p;
}

Policy Policy::uniform(std::size_t n_states, std::size_t n_actions) {
    return Policy(DenseMatrix(n_states, n_actions, 1.0 / static_cast<double>(n_actions)));
}

Policy Policy::deterministic(std::span<const std::size_t> actions, std::size_t n_actions) {
    Policy pi(actions.size(), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] >= n_actions) {
            throw InputError("Policy::deterministic: action index out of range");
        }
        pi(s, actions[s]) = 1.0;
    }
    return pi;
}

double OccupancyMeasure::total() const noexcept {
    double t = 0.0;
    for (std::size_t s = 0; s < x_.rows(); ++s) {
        for (double v : x_.row(s)) {
            t += v;
        }
    }
    return t;
}

std::vector<std::string> validate(const MoMdp& mdp) {
    std::vector<std::string> diag;
    if (mdp.n_states() == 0) {
        diag.emplace_back("n_states must be at least 1");
    }
    if (mdp.n_actions() == 0) {
        diag.emplace_back("n_actions must be at least 1");
    }
    if (mdp.n_objectives() == 0) {
        diag.emplace_back("n_objectives must be at least 1");
    }
    if (!std::isfinite(mdp.gamma()) || mdp.gamma() < 0.0) {
        diag.emplace_back("discount must be >= 0");
    } else if (mdp.gamma() >= 1.0) {
        diag.emplace_back("discount must be < 1");
    }

    double mu_sum = 0.0;
    for (std::size_t s = 0; s < mdp.mu().size(); ++s) {
        double m = mdp.mu()[s];
        if (!std::isfinite(m) || m < 0.0) {
            diag.push_back("mu[" + std::to_string(s) + "] must be a nonnegative finite number");
        }
        mu_sum += m;
    }
    if (std::abs(mu_sum - 1.0) > kSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "mu sums to " << mu_sum << ", expected 1";
        diag.push_back(os.str());
    }

    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const std::string where = "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
            double row_sum = 0.0;
            for (const auto& succ : mdp.successors(s, a)) {
                if (succ.state >= mdp.n_states()) {
                    diag.push_back("transition " + where + " targets out-of-range state " +
                                   std::to_string(succ.state));
                }
                if (!std::isfinite(succ.prob) || succ.prob < 0.0) {
                    diag.push_back("transition " + where + " has a negative or non-finite probability");
                }
                row_sum += succ.prob;
            }
            if (std::abs(row_sum - 1.0) > kSumTolerance) {
                std::ostringstream os;
                os.precision(17);
                os << "transition row " << where << " sums to " << row_sum << ", expected 1";
                diag.push_back(os.str());
            }
            for (std::size_t i = 0; i < mdp.n_objectives(); ++i) {
                if (!std::isfinite(mdp.reward(s, a)[i])) {
                    diag.push_back("reward " + where + " objective " + std::to_string(i) + " is not finite");
                }
            }
        }
    }
    return diag;
}

void require_valid(const MoMdp& mdp) {
    auto diag = validate(mdp);
    if (diag.empty()) {
        return;
    }
    std::string msg = "invalid MDP:";
    for (const auto& d : diag) {
        msg += "\n  " + d;
    }
    throw InputError(msg);
}

std::vector<std::string> validate(const MoMdp& mdp, const Policy& pi) {
    std::vector<std::string> diag;
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions()) {
        diag.emplace_back("policy dimensions do not match the MDP");
        return diag;
    }
    for (std::size_t s = 0; s < pi.n_states(); ++s) {
        double sum = 0.0;
        for (double p : pi.row(s)) {
            if (!std::isfinite(p) || p < 0.0) {
                diag.push_back("policy row " + std::to_string(s) + " has a negative or non-finite entry");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
            diag.push_back("policy row " + std::to_string(s) + " does not sum to 1");
        }
    }
    return diag;
}

PolicyModel policy_model(const MoMdp& mdp, const Policy& pi) {
    require_policy_dims(mdp, pi);
    const std::size_t S = mdp.n_states();
    const std::size_t n = mdp.n_objectives();
    PolicyModel m{DenseMatrix(S, S), DenseMatrix(S, n)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const double p = pi(s, a);
            if (p == 0.0) {
                continue;
            }
            for (const auto& succ : mdp.successors(s, a)) {
                m.transition(s, succ.state) += p * succ.prob;
            }
            auto r = mdp.reward(s, a);
            for (std::size_t i = 0; i < n; ++i) {
                m.reward(s, i) += p * r[i];
            }
        }
    }
    return m;
}

DenseMatrix evaluate_policy(const MoMdp& mdp, const Policy& pi) {
    PolicyModel m = policy_model(mdp, pi);
    const std::size_t S = mdp.n_states();
    DenseMatrix a = DenseMatrix::identity(S);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < S; ++t) {
            a(s, t) -= mdp.gamma() * m.transition(s, t);
        }
    }
    return solve(std::move(a), m.reward);
}

ValueVector mu_average(const MoMdp& mdp, const DenseMatrix& values) {
    if (values.rows() != mdp.n_states()) {
        throw InputError("mu_average: value table has wrong number of states");
    }
    ValueVector v(values.cols(), 0.0);
    for (std::size_t s = 0; s < values.rows(); ++s) {
        const double m = mdp.mu()[s];
        if (m == 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += m * values(s, i);
        }
    }
    return v;
}

double objective_value(const MoMdp& mdp, const Policy& pi, const WelfareSpec& welfare) {
    return evaluate(welfare, mu_average(mdp, evaluate_policy(mdp, pi)));
}

OccupancyMeasure occupancy_measure(const MoMdp& mdp, const Policy& pi) {
    require_policy_dims(mdp, pi);
    const std::size_t S = mdp.n_states();
    const std::size_t A = mdp.n_actions();
    // State visitation d solves (I - gamma P_pi^T) d = mu, assembled column-wise
    // from the successor lists rather than from P_pi.
    DenseMatrix lhs = DenseMatrix::identity(S);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double p = pi(s, a);
            if (p == 0.0) {
                continue;
            }
            for (const auto& succ : mdp.successors(s, a)) {
                lhs(succ.state, s) -= mdp.gamma() * p * succ.prob;
            }
        }
    }
    DenseMatrix rhs(S, 1);
    for (std::size_t s = 0; s < S; ++s) {
        rhs(s, 0) = mdp.mu()[s];
    }
    DenseMatrix d = solve(std::move(lhs), rhs);
    OccupancyMeasure x(S, A);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            x(s, a) = d(s, 0) * pi(s, a);
        }
    }
    return x;
}

ValueVector value_from_occupancy(const MoMdp& mdp, const OccupancyMeasure& x) {
    if (x.n_states() != mdp.n_states() || x.n_actions() != mdp.n_actions()) {
        throw InputError("value_from_occupancy: occupancy dimensions do not match the MDP");
    }
    ValueVector v(mdp.n_objectives(), 0.0);
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const double mass = x(s, a);
            auto r = mdp.reward(s, a);
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] += mass * r[i];
            }
        }
    }
    return v;
}

Policy policy_from_occupancy(const OccupancyMeasure& x) {
    const std::size_t A = x.n_actions();
    Policy pi(x.n_states(), A);
    for (std::size_t s = 0; s < x.n_states(); ++s) {
        double mass = 0.0;
        for (double v : x.row(s)) {
            mass += std::max(v, 0.0);
        }
        if (mass < kZeroMass) {
            for (std::size_t a = 0; a < A; ++a) {
                pi(s, a) = 1.0 / static_cast<double>(A);
            }
            continue;
        }
        for (std::size_t a = 0; a < A; ++a) {
            pi(s, a) = std::max(x(s, a), 0.0) / mass;
        }
    }
    return pi;
}

double flow_violation(const MoMdp& mdp, const OccupancyMeasure& x) {
    const std::size_t S = mdp.n_states();
    std::vector<double> balance(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        balance[s] -= mdp.mu()[s];
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            balance[s] += x(s, a);
            for (const auto& succ : mdp.successors(s, a)) {
                balance[succ.state] -= mdp.gamma() * succ.prob * x(s, a);
            }
        }
    }
    double worst = 0.0;
    for (double b : balance) {
        worst = std::max(worst, std::abs(b));
    }
    return worst;
}

MoMdp random_mdp(std::uint64_t seed, std::size_t n_states, std::size_t n_actions, std::size_t n_objectives,
                 double gamma) {
    if (n_states == 0 || n_actions == 0 || n_objectives == 0) {
        throw InputError("random_mdp: all counts must be at least 1");
    }
    Rng rng(seed);
    MoMdp mdp(n_states, n_actions, n_objectives, gamma);
    std::vector<double> row(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            double total = 0.0;
            for (auto& p : row) {
                // (0, 1]: every successor keeps positive mass
                p = 1.0 - rng.uniform();
                total += p;
            }
            for (auto& p : row) {
                p /= total;
            }
            mdp.set_transition_row(s, a, row);
            for (auto& r : mdp.reward(s, a)) {
                r = rng.uniform();
            }
        }
    }
    mdp.set_mu(std::vector<double>(n_states, 1.0 / static_cast<double>(n_states)));
    return mdp;
}

} // namespace fair
