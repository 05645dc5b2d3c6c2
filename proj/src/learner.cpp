#include "fair/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fair/random.hpp"

namespace fair {

double EpsilonSchedule::at(std::size_t episode, std::size_t total_episodes) const noexcept {
    const double span = decay_fraction * static_cast<double>(total_episodes);
    if (span <= 0.0) {
        return end;
    }
    const double progress = std::min(1.0, static_cast<double>(episode) / span);
    return start + (end - start) * progress;
}

void validate(const LearnConfig& cfg) {
    if (cfg.episodes == 0) {
        throw InputError("LearnConfig: episodes must be at least 1");
    }
    if (!(cfg.learning_rate.initial > 0.0 && cfg.learning_rate.initial <= 1.0)) {
        throw InputError("LearnConfig: learning rate must lie in (0, 1]");
    }
    if (!(cfg.learning_rate.tau > 0.0)) {
        throw InputError("LearnConfig: learning rate tau must be positive");
    }
    for (double e : {cfg.epsilon.start, cfg.epsilon.end}) {
        if (!(e > 0.0 && e <= 1.0)) {
            throw InputError("LearnConfig: epsilon must lie in (0, 1]");
        }
    }
    if (!(cfg.epsilon.decay_fraction >= 0.0 && cfg.epsilon.decay_fraction <= 1.0)) {
        throw InputError("LearnConfig: epsilon decay fraction must lie in [0, 1]");
    }
    if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) {
        throw InputError("LearnConfig: gamma must lie in [0, 1)");
    }
    if (cfg.batch_size == 0) {
        throw InputError("LearnConfig: batch_size must be at least 1");
    }
}

std::size_t argmax_action(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < values.size(); ++a) {
        if (values[a] > values[best]) {
            best = a;
        }
    }
    return best;
}

void SoftmaxPolicyParams::probabilities(std::size_t s, std::span<double> out) const {
    const auto z = theta_.row(s);
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
        out[a] = std::exp(z[a] - top);
        total += out[a];
    }
    for (auto& p : out) {
        p /= total;
    }
}

Policy SoftmaxPolicyParams::to_policy() const {
    Policy pi(n_states(), n_actions());
    for (std::size_t s = 0; s < n_states(); ++s) {
        probabilities(s, pi.row(s));
    }
    return pi;
}

namespace {

std::size_t episode_length(const Environment& env, std::size_t configured) {
    return configured > 0 ? configured : env.horizon();
}

std::size_t sample_from(std::span<const double> probs, double u) {
    double acc = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (u < acc) {
            return a;
        }
    }
    for (std::size_t a = probs.size(); a-- > 0;) {
        if (probs[a] > 0.0) {
            return a;
        }
    }
    return 0;
}

void require_env_objectives(const Environment& env, const GiniWeights& w) {
    if (env.n_objectives() != w.size()) {
        throw InputError("weights have " + std::to_string(w.size()) + " entries but the environment has " +
                         std::to_string(env.n_objectives()) + " objectives");
    }
}

Policy greedy_from_scalar(const DenseMatrix& q) {
    Policy pi(q.rows(), q.cols());
    for (std::size_t s = 0; s < q.rows(); ++s) {
        pi(s, argmax_action(q.row(s))) = 1.0;
    }
    return pi;
}

std::size_t ggi_greedy(const VectorQTable& q, std::size_t s, const GiniWeights& w, std::span<double> scratch) {
    for (std::size_t a = 0; a < q.n_actions(); ++a) {
        scratch[a] = ggi(q(s, a), w);
    }
    return argmax_action(scratch.first(q.n_actions()));
}

} // namespace

ScalarQResult utilitarian_q_learning(Environment& env, const LearnConfig& cfg) {
    validate(cfg);
    const std::size_t S = env.n_states();
    const std::size_t A = env.n_actions();
    const std::size_t n = env.n_objectives();
    const std::size_t T = episode_length(env, cfg.steps_per_episode);
    Rng rng(cfg.seed);

    ScalarQResult out;
    out.q = DenseMatrix(S, A);
    out.curve.reserve(cfg.episodes);
    DenseMatrix& q = out.q;
    std::size_t updates = 0;
    ValueVector returns(n);

    for (std::size_t e = 0; e < cfg.episodes; ++e) {
        const double eps = cfg.epsilon.at(e, cfg.episodes);
        std::fill(returns.begin(), returns.end(), 0.0);
        double discount = 1.0;
        std::size_t s = env.reset();
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t a = 0;
            if (rng.uniform() < eps) {
                a = rng.index(A);
            } else {
                a = argmax_action(q.row(s));
            }
            const Transition tr = env.step(a);
            const double r = std::accumulate(tr.reward.begin(), tr.reward.end(), 0.0);
            const double target = tr.done ? r : r + cfg.gamma * q(tr.state, argmax_action(q.row(tr.state)));
            const double alpha = cfg.learning_rate.at(updates++);
            q(s, a) += alpha * (target - q(s, a));
            for (std::size_t i = 0; i < n; ++i) {
                returns[i] += discount * tr.reward[i];
            }
            discount *= cfg.gamma;
            s = tr.state;
            if (tr.done) {
                break;
            }
        }
        out.curve.push_back({e + 1, returns, utilitarian(returns)});
    }
    out.greedy = greedy_from_scalar(q);
    return out;
}

VectorQResult ggi_q_learning(Environment& env, const GiniWeights& w, const LearnConfig& cfg) {
    validate(cfg);
    require_env_objectives(env, w);
    const std::size_t S = env.n_states();
    const std::size_t A = env.n_actions();
    const std::size_t n = env.n_objectives();
    const std::size_t T = episode_length(env, cfg.steps_per_episode);
    Rng rng(cfg.seed);

    VectorQResult out;
    out.q = VectorQTable(S, A, n);
    out.curve.reserve(cfg.episodes);
    VectorQTable& q = out.q;
    std::vector<double> scratch(A);
    std::size_t updates = 0;
    ValueVector returns(n);

    for (std::size_t e = 0; e < cfg.episodes; ++e) {
        const double eps = cfg.epsilon.at(e, cfg.episodes);
        std::fill(returns.begin(), returns.end(), 0.0);
        double discount = 1.0;
        std::size_t s = env.reset();
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t a = 0;
            if (rng.uniform() < eps) {
                a = rng.index(A);
            } else {
                a = ggi_greedy(q, s, w, scratch);
            }
            const Transition tr = env.step(a);
            const std::size_t next_best = ggi_greedy(q, tr.state, w, scratch);
            const double alpha = cfg.learning_rate.at(updates++);
            auto qsa = q(s, a);
            const auto qnext = q(tr.state, next_best);
            for (std::size_t i = 0; i < n; ++i) {
                const double target = tr.done ? tr.reward[i] : tr.reward[i] + cfg.gamma * qnext[i];
                qsa[i] += alpha * (target - qsa[i]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                returns[i] += discount * tr.reward[i];
            }
            discount *= cfg.gamma;
            s = tr.state;
            if (tr.done) {
                break;
            }
        }
        out.curve.push_back({e + 1, returns, ggi(returns, w)});
    }

    out.greedy = Policy(S, A);
    for (std::size_t s = 0; s < S; ++s) {
        out.greedy(s, ggi_greedy(q, s, w, scratch)) = 1.0;
    }
    return out;
}

PolicyGradientResult ggi_policy_gradient(Environment& env, const GiniWeights& w, const LearnConfig& cfg) {
    validate(cfg);
    require_env_objectives(env, w);
    const std::size_t S = env.n_states();
    const std::size_t A = env.n_actions();
    const std::size_t n = env.n_objectives();
    const std::size_t T = episode_length(env, cfg.steps_per_episode);
    const std::size_t B = cfg.batch_size;
    const std::size_t iterations = (cfg.episodes + B - 1) / B;
    Rng rng(cfg.seed);

    PolicyGradientResult out;
    out.params = SoftmaxPolicyParams(S, A);
    out.curve.reserve(iterations);
    SoftmaxPolicyParams& params = out.params;

    struct Episode {
        std::vector<std::size_t> states;
        std::vector<std::size_t> actions;
        std::vector<double> rewards; // length * n, row-major by time
        ValueVector returns;
    };
    std::vector<Episode> batch(B);
    std::vector<double> probs(A);
    DenseMatrix grad(S, A);
    std::vector<bool> touched(S, false);
    std::vector<std::size_t> touched_list;
    std::vector<double> to_go;
    std::vector<double> baseline;
    std::vector<std::size_t> alive;

    for (std::size_t it = 0; it < iterations; ++it) {
        // rollouts under the current logits
        for (auto& ep : batch) {
            ep.states.clear();
            ep.actions.clear();
            ep.rewards.clear();
            ep.returns.assign(n, 0.0);
            double discount = 1.0;
            std::size_t s = env.reset();
            for (std::size_t t = 0; t < T; ++t) {
                params.probabilities(s, probs);
                const std::size_t a = sample_from(probs, rng.uniform());
                const Transition tr = env.step(a);
                ep.states.push_back(s);
                ep.actions.push_back(a);
                ep.rewards.insert(ep.rewards.end(), tr.reward.begin(), tr.reward.end());
                for (std::size_t i = 0; i < n; ++i) {
                    ep.returns[i] += discount * tr.reward[i];
                }
                discount *= cfg.gamma;
                s = tr.state;
                if (tr.done) {
                    break;
                }
            }
        }

        ValueVector value(n, 0.0);
        for (const auto& ep : batch) {
            for (std::size_t i = 0; i < n; ++i) {
                value[i] += ep.returns[i];
            }
        }
        for (auto& v : value) {
            v /= static_cast<double>(B);
        }
        const ValueVector g = ggi_subgradient(value, w);
        out.curve.push_back({(it + 1) * B, value, ggi(value, w)});

        // scalarized rewards-to-go, overwriting each episode's reward buffer with one value per step
        std::size_t longest = 0;
        for (auto& ep : batch) {
            const std::size_t len = ep.states.size();
            longest = std::max(longest, len);
            double acc = 0.0;
            for (std::size_t t = len; t-- > 0;) {
                double r = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    r += g[i] * ep.rewards[t * n + i];
                }
                acc = r + cfg.gamma * acc;
                ep.rewards[t] = acc;
            }
            ep.rewards.resize(len);
        }
        baseline.assign(longest, 0.0);
        alive.assign(longest, 0);
        for (const auto& ep : batch) {
            for (std::size_t t = 0; t < ep.states.size(); ++t) {
                baseline[t] += ep.rewards[t];
                ++alive[t];
            }
        }
        for (std::size_t t = 0; t < longest; ++t) {
            baseline[t] /= static_cast<double>(alive[t]);
        }
        auto advantage = [&](const Episode& ep, std::size_t t) { return ep.rewards[t] - baseline[t]; };
        double scale = 1.0;
        if (cfg.normalize_advantages) {
            double sq = 0.0;
            std::size_t count = 0;
            for (const auto& ep : batch) {
                for (std::size_t t = 0; t < ep.states.size(); ++t) {
                    const double adv = advantage(ep, t);
                    sq += adv * adv;
                    ++count;
                }
            }
            const double rms = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
            scale = rms > 1e-12 ? 1.0 / rms : 1.0;
        }

        // grad theta(s, .) += adv * (onehot(a) - pi(.|s)) / B
        for (const auto& ep : batch) {
            for (std::size_t t = 0; t < ep.states.size(); ++t) {
                const std::size_t s = ep.states[t];
                const double adv = advantage(ep, t) * scale / static_cast<double>(B);
                if (adv == 0.0) {
                    continue;
                }
                params.probabilities(s, probs);
                auto gs = grad.row(s);
                for (std::size_t a = 0; a < A; ++a) {
                    gs[a] -= adv * probs[a];
                }
                gs[ep.actions[t]] += adv;
                if (!touched[s]) {
                    touched[s] = true;
                    touched_list.push_back(s);
                }
            }
        }
        const double lr = cfg.learning_rate.at(it);
        for (std::size_t s : touched_list) {
            auto z = params.logits(s);
            auto gs = grad.row(s);
            for (std::size_t a = 0; a < A; ++a) {
                z[a] += lr * gs[a];
                gs[a] = 0.0;
            }
            touched[s] = false;
        }
        touched_list.clear();
    }
    out.policy = params.to_policy();
    return out;
}

EvalResult evaluate_learned(const Environment& env, const Policy& pi, const EvalOptions& options,
                            const GiniWeights& report_weights) {
    if (pi.n_states() != env.n_states() || pi.n_actions() != env.n_actions()) {
        throw InputError("evaluate_learned: policy dimensions do not match the environment");
    }
    require_env_objectives(env, report_weights);
    if (options.episodes == 0) {
        throw InputError("evaluate_learned: at least one episode required");
    }
    const std::size_t n = env.n_objectives();
    const std::size_t T = episode_length(env, options.steps_per_episode);
    auto sim = env.clone();
    sim->seed(derive_seed(options.seed, {0}));
    Rng rng(derive_seed(options.seed, {1}));

    std::vector<double> samples; // episodes x n
    samples.reserve(options.episodes * n);
    ValueVector ret(n);
    for (std::size_t e = 0; e < options.episodes; ++e) {
        std::fill(ret.begin(), ret.end(), 0.0);
        double discount = 1.0;
        std::size_t steps = 0;
        std::size_t s = sim->reset();
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t a = sample_from(pi.row(s), rng.uniform());
            const Transition tr = sim->step(a);
            for (std::size_t i = 0; i < n; ++i) {
                ret[i] += discount * tr.reward[i];
            }
            discount *= options.gamma;
            ++steps;
            s = tr.state;
            if (tr.done) {
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            samples.push_back(options.per_step ? ret[i] / static_cast<double>(steps) : ret[i]);
        }
    }

    EvalResult res;
    const double N = static_cast<double>(options.episodes);
    res.mean.assign(n, 0.0);
    res.stddev.assign(n, 0.0);
    for (std::size_t e = 0; e < options.episodes; ++e) {
        for (std::size_t i = 0; i < n; ++i) {
            res.mean[i] += samples[e * n + i];
        }
    }
    for (auto& m : res.mean) {
        m /= N;
    }
    if (options.episodes > 1) {
        for (std::size_t e = 0; e < options.episodes; ++e) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = samples[e * n + i] - res.mean[i];
                res.stddev[i] += d * d;
            }
        }
        for (auto& sd : res.stddev) {
            sd = std::sqrt(sd / (N - 1.0));
        }
    }
    res.utilitarian_mean = utilitarian(res.mean);
    res.ggi = ggi(res.mean, report_weights);
    res.min_objective = maximin(res.mean);
    return res;
}

} // namespace fair
