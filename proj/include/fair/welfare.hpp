#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fair {

/// Raised for malformed arguments: dimension mismatches, out-of-range values.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One payoff per user/objective.
using ValueVector = std::vector<double>;

/**
 * Weight vector of a generalized Gini welfare function.
 *
 * Weights are strictly decreasing, lie in [0, 1] and the last one is strictly
 * positive; the constructor rejects anything else. The first weight applies
 * to the worst-off component.
 */
class GiniWeights {
public:
    explicit GiniWeights(std::vector<double> weights);

    /// w_i proportional to ratio^(i-1), normalized to sum 1. ratio in (0, 1).
    static GiniWeights geometric(std::size_t n, double ratio = 0.5);

    /// The default family: halving weights, normalized.
    static GiniWeights halving(std::size_t n) { return geometric(n, 0.5); }

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> values() const noexcept { return weights_; }
    double sum() const noexcept;

private:
    std::vector<double> weights_;
};

/// G_w(v) = sum_i w_i * v_sorted_ascending_i.
double ggi(std::span<const double> v, const GiniWeights& w);

/**
 * A subgradient of ggi at v: g_i is the weight attached to component i once v
 * is sorted ascending. Ties keep index order, so equal components receive
 * weights in the order they appear. At points with distinct components this
 * is the gradient.
 */
ValueVector ggi_subgradient(std::span<const double> v, const GiniWeights& w);

double maximin(std::span<const double> v);

double utilitarian(std::span<const double> v);

/// Lexicographic comparison of the ascending-sorted copies of u and v.
std::weak_ordering leximin_compare(std::span<const double> u, std::span<const double> v);

/// Moves eps from the richer component j to the poorer component i.
/// Requires v[i] < v[j] and 0 < eps < v[j] - v[i].
ValueVector pigou_dalton_transfer(std::span<const double> v, std::size_t i, std::size_t j, double eps);

bool pareto_dominates(std::span<const double> u, std::span<const double> v);

struct GgiWelfare {
    GiniWeights weights;
};
struct MaximinWelfare {};
struct UtilitarianWelfare {};

/// A welfare function H applied to mu-averaged value vectors.
class WelfareSpec {
public:
    using Kind = std::variant<GgiWelfare, MaximinWelfare, UtilitarianWelfare>;

    WelfareSpec(Kind kind) : kind_(std::move(kind)) {} // NOLINT(google-explicit-constructor)

    static WelfareSpec ggi(GiniWeights w) { return WelfareSpec(GgiWelfare{std::move(w)}); }
    static WelfareSpec maximin() { return WelfareSpec(MaximinWelfare{}); }
    static WelfareSpec utilitarian() { return WelfareSpec(UtilitarianWelfare{}); }

    const Kind& kind() const noexcept { return kind_; }

    /// "ggi", "maximin" or "utilitarian".
    std::string name() const;

    /// Weights for GGI, nullptr otherwise.
    const GiniWeights* weights() const noexcept;

private:
    Kind kind_;
};

double evaluate(const WelfareSpec& spec, std::span<const double> v);

} // namespace fair
