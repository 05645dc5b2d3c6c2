#include "fair/welfare.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace fair {

namespace {

void require_nonempty(std::span<const double> v) {
    if (v.empty()) {
        throw InputError("value vector must have at least one component");
    }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
    }
}

// Sorted copy without heap traffic for the small vectors used in the learners' inner loops.
template <typename F>
auto with_sorted(std::span<const double> v, F&& f) {
    constexpr std::size_t kInline = 16;
    if (v.size() <= kInline) {
        std::array<double, kInline> buf{};
        std::copy(v.begin(), v.end(), buf.begin());
        std::sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(v.size()));
        return f(std::span<const double>(buf.data(), v.size()));
    }
    std::vector<double> buf(v.begin(), v.end());
    std::sort(buf.begin(), buf.end());
    return f(std::span<const double>(buf));
}

} // namespace

GiniWeights::GiniWeights(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) {
        throw InputError("GiniWeights: at least one weight required");
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        double w = weights_[i];
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
            throw InputError("GiniWeights: weight " + std::to_string(i) + " outside [0, 1]");
        }
        if (i > 0 && !(weights_[i - 1] > w)) {
            throw InputError("GiniWeights: weights must be strictly decreasing (index " + std::to_string(i) + ")");
        }
    }
    if (!(weights_.back() > 0.0)) {
        throw InputError("GiniWeights: last weight must be strictly positive");
    }
}

GiniWeights GiniWeights::geometric(std::size_t n, double ratio) {
    if (n == 0) {
        throw InputError("GiniWeights::geometric: n must be positive");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw InputError("GiniWeights::geometric: ratio must lie in (0, 1)");
    }
    std::vector<double> w(n);
    double term = 1.0;
    for (auto& x : w) {
        x = term;
        term *= ratio;
    }
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) {
        x /= total;
    }
    return GiniWeights(std::move(w));
}

double GiniWeights::sum() const noexcept { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

double ggi(std::span<const double> v, const GiniWeights& w) {
    require_same_size(v.size(), w.size(), "ggi");
    return with_sorted(v, [&](std::span<const double> sorted) {
        double total = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            total += w[i] * sorted[i];
        }
        return total;
    });
}

ValueVector ggi_subgradient(std::span<const double> v, const GiniWeights& w) {
    require_same_size(v.size(), w.size(), "ggi_subgradient");
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    ValueVector g(v.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        g[order[rank]] = w[rank];
    }
    return g;
}

double maximin(std::span<const double> v) {
    require_nonempty(v);
    return *std::min_element(v.begin(), v.end());
}

double utilitarian(std::span<const double> v) {
    require_nonempty(v);
    return std::accumulate(v.begin(), v.end(), 0.0);
}

std::weak_ordering leximin_compare(std::span<const double> u, std::span<const double> v) {
    require_same_size(u.size(), v.size(), "leximin_compare");
    std::vector<double> su(u.begin(), u.end());
    std::vector<double> sv(v.begin(), v.end());
    std::sort(su.begin(), su.end());
    std::sort(sv.begin(), sv.end());
    for (std::size_t i = 0; i < su.size(); ++i) {
        if (su[i] < sv[i]) {
            return std::weak_ordering::less;
        }
        if (su[i] > sv[i]) {
            return std::weak_ordering::greater;
        }
    }
    return std::weak_ordering::equivalent;
}

ValueVector pigou_dalton_transfer(std::span<const double> v, std::size_t i, std::size_t j, double eps) {
    if (i >= v.size() || j >= v.size()) {
        throw InputError("pigou_dalton_transfer: index out of range");
    }
    if (!(v[i] < v[j])) {
        throw InputError("pigou_dalton_transfer: requires v[i] < v[j]");
    }
    if (!(eps > 0.0 && eps < v[j] - v[i])) {
        throw InputError("pigou_dalton_transfer: eps must lie strictly inside (0, v[j] - v[i])");
    }
    ValueVector out(v.begin(), v.end());
    out[i] += eps;
    out[j] -= eps;
    return out;
}

bool pareto_dominates(std::span<const double> u, std::span<const double> v) {
    require_same_size(u.size(), v.size(), "pareto_dominates");
    bool strict = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < v[i]) {
            return false;
        }
        strict = strict || u[i] > v[i];
    }
    return strict;
}

std::string WelfareSpec::name() const {
    struct Visitor {
        std::string operator()(const GgiWelfare&) const { return "ggi"; }
        std::string operator()(const MaximinWelfare&) const { return "maximin"; }
        std::string operator()(const UtilitarianWelfare&) const { return "utilitarian"; }
    };
    return std::visit(Visitor{}, kind_);
}

const GiniWeights* WelfareSpec::weights() const noexcept {
    if (const auto* g = std::get_if<GgiWelfare>(&kind_)) {
        return &g->weights;
    }
    return nullptr;
}

double evaluate(const WelfareSpec& spec, std::span<const double> v) {
    struct Visitor {
        std::span<const double> v;
        double operator()(const GgiWelfare& g) const { return ggi(v, g.weights); }
        double operator()(const MaximinWelfare&) const { return maximin(v); }
        double operator()(const UtilitarianWelfare&) const { return utilitarian(v); }
    };
    return std::visit(Visitor{v}, spec.kind());
}

} // namespace fair
