#include <algorithm>
#include <random>

#include "doctest.h"
#include "fair/welfare.hpp"
#include "oracles.hpp"

using namespace fair;

namespace {
const GiniWeights w73({0.7, 0.3});
}

TEST_CASE("weights are validated") {
    CHECK_NOTHROW(GiniWeights({0.7, 0.3}));
    CHECK_THROWS_AS(GiniWeights({0.3, 0.7}), InputError);
    CHECK_THROWS_AS(GiniWeights({0.5, 0.5}), InputError);
    CHECK_THROWS_AS(GiniWeights({1.0, 0.0}), InputError);
    CHECK_THROWS_AS(GiniWeights({1.5, 0.5}), InputError);
    CHECK_THROWS_AS(GiniWeights(std::vector<double>{}), InputError);

    const auto h = GiniWeights::halving(3);
    CHECK(h[0] == doctest::Approx(4.0 / 7.0));
    CHECK(h[1] == doctest::Approx(2.0 / 7.0));
    CHECK(h[2] == doctest::Approx(1.0 / 7.0));
    CHECK(h.sum() == doctest::Approx(1.0));
}

TEST_CASE("ggi examples") {
    CHECK(ggi(std::vector<double>{1, 1}, w73) == doctest::Approx(1.0));
    CHECK(ggi(std::vector<double>{3, 1}, w73) == doctest::Approx(oracle::sort_then_dot({3, 1}, {0.7, 0.3})));
    CHECK(ggi(std::vector<double>{3, 1}, w73) == doctest::Approx(1.6));
    CHECK(ggi(std::vector<double>{1, 3}, w73) == ggi(std::vector<double>{3, 1}, w73));
    CHECK(ggi(std::vector<double>{0, 100}, w73) == doctest::Approx(30.0));
    CHECK(ggi(std::vector<double>{10, 90}, w73) == doctest::Approx(34.0));
    CHECK_THROWS_AS(ggi(std::vector<double>{1, 2, 3}, w73), InputError);
}

TEST_CASE("ggi matches sort-then-dot on long vectors") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-10, 10);
    for (std::size_t n : {1u, 5u, 16u, 17u, 40u}) {
        const auto w = GiniWeights::geometric(n, 0.8);
        std::vector<double> wv(w.values().begin(), w.values().end());
        std::vector<double> v(n);
        for (auto& x : v) {
            x = u(gen);
        }
        CHECK(ggi(v, w) == doctest::Approx(oracle::sort_then_dot(v, wv)).epsilon(1e-14));
    }
}

TEST_CASE("ggi subgradient examples") {
    CHECK(ggi_subgradient(std::vector<double>{3, 1}, w73) == std::vector<double>{0.3, 0.7});
    CHECK(ggi_subgradient(std::vector<double>{1, 1}, w73) == std::vector<double>{0.7, 0.3});
    const GiniWeights w3({0.5, 0.3, 0.2});
    CHECK(ggi_subgradient(std::vector<double>{0, 5, 2}, w3) == std::vector<double>{0.5, 0.2, 0.3});

    const auto f = [&](const std::vector<double>& x) { return oracle::sort_then_dot(x, {0.5, 0.3, 0.2}); };
    const auto fd = oracle::central_difference(f, {0, 5, 2}, 1e-6);
    const auto g = ggi_subgradient(std::vector<double>{0, 5, 2}, w3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-6));
    }
    const auto fd2 = oracle::central_difference(
        [](const std::vector<double>& x) { return oracle::sort_then_dot(x, {0.7, 0.3}); }, {3, 1}, 1e-6);
    CHECK(fd2[0] == doctest::Approx(0.3));
    CHECK(fd2[1] == doctest::Approx(0.7));
}

TEST_CASE("subgradient ties follow index order") {
    const GiniWeights w({0.4, 0.3, 0.2, 0.1});
    CHECK(ggi_subgradient(std::vector<double>{2, 1, 2, 1}, w) == std::vector<double>{0.2, 0.4, 0.1, 0.3});
}

TEST_CASE("maximin, utilitarian") {
    CHECK(maximin(std::vector<double>{0, 100}) == 0);
    CHECK(maximin(std::vector<double>{1, 1}) == 1);
    CHECK(maximin(std::vector<double>{-2, 5, 3}) == -2);
    CHECK_THROWS_AS(maximin(std::vector<double>{}), InputError);
    CHECK(utilitarian(std::vector<double>{1, 2, 3}) == 6);
    CHECK(utilitarian(std::vector<double>{0, 0}) == 0);
    CHECK(utilitarian(std::vector<double>{-1, 1}) == 0);
}

TEST_CASE("leximin") {
    CHECK(leximin_compare(std::vector<double>{1, 1, 1}, std::vector<double>{0, 100, 100}) ==
          std::weak_ordering::greater);
    CHECK(leximin_compare(std::vector<double>{1, 2}, std::vector<double>{2, 1}) == std::weak_ordering::equivalent);
    CHECK(leximin_compare(std::vector<double>{0, 3}, std::vector<double>{0, 2}) == std::weak_ordering::greater);
    CHECK(leximin_compare(std::vector<double>{0, 2}, std::vector<double>{0, 3}) == std::weak_ordering::less);
    CHECK_THROWS_AS(leximin_compare(std::vector<double>{1}, std::vector<double>{1, 2}), InputError);
}

TEST_CASE("leximin and utilitarian disagree on the maximin counterexample") {
    const std::vector<double> ones(5, 1.0);
    std::vector<double> other(5, 100.0);
    other[0] = 0.0;
    CHECK(leximin_compare(ones, other) == std::weak_ordering::greater);
    CHECK(utilitarian(ones) < utilitarian(other));
}

TEST_CASE("pigou-dalton transfer") {
    CHECK(pigou_dalton_transfer(std::vector<double>{0, 100}, 0, 1, 10) == std::vector<double>{10, 90});
    CHECK_THROWS_AS(pigou_dalton_transfer(std::vector<double>{1, 3}, 0, 1, 2), InputError);
    CHECK_THROWS_AS(pigou_dalton_transfer(std::vector<double>{1, 3}, 0, 1, 0), InputError);
    CHECK_THROWS_AS(pigou_dalton_transfer(std::vector<double>{2, 2}, 0, 1, 0.1), InputError);
    CHECK_THROWS_AS(pigou_dalton_transfer(std::vector<double>{3, 1}, 0, 1, 0.5), InputError);
    CHECK_THROWS_AS(pigou_dalton_transfer(std::vector<double>{1, 3}, 0, 2, 0.5), InputError);
}

TEST_CASE("pareto dominance") {
    CHECK(pareto_dominates(std::vector<double>{2, 2}, std::vector<double>{1, 2}));
    CHECK_FALSE(pareto_dominates(std::vector<double>{1, 2}, std::vector<double>{2, 1}));
    CHECK_FALSE(pareto_dominates(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
    CHECK_THROWS_AS(pareto_dominates(std::vector<double>{1}, std::vector<double>{1, 2}), InputError);
}

TEST_CASE("evaluate dispatches") {
    const std::vector<double> v{3, 1};
    CHECK(evaluate(WelfareSpec::ggi(w73), v) == doctest::Approx(1.6));
    CHECK(evaluate(WelfareSpec::maximin(), v) == 1);
    CHECK(evaluate(WelfareSpec::utilitarian(), v) == 4);
    CHECK_THROWS_AS(evaluate(WelfareSpec::ggi(w73), std::vector<double>{1, 2, 3}), InputError);
    CHECK(WelfareSpec::ggi(w73).name() == "ggi");
    CHECK(WelfareSpec::maximin().weights() == nullptr);
}

TEST_CASE("concavity on random pairs") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-5, 5);
    const auto w = GiniWeights::halving(4);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> a(4), b(4), m(4);
        for (auto& x : a) {
            x = u(gen);
        }
        for (auto& x : b) {
            x = u(gen);
        }
        const double lambda = (u(gen) + 5) / 10;
        for (int i = 0; i < 4; ++i) {
            m[i] = lambda * a[i] + (1 - lambda) * b[i];
        }
        CHECK(ggi(m, w) >= lambda * ggi(a, w) + (1 - lambda) * ggi(b, w) - 1e-12);
    }
}

TEST_CASE("fairness axioms on random vectors") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-10, 10);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    std::size_t violations = 0;
    for (int k = 0; k < 2000; ++k) {
        const std::size_t n = dim(gen);
        const auto w = GiniWeights::geometric(n, 0.6);
        std::vector<double> v(n);
        for (auto& x : v) {
            x = u(gen);
        }
        auto p = v;
        std::shuffle(p.begin(), p.end(), gen);
        violations += ggi(p, w) != ggi(v, w);

        const auto lo = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
        const auto hi = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
        const double eps = (v[hi] - v[lo]) * 0.25;
        violations += !(ggi(pigou_dalton_transfer(v, lo, hi, eps), w) > ggi(v, w));

        auto up = v;
        up[k % n] += 0.5;
        violations += !(pareto_dominates(up, v) && ggi(up, w) > ggi(v, w));
    }
    CHECK(violations == 0);
}

TEST_CASE("delta weights approach maximin") {
    const double delta = 1e-6;
    std::vector<double> wv{1.0, delta, delta * delta, delta * delta * delta};
    double s = 0;
    for (double x : wv) {
        s += x;
    }
    for (auto& x : wv) {
        x /= s;
    }
    const GiniWeights w(wv);
    const std::vector<double> v{4.0, -3.0, 10.0, 2.5};
    CHECK(std::abs(ggi(v, w) - maximin(v) * w.sum()) <= 1e-4 * 13.0);
}
