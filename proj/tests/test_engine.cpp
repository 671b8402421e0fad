#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pairswap/engine.hpp"
#include "pairswap/stats.hpp"

using namespace pairswap;
using doctest::Approx;

namespace {

Matching one_based(std::vector<std::pair<std::size_t, std::size_t>> p) { return Matching::from_one_based(p); }

const std::vector<double> kTwoPairX{3, 1, 0, 2};

}  // namespace

TEST_CASE("statistic examples") {
    const auto lin = KernelSpec::linear();
    CHECK(statistic(std::vector<double>{3, 1}, one_based({{1, 2}}), WeightVector({1}), lin) == 2);
    CHECK(statistic(std::vector<double>{3, 1}, Matching(), WeightVector(), lin) == 0);
    CHECK(statistic(kTwoPairX, one_based({{1, 2}, {3, 4}}), WeightVector({1, 1}), lin) == 0);
    CHECK_THROWS(statistic(kTwoPairX, one_based({{1, 2}}), WeightVector({1, 1}), lin));
}

TEST_CASE("exact p-value examples") {
    const auto lin = KernelSpec::linear();
    CHECK(exact_p_value(kTwoPairX, Matching(), WeightVector(), lin).p_value == 1.0);
    CHECK(exact_p_value(std::vector<double>{2, 1}, one_based({{1, 2}}), WeightVector({1}), lin).p_value == 0.5);
    const auto r = exact_p_value(kTwoPairX, one_based({{1, 2}, {3, 4}}), WeightVector({1, 1}), lin);
    CHECK(r.p_value == 0.75);
    CHECK(r.statistic == 0);
    CHECK(r.num_pairs == 2);
    CHECK(r.method == PValueMethod::exact);
}

TEST_CASE("exact p-value refuses more than 20 pairs") {
    const auto m = oracle::consecutive_pairs(21);
    const std::vector<double> xs(42, 1.0);
    CHECK_THROWS_AS(exact_p_value(xs, m, WeightVector(std::vector<double>(21, 1.0)), KernelSpec::linear()),
                    std::invalid_argument);
    const auto m20 = oracle::consecutive_pairs(20);
    CHECK(exact_p_value(std::vector<double>(40, 1.0), m20, WeightVector(std::vector<double>(20, 1.0)),
                        KernelSpec::linear())
              .p_value == 1.0);
}

TEST_CASE("exact p-value agrees with literal swap enumeration for every kernel") {
    std::mt19937_64 rng(41);
    const auto cubic = KernelSpec::custom([](double a, double b) { return a * a * a / 10 + a - b; }, "skewed");
    for (const auto& k : {KernelSpec::linear(), KernelSpec::sign(), KernelSpec::truncated(0.7), cubic}) {
        for (int trial = 0; trial < 150; ++trial) {
            const std::size_t L = rng() % 9;
            auto xs = oracle::uniform_vector(rng, 2 * L, -2, 2);
            if (trial % 5 == 0 && L > 0) xs[1] = xs[0];
            const auto m = oracle::consecutive_pairs(L);
            const auto w = oracle::uniform_vector(rng, L, 0, 2);
            CHECK(exact_p_value(xs, m, WeightVector(w), k).p_value == oracle::exact_p_value(xs, m, w, k));
        }
    }
}

TEST_CASE("monte carlo p-value examples") {
    const auto lin = KernelSpec::linear();
    const auto m = one_based({{1, 2}, {3, 4}});
    CHECK(monte_carlo_p_value(std::vector<double>(4, 1.5), m, WeightVector({1, 2}), lin, 999, 3).p_value == 1.0);
    CHECK(monte_carlo_p_value(kTwoPairX, Matching(), WeightVector(), lin, 999, 3).p_value == 1.0);
    for (std::uint64_t seed : {1ULL, 2ULL, 77ULL}) {
        const auto r = monte_carlo_p_value(kTwoPairX, m, WeightVector({1, 1}), lin, 100000, seed);
        CHECK(std::abs(r.p_value - 0.75) <= 0.006);
        CHECK(r.num_draws == 100000U);
        CHECK(r.seed == seed);
    }
    CHECK_THROWS(monte_carlo_p_value(kTwoPairX, m, WeightVector({1, 1}), lin, 0, 1));
}

TEST_CASE("monte carlo p-value is reproducible and never below 1/(1+M)") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t L = 1 + rng() % 100;
        const auto xs = oracle::uniform_vector(rng, 2 * L, -1, 1);
        const auto m = oracle::consecutive_pairs(L);
        const WeightVector w(oracle::uniform_vector(rng, L, 0, 1));
        const std::size_t M = 1 + rng() % 300;
        const auto a = monte_carlo_p_value(xs, m, w, KernelSpec::sign(), M, trial);
        const auto b = monte_carlo_p_value(xs, m, w, KernelSpec::sign(), M, trial);
        CHECK(a.p_value == b.p_value);
        CHECK(a.p_value * static_cast<double>(M + 1) >= 1.0);
        CHECK_NOTHROW(a.check_invariants());
    }
}

TEST_CASE("p-values are unchanged by positive rescaling of the weights") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t L = 1 + rng() % 8;
        const auto xs = oracle::uniform_vector(rng, 2 * L, -2, 2);
        const auto m = oracle::consecutive_pairs(L);
        const WeightVector w(oracle::uniform_vector(rng, L, 0, 2));
        const double c = std::ldexp(1.0, static_cast<int>(rng() % 20) - 10) * 3.0;
        const auto k = trial % 2 ? KernelSpec::linear() : KernelSpec::sign();
        CHECK(exact_p_value(xs, m, w, k).p_value == exact_p_value(xs, m, w.scaled(c), k).p_value);
        CHECK(monte_carlo_p_value(xs, m, w, k, 200, 5).p_value ==
              monte_carlo_p_value(xs, m, w.scaled(c), k, 200, 5).p_value);
    }
}

TEST_CASE("adding a symmetric function to the kernel leaves the exact p-value unchanged") {
    std::mt19937_64 rng(44);
    const auto perturbed = KernelSpec::custom(
        [](double a, double b) { return (a - b) + a * b + std::cos(a + b); }, "linear plus symmetric");
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t L = 1 + rng() % 6;
        const auto xs = oracle::uniform_vector(rng, 2 * L, -2, 2);
        const auto m = oracle::consecutive_pairs(L);
        const WeightVector w(oracle::uniform_vector(rng, L, 0, 2));
        CHECK(exact_p_value(xs, m, w, KernelSpec::linear()).p_value == exact_p_value(xs, m, w, perturbed).p_value);
    }
}

TEST_CASE("deterministic quantile bound over the swap orbit") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t L = 1 + rng() % 6;
        auto xs = oracle::uniform_vector(rng, 2 * L, -2, 2);
        if (trial % 4 == 0) xs[0] = xs[1];
        const auto m = oracle::consecutive_pairs(L);
        const WeightVector w(oracle::uniform_vector(rng, L, 0, 2));
        const auto k = trial % 3 == 0 ? KernelSpec::sign() : KernelSpec::linear();
        std::vector<double> p;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
            p.push_back(exact_p_value(apply_swap(xs, m, SwapVector::from_mask(mask, L)), m, w, k).p_value);
        }
        for (int a = 1; a <= 99; ++a) {
            const double alpha = a / 100.0;
            const auto hits = std::count_if(p.begin(), p.end(), [&](double v) { return v <= alpha; });
            REQUIRE(static_cast<double>(hits) <= alpha * static_cast<double>(p.size()));
        }
    }
}

TEST_CASE("p-values are super-uniform under a sharp null") {
    std::mt19937_64 rng(46);
    std::normal_distribution<double> g;
    const std::size_t reps = 2000, L = 10;
    std::vector<double> exact_p, mc_p;
    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<double> xs(2 * L);
        for (std::size_t l = 0; l < L; ++l) {
            const double shift = 3 * g(rng);  // pairs differ, but each pair is exchangeable
            xs[2 * l] = shift + g(rng);
            xs[2 * l + 1] = shift + g(rng);
        }
        const auto m = oracle::consecutive_pairs(L);
        const WeightVector w(oracle::uniform_vector(rng, L, 0, 2));
        exact_p.push_back(exact_p_value(xs, m, w, KernelSpec::linear()).p_value);
        mc_p.push_back(monte_carlo_p_value(xs, m, w, KernelSpec::sign(), 99, r).p_value);
    }
    for (double alpha : {0.01, 0.05, 0.1, 0.5}) {
        const double bound = alpha + 3 * std::sqrt(alpha * (1 - alpha) / static_cast<double>(reps));
        for (const auto* p : {&exact_p, &mc_p}) {
            const double rate =
                static_cast<double>(std::count_if(p->begin(), p->end(), [&](double v) { return v <= alpha; })) /
                static_cast<double>(reps);
            CHECK(rate <= bound);
        }
    }
}

TEST_CASE("run_test examples") {
    TestConfig cfg;
    cfg.method = PValueMethod::exact;
    const Dataset two({1, 0}, {1, 0}, {0, 1});
    const auto r = run_test(two, cfg, NeighbourStrategy{});
    CHECK(r.p_value == 0.5);
    CHECK(r.num_pairs == 1);
    CHECK(r.warnings.empty());
    CHECK_FALSE(r.seed.has_value());

    const Dataset three({1, 0, 2}, {1, 0, 2}, {0, 1, 2});
    const auto empty = run_test(three, cfg, CrossBinStrategy{CrossBinConfig::fixed(2)});
    CHECK(empty.p_value == 1.0);
    CHECK(empty.num_pairs == 0);
    CHECK(empty.warnings.size() == 1);

    cfg.method = PValueMethod::monte_carlo;
    cfg.seed = 99;
    CHECK(run_test(two, cfg, NeighbourStrategy{}).seed == 99U);
}

TEST_CASE("run_test on null data returns a valid p-value with about n/4 neighbour pairs") {
    std::mt19937_64 rng(47);
    std::normal_distribution<double> g;
    const std::size_t n = 400;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        z[i] = g(rng);
    }
    TestConfig cfg;
    cfg.draws = 999;
    const auto r = run_test(Dataset(x, y, z), cfg, NeighbourStrategy{});
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.num_pairs > n / 4 - 30);
    CHECK(r.num_pairs < n / 4 + 30);
}

TEST_CASE("strategy names") {
    CHECK(std::holds_alternative<NeighbourStrategy>(parse_strategy("neighbour")));
    CHECK(describe(parse_strategy("crossbin:5")) == "crossbin:5");
    CHECK_THROWS(parse_strategy("plugin"));
    CHECK_THROWS(parse_strategy("random"));
}

TEST_CASE("theoretical power examples") {
    const std::vector<double> zero{0, 0, 0}, ones{1, 1, 1};
    CHECK(theoretical_power(zero, ones, WeightVector({1, 2, 3}), 0.1) == Approx(0.1).epsilon(1e-10));
    const double z10 = oracle::kUpper10;
    CHECK(theoretical_power(std::vector<double>{z10}, std::vector<double>{1}, WeightVector({1}), 0.1) ==
          Approx(0.5).epsilon(1e-9));
    CHECK(theoretical_power(std::vector<double>{1}, std::vector<double>{1}, WeightVector({1}), 0.1) ==
          Approx(oracle::phi(1 - z10)).epsilon(1e-10));
    CHECK(theoretical_power(std::vector<double>{1}, std::vector<double>{1}, WeightVector({1}), 0.1) ==
          Approx(0.3891).epsilon(1e-4));
    CHECK_THROWS(theoretical_power(std::vector<double>{1}, std::vector<double>{1}, WeightVector({0}), 0.1));
}

TEST_CASE("normal functions") {
    CHECK(normal_cdf(0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-12));
    CHECK(normal_sf(3) == Approx(1.3498980316300946e-3).epsilon(1e-10));
    CHECK(normal_isf(0.1) == Approx(oracle::kUpper10).epsilon(1e-12));
    CHECK(normal_isf(0.5) == Approx(0.0).scale(1));
    for (double a : {1e-8, 0.001, 0.2, 0.7, 0.999}) CHECK(normal_sf(normal_isf(a)) == Approx(a).epsilon(1e-10));
    CHECK_THROWS(normal_isf(0));
    CHECK_THROWS(normal_isf(1));
}

TEST_CASE("normal approximation tracks the exact p-value for many pairs") {
    std::mt19937_64 rng(48);
    const std::size_t L = 18;
    for (int trial = 0; trial < 20; ++trial) {
        const auto xs = oracle::uniform_vector(rng, 2 * L, -1, 1.2);
        const auto m = oracle::consecutive_pairs(L);
        const WeightVector w(oracle::uniform_vector(rng, L, 0.5, 1));
        const double exact = exact_p_value(xs, m, w, KernelSpec::linear()).p_value;
        CHECK(std::abs(normal_approx_p_value(xs, m, w, KernelSpec::linear()) - exact) < 0.08);
    }
    CHECK(normal_approx_p_value(std::vector<double>{1, 1}, oracle::consecutive_pairs(1), WeightVector({1}),
                                KernelSpec::linear()) == 1.0);
}

TEST_CASE("linear statistics need non-increasing coefficients along each pair") {
    const auto m = one_based({{1, 2}, {3, 4}});
    const std::vector<double> good{2, 1, 5, 5}, bad{1, 2, 0, 0};
    CHECK(satisfies_linear_condition(good, m));
    CHECK_FALSE(satisfies_linear_condition(bad, m));
    CHECK_THROWS(linear_statistic_p_value(kTwoPairX, m, bad));
    // With beta = (1, 0, 1, 0) the statistic is x1 + x3 and the p-value is
    // the linear-kernel p-value with unit weights.
    const std::vector<double> beta{1, 0, 1, 0};
    const auto r = linear_statistic_p_value(kTwoPairX, m, beta);
    CHECK(r.statistic == 3);
    CHECK(r.p_value == 0.75);
}
