#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pairswap/blossom.hpp"
#include "pairswap/isotonic.hpp"
#include "pairswap/matching.hpp"

using namespace pairswap;
using doctest::Approx;

namespace {

Dataset yz(std::vector<double> y, std::vector<double> z) {
    const std::size_t n = y.size();
    return Dataset(std::vector<double>(n, 0.0), std::move(y), std::move(z));
}

std::vector<IndexPair> one_based(const Matching& m) {
    std::vector<IndexPair> out;
    for (const auto& p : m.pairs()) out.push_back({p.first + 1, p.second + 1});
    return out;
}

// Plain difference moments: W_ij = max(mu_i - mu_j, 0) with unit variance.
MomentEstimates difference_moments(const std::vector<double>& mu) {
    return {[mu](std::size_t i, std::size_t j) { return mu[i] - mu[j]; },
            [](std::size_t, std::size_t) { return 1.0; }};
}

}  // namespace

TEST_CASE("neighbour matching examples") {
    auto wm = neighbour_matching(yz({3, 1, 2, 5, 4, 0}, {1, 2, 3, 4, 5, 6}));
    CHECK(one_based(wm.matching) == std::vector<IndexPair>{{1, 2}, {5, 6}});
    CHECK(wm.weights.values()[0] == Approx(2));
    CHECK(wm.weights.values()[1] == Approx(4));

    CHECK(neighbour_matching(yz({1, 2, 3, 4}, {1, 2, 3, 4})).matching.empty());

    wm = neighbour_matching(yz({1, 0}, {0, 1}));
    CHECK(one_based(wm.matching) == std::vector<IndexPair>{{1, 2}});
    CHECK(wm.weights[0] == 1.0);

    CHECK_THROWS_AS(neighbour_matching(yz({1}, {1})), std::invalid_argument);
}

TEST_CASE("neighbour matching sorts by Z and breaks ties by row") {
    const auto wm = neighbour_matching(yz({5, 0, 9, 1}, {2, 1, 1, 2}));
    // Z order: rows 2, 3 (z = 1) then 1, 4 (z = 2).
    CHECK(one_based(wm.matching) == std::vector<IndexPair>{{1, 4}});
}

TEST_CASE("cross-bin matching examples") {
    const auto d = yz({0.9, 0.1, 0.5, 0.2, 0.8, 0.4}, {1, 2, 3, 4, 5, 6});
    auto wm = cross_bin_matching(d, CrossBinConfig::fixed(2));
    CHECK(one_based(wm.matching) == std::vector<IndexPair>{{1, 4}});
    CHECK(wm.weights[0] == Approx(0.7));

    CHECK(cross_bin_matching(yz({1, 1, 1, 1, 1, 1}, {1, 2, 3, 4, 5, 6}), CrossBinConfig::fixed(3)).matching.empty());
    CHECK(cross_bin_matching(yz({2, 1}, {1, 2}), CrossBinConfig::fixed(2)).matching.empty());
    CHECK_THROWS(cross_bin_matching(yz({2, 1}, {1, 2}), CrossBinConfig::fixed(3)));
    CHECK_THROWS(CrossBinConfig::fixed(1).bins_for(10));
}

TEST_CASE("cross-bin configuration") {
    CHECK(CrossBinConfig::power_rule(2.0 / 3.0).bins_for(1000) == 100);
    CHECK(CrossBinConfig::power_rule(2.0 / 3.0).bins_for(500) == 62);
    CHECK(CrossBinConfig::power_rule(0.8).bins_for(5000) == 910);
    CHECK(CrossBinConfig::parse("crossbin:7").bins_for(100) == 7);
    CHECK(CrossBinConfig::parse("crossbin:pow:2/3").bins_for(1000) == 100);
    CHECK(CrossBinConfig::fixed(4).bin_size_for(18) == 4);
    CHECK_THROWS(CrossBinConfig::parse("crossbin:2.5"));
    CHECK_THROWS(CrossBinConfig::power_rule(1.5));
}

TEST_CASE("constructed matchings are valid and respect the pair budgets") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 60;
        std::vector<double> y(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = trial % 4 == 0 ? static_cast<double>(rng() % 3) : g(rng);
            z[i] = trial % 3 == 0 ? static_cast<double>(rng() % 5) : g(rng);
        }
        const auto d = yz(y, z);
        const auto nb = neighbour_matching(d);
        CHECK(validate_matching(d, nb.matching));
        CHECK(nb.matching.size() <= n / 2);
        for (std::size_t l = 0; l < nb.matching.size(); ++l) {
            CHECK(nb.weights[l] == y[nb.matching[l].first] - y[nb.matching[l].second]);
            CHECK(nb.weights[l] > 0);
        }
        const std::size_t K = 2 + rng() % (n - 1);
        const auto cb = cross_bin_matching(d, CrossBinConfig::fixed(K));
        CHECK(validate_matching(d, cb.matching));
        CHECK(cb.matching.size() <= (K - 1) * ((n / K) / 2));
        for (std::size_t l = 0; l < cb.weights.size(); ++l) CHECK(cb.weights[l] > 0);
    }
}

TEST_CASE("oracle weights") {
    CHECK(oracle_weights(2, 4) == 0.5);
    CHECK(oracle_weights(-1, 1) == 0.0);
    CHECK(oracle_weights(0, 5) == 0.0);
    CHECK_THROWS_AS(oracle_weights(1, 0), std::invalid_argument);
}

TEST_CASE("blossom matching on small graphs") {
    using graph::max_weight_matching;
    CHECK(max_weight_matching(2, {{0, 1, 5}}) == std::vector<std::ptrdiff_t>{1, 0});
    // Path a-b-c-d: taking the two outer edges beats the heavy middle edge.
    CHECK(max_weight_matching(4, {{0, 1, 5}, {1, 2, 8}, {2, 3, 5}}) == std::vector<std::ptrdiff_t>{1, 0, 3, 2});
    CHECK(max_weight_matching(4, {{0, 1, 3}, {1, 2, 11}, {2, 3, 3}}) == std::vector<std::ptrdiff_t>{-1, 2, 1, -1});
    // Triangle 0-1-2 with a tail 2-3-4: the best choice is {0-2, 3-4}.
    const auto mate = max_weight_matching(5, {{0, 1, 8}, {1, 2, 9}, {0, 2, 10}, {2, 3, 7}, {3, 4, 6}});
    CHECK(mate == std::vector<std::ptrdiff_t>{2, -1, 0, 4, 3});
    CHECK(max_weight_matching(3, {}) == std::vector<std::ptrdiff_t>{-1, -1, -1});
}

TEST_CASE("blossom matching equals exhaustive search on random integer graphs") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<std::vector<std::int64_t>> w(n, std::vector<std::int64_t>(n, 0));
        std::vector<graph::WeightedEdge> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng() % 3 == 0) continue;
                const auto weight = static_cast<std::int64_t>(rng() % 20);
                w[i][j] = w[j][i] = weight;
                edges.push_back({i, j, weight});
            }
        }
        const auto mate = graph::max_weight_matching(n, edges);
        double total = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (mate[v] >= 0) {
                REQUIRE(static_cast<std::size_t>(mate[mate[v]]) == v);
                if (static_cast<std::size_t>(mate[v]) > v) total += static_cast<double>(w[v][mate[v]]);
            }
        }
        const std::vector<double> flat(n, 0.0);
        const double best = oracle::best_matching_value(
            n, flat, [&](std::size_t a, std::size_t b) { return static_cast<double>(w[a][b]); });
        REQUIRE(total == best);
    }
}

TEST_CASE("max-weight matching examples") {
    auto wm = max_weight_matching(yz({0, 0}, {0, 1}), difference_moments({3, 1}));
    CHECK(one_based(wm.matching) == std::vector<IndexPair>{{1, 2}});
    CHECK(wm.weights[0] == Approx(2));

    wm = max_weight_matching(yz({0, 0, 0}, {0, 1, 2}), difference_moments({1, 2, 3}));
    CHECK(wm.matching.empty());
}

TEST_CASE("max-weight matching equals the exhaustive optimum") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 9;
        const auto mu = oracle::uniform_vector(rng, n, -2, 2);
        std::vector<double> z(n);
        for (auto& v : z) v = trial % 2 ? static_cast<double>(rng() % 4) : oracle::uniform_vector(rng, 1, 0, 1)[0];
        const auto var = oracle::uniform_vector(rng, n * n, 0.5, 2);
        MomentEstimates me{[&](std::size_t i, std::size_t j) { return mu[i] - mu[j]; },
                           [&](std::size_t i, std::size_t j) { return var[std::min(i, j) * n + std::max(i, j)]; }};
        const Dataset d = yz(std::vector<double>(n, 0.0), z);
        const auto wm = max_weight_matching(d, me);
        REQUIRE(validate_matching(d, wm.matching));
        double score = 0.0;
        for (std::size_t l = 0; l < wm.matching.size(); ++l) {
            const auto [i, j] = wm.matching[l];
            CHECK(wm.weights[l] == Approx(oracle_weights(me.mean(i, j), me.variance(i, j))));
            score += wm.weights[l] * wm.weights[l];
        }
        const double best = oracle::best_matching_value(n, z, [&](std::size_t i, std::size_t j) {
            const double w = oracle_weights(me.mean(i, j), me.variance(i, j));
            return w * w;
        });
        CHECK(score == Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("brute-force best matching examples") {
    const auto r = brute_force_best_matching(std::vector<double>{2, 0, 1}, std::vector<double>{1, 2, 3});
    CHECK(r.value == Approx(4));
    CHECK(one_based(r.matching) == std::vector<IndexPair>{{1, 2}});
    CHECK(brute_force_best_matching(std::vector<double>{0, 1, 1, 3}, std::vector<double>{0, 1, 2, 3}).value == 0);
    const auto single = brute_force_best_matching(std::vector<double>{5}, std::vector<double>{0});
    CHECK(single.matching.empty());
    CHECK(single.value == 0);
    CHECK_THROWS(brute_force_best_matching(std::vector<double>(13, 0.0), std::vector<double>(13, 0.0)));
}

TEST_CASE("brute-force best matching agrees with the independent enumeration") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 8;
        const auto mu = oracle::uniform_vector(rng, n, -2, 2);
        std::vector<double> z(n);
        for (auto& v : z) v = static_cast<double>(rng() % 3);
        const auto r = brute_force_best_matching(mu, z);
        CHECK(validate_matching(z, r.matching));
        const double expected = oracle::best_matching_value(n, z, [&](std::size_t i, std::size_t j) {
            const double d = std::max(mu[i] - mu[j], 0.0);
            return d * d;
        });
        CHECK(r.value == Approx(expected).epsilon(1e-12));
        CHECK(matching_score(mu, r.matching) == Approx(r.value).epsilon(1e-12));
    }
}

TEST_CASE("isotonic median matching examples") {
    CHECK(one_based(isotonic_median_matching(std::vector<double>{2, 0, 1}, std::vector<double>{1, 2, 3})) ==
          std::vector<IndexPair>{{1, 2}});
    CHECK(isotonic_median_matching(std::vector<double>{0, 1, 2, 3}, std::vector<double>{0, 1, 2, 3}).empty());
    CHECK(one_based(isotonic_median_matching(std::vector<double>{1, 0}, std::vector<double>{0, 1})) ==
          std::vector<IndexPair>{{1, 2}});
    CHECK_THROWS_AS(isotonic_median_matching(std::vector<double>{1, 0}, std::vector<double>{1, 0}),
                    std::invalid_argument);
}

TEST_CASE("isotonic median matching is valid and certifies the ISNR lower bound") {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        auto u = oracle::uniform_vector(rng, n, -2, 2);
        const auto z = oracle::sorted_uniform(rng, n);
        const auto m = isotonic_median_matching(u, z);
        REQUIRE(validate_matching(z, m));
        const auto proj = isotonic_l1_projection(u, z);
        double gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) gap += (u[i] - proj[i]) * (u[i] - proj[i]);
        for (const auto& p : m.pairs()) {
            CHECK(u[p.first] > proj[p.first]);
            CHECK(proj[p.first] == proj[p.second]);
            CHECK(proj[p.second] > u[p.second]);
        }
        CHECK(matching_score(u, m) >= gap - 1e-9);
        const double isnr = empirical_isnr(u, z, 1.0);
        CHECK(matching_score(u, m) >= isnr * isnr - 1e-9);
    }
}

TEST_CASE("isotonic median matching stays valid with tied values") {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<double> u(n);
        for (auto& v : u) v = static_cast<double>(rng() % 3);
        const auto z = oracle::sorted_uniform(rng, n);
        CHECK(validate_matching(z, isotonic_median_matching(u, z)));
    }
}

TEST_CASE("plug-in fit recovers a noiseless partially linear model") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> g;
    const std::size_t n = 300;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = g(rng);
        y[i] = 0.6 * z[i] + 0.8 * g(rng);
        x[i] = 2 * y[i] + z[i];
    }
    const Dataset d(x, y, z);
    const auto me = fit_plugin_moments(d, KernelSpec::linear());
    for (int k = 0; k < 200; ++k) {
        const std::size_t i = rng() % n, j = rng() % n;
        CHECK(std::abs(me.mean(i, j) - (2 * (y[i] - y[j]) + (z[i] - z[j]))) <= 1e-6);
        CHECK(me.variance(i, j) > 0);
    }
}

TEST_CASE("plug-in slope is near zero when X ignores Y") {
    std::mt19937_64 rng(38);
    std::normal_distribution<double> g;
    const std::size_t n = 500;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        z[i] = g(rng);
    }
    const auto model = fit_plugin_model(Dataset(x, y, z), KernelSpec::linear());
    CHECK(std::abs(model.slope()) < 0.2);
    CHECK(model.residual_variance() == Approx(1.0).epsilon(0.2));
}

TEST_CASE("plug-in fit rejects degenerate designs") {
    CHECK_THROWS_AS(fit_plugin_moments(Dataset({1, 2, 3}, {1, 1, 1}, {1, 2, 3}), KernelSpec::linear()),
                    std::invalid_argument);
    CHECK_THROWS(fit_plugin_moments(Dataset({1, 2}, {1, 2}, {1, 2}), KernelSpec::linear()));
    CHECK_THROWS(fit_plugin_moments(Dataset({1, 2, 3}, {1, 2, 3}, {1, 2, 3}), KernelSpec::sign()));
}

TEST_CASE("plug-in matching on held-out rows is valid") {
    std::mt19937_64 rng(39);
    std::normal_distribution<double> g;
    auto make = [&](std::size_t n) {
        std::vector<double> x(n), y(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = g(rng);
            z[i] = g(rng);
            x[i] = 0.5 * y[i] + z[i] + g(rng);
        }
        return Dataset(x, y, z);
    };
    const auto model = fit_plugin_model(make(200), KernelSpec::linear());
    const auto target = make(40);
    const auto wm = max_weight_matching(target, model.moments_for(target));
    CHECK(validate_matching(target, wm.matching));
    CHECK(wm.matching.size() > 0);
}
