#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>

#include "pairswap/commands.hpp"
#include "pairswap/isotonic.hpp"
#include "pairswap/matching.hpp"

namespace pairswap::cli {

namespace {

struct Check {
    std::string name;
    std::function<bool(std::mt19937_64&)> run_once;
};

std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

std::vector<double> sorted_uniform(std::mt19937_64& rng, std::size_t n) {
    auto z = uniform_vector(rng, n, 0.0, 1.0);
    std::sort(z.begin(), z.end());
    return z;
}

std::size_t draw_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Matching of consecutive pairs (0,1), (2,3), ... on L pairs.
Matching consecutive(std::size_t L) {
    std::vector<IndexPair> pairs;
    for (std::size_t l = 0; l < L; ++l) pairs.push_back({2 * l, 2 * l + 1});
    return Matching(std::move(pairs));
}

std::vector<Check> property_checks() {
    std::vector<Check> checks;

    for (const auto& kernel : {KernelSpec::linear(), KernelSpec::sign(), KernelSpec::truncated(1.0)}) {
        checks.push_back({"kernel " + kernel.name() + " anti-monotone and anti-symmetric", [kernel](auto& rng) {
                              std::uniform_real_distribution<double> x(-10.0, 10.0), d(0.0, 10.0);
                              for (int i = 0; i < 500; ++i) {
                                  const double a = x(rng), b = x(rng);
                                  if (!check_anti_monotonicity(kernel, a, b, d(rng), d(rng))) return false;
                                  if (kernel(a, b) != -kernel(b, a)) return false;
                              }
                              return true;
                          }});
    }

    checks.push_back({"apply_swap is an involution", [](auto& rng) {
                          const std::size_t L = draw_size(rng, 0, 8);
                          const auto xs = uniform_vector(rng, 2 * L + 1, -5.0, 5.0);
                          const auto m = consecutive(L);
                          const auto s = SwapVector::from_mask(rng() & ((std::uint64_t{1} << L) - 1), L);
                          return apply_swap(apply_swap(xs, m, s), m, s) == xs;
                      }});

    checks.push_back({"exact p-value quantile bound", [](auto& rng) {
                          const std::size_t L = draw_size(rng, 1, 6);
                          const auto xs = uniform_vector(rng, 2 * L, -2.0, 2.0);
                          const auto m = consecutive(L);
                          const WeightVector w(uniform_vector(rng, L, 0.0, 2.0));
                          std::vector<double> p;
                          for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
                              const auto swapped = apply_swap(xs, m, SwapVector::from_mask(mask, L));
                              p.push_back(exact_p_value(swapped, m, w, KernelSpec::linear()).p_value);
                          }
                          for (int a = 1; a < 100; ++a) {
                              const double alpha = a / 100.0;
                              const auto hits = std::count_if(p.begin(), p.end(), [&](double v) { return v <= alpha; });
                              if (static_cast<double>(hits) > alpha * static_cast<double>(p.size())) return false;
                          }
                          return true;
                      }});

    checks.push_back({"exact p-value invariant to weight rescaling", [](auto& rng) {
                          const std::size_t L = draw_size(rng, 1, 8);
                          const auto xs = uniform_vector(rng, 2 * L, -2.0, 2.0);
                          const auto m = consecutive(L);
                          const WeightVector w(uniform_vector(rng, L, 0.0, 2.0));
                          const double c = std::exp(std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
                          const auto k = KernelSpec::sign();
                          return exact_p_value(xs, m, w, k).p_value == exact_p_value(xs, m, w.scaled(c), k).p_value;
                      }});

    checks.push_back({"PAVA output monotone and orthogonal to its residual", [](auto& rng) {
                          const std::size_t n = draw_size(rng, 1, 30);
                          const auto v = uniform_vector(rng, n, -3.0, 3.0);
                          const auto z = sorted_uniform(rng, n);
                          const auto fit = pava_l2(v, z);
                          double dot = 0.0;
                          for (std::size_t i = 0; i < n; ++i) {
                              if (i > 0 && fit.fitted[i] < fit.fitted[i - 1] - 1e-12) return false;
                              dot += (v[i] - fit.fitted[i]) * fit.fitted[i];
                          }
                          return std::abs(dot) <= 1e-8;
                      }});

    checks.push_back({"L1 median projection monotone", [](auto& rng) {
                          const std::size_t n = draw_size(rng, 1, 20);
                          const auto u = uniform_vector(rng, n, -3.0, 3.0);
                          const auto proj = isotonic_l1_projection(u, sorted_uniform(rng, n));
                          return std::is_sorted(proj.begin(), proj.end());
                      }});

    checks.push_back({"deviance between 2 Var and 4 Var", [](auto& rng) {
                          const auto sample = uniform_vector(rng, draw_size(rng, 1, 12), -4.0, 4.0);
                          const auto dist = DiscreteDistribution::from_sample(sample);
                          const double dev = deviance(dist), var = dist.variance();
                          return dev >= 2.0 * var - 1e-9 && dev <= 4.0 * var + 1e-9;
                      }});

    checks.push_back({"max-weight matching equals brute force", [](auto& rng) {
                          const std::size_t n = draw_size(rng, 2, 8);
                          const auto mu = uniform_vector(rng, n, -2.0, 2.0);
                          const auto z = sorted_uniform(rng, n);
                          const Dataset d(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), z);
                          MomentEstimates me{[&](std::size_t i, std::size_t j) { return mu[i] - mu[j]; },
                                             [](std::size_t, std::size_t) { return 1.0; }};
                          const auto wm = max_weight_matching(d, me);
                          const double best = brute_force_best_matching(mu, z).value;
                          return validate_matching(d, wm.matching) &&
                                 std::abs(matching_score(mu, wm.matching) - best) <= 1e-6 * std::max(1.0, best);
                      }});

    checks.push_back({"oracle matching between ISNR^2 and 2 ISNR^2", [](auto& rng) {
                          const std::size_t n = draw_size(rng, 1, 8);
                          const auto mu = uniform_vector(rng, n, -2.0, 2.0);
                          const auto z = sorted_uniform(rng, n);
                          const double isnr2 = std::pow(empirical_isnr(mu, z, 1.0), 2);
                          const double s = brute_force_best_matching(mu, z).value;
                          return isnr2 <= s + 1e-9 && s <= 2.0 * isnr2 + 1e-9;
                      }});

    return checks;
}

int validate_user_matching(const CheckOptions& opts, std::ostream& out) {
    if (!opts.data_file || !opts.pairs_file) throw io::UsageError("--data and --pairs must be given together");
    const auto z = io::read_columns_file(*opts.data_file, {opts.schema.z_col}, opts.schema.delimiter,
                                         opts.schema.has_header)[0];
    const auto cols = io::read_columns_file(*opts.pairs_file, {"i", "j"}, ',', true);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t l = 0; l < cols[0].size(); ++l) {
        const double i = cols[0][l], j = cols[1][l];
        if (i != std::floor(i) || j != std::floor(j) || i < 1 || j < 1 || i > z.size() || j > z.size()) {
            throw io::UsageError("pair " + std::to_string(l + 1) + " has an index outside 1.." +
                                 std::to_string(z.size()));
        }
        pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    bool ok = false;
    try {
        ok = validate_matching(z, Matching::from_one_based(pairs));
    } catch (const std::invalid_argument&) {
        ok = false;  // repeated indices
    }
    out << (ok ? "valid" : "invalid") << " matching: " << pairs.size() << " pairs on " << z.size() << " rows\n";
    return ok ? 0 : 2;
}

}  // namespace

int cmd_check(const CheckOptions& opts, std::ostream& out) {
    if (opts.data_file || opts.pairs_file) return validate_user_matching(opts, out);
    if (opts.trials < 1) throw io::UsageError("--trials must be at least 1");
    bool all = true;
    std::uint64_t stream = 0;
    for (const auto& check : property_checks()) {
        std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL * ++stream);
        std::size_t failures = 0;
        for (std::size_t t = 0; t < opts.trials; ++t) {
            if (!check.run_once(rng)) ++failures;
        }
        out << (failures == 0 ? "PASS  " : "FAIL  ") << check.name;
        if (failures > 0) out << "  (" << failures << " of " << opts.trials << " instances failed)";
        out << '\n';
        all = all && failures == 0;
    }
    return all ? 0 : 1;
}

}  // namespace pairswap::cli
