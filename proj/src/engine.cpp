#include "pairswap/engine.hpp"

#include <cmath>
#include <stdexcept>

#include "pairswap/rng.hpp"
#include "pairswap/stats.hpp"

namespace pairswap {

namespace {

void check_lengths(std::span<const double> xs, const Matching& m, const WeightVector& w) {
    if (w.size() != m.size()) throw std::invalid_argument("weight vector length differs from matching size");
    for (const auto& p : m.pairs()) {
        if (p.first >= xs.size() || p.second >= xs.size()) {
            throw std::invalid_argument("matching refers to rows beyond the data vector");
        }
    }
}

// d_l = w_l (psi(x_i, x_j) - psi(x_j, x_i)). A swap set S gives
// T(x^s) - T(x) = -sum_{l in S} d_l, so T(x^s) >= T(x) iff that sum <= 0.
std::vector<double> swap_differences(std::span<const double> xs, const Matching& m, const WeightVector& w,
                                     const KernelSpec& k) {
    std::vector<double> d(m.size());
    for (std::size_t l = 0; l < m.size(); ++l) {
        const double a = xs[m[l].first];
        const double b = xs[m[l].second];
        d[l] = w[l] * k(a, b) - w[l] * k(b, a);
    }
    return d;
}

TestResult exact_from_differences(const std::vector<double>& d) {
    const std::size_t L = d.size();
    if (L > kMaxExactPairs) {
        throw std::invalid_argument("exact p-value needs L <= " + std::to_string(kMaxExactPairs) + " pairs (got " +
                                    std::to_string(L) + "); use the monte carlo method");
    }
    const std::uint64_t total = std::uint64_t{1} << L;
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double sum = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            if ((mask >> l) & 1U) sum += d[l];
        }
        if (sum <= 0.0) ++count;
    }
    TestResult r;
    r.method = PValueMethod::exact;
    r.num_pairs = L;
    r.p_value = static_cast<double>(count) / static_cast<double>(total);
    return r;
}

}  // namespace

MatchingStrategy parse_strategy(const std::string& text) {
    if (text == "neighbour" || text == "neighbor") return NeighbourStrategy{};
    if (text.rfind("crossbin", 0) == 0) return CrossBinStrategy{CrossBinConfig::parse(text)};
    if (text == "plugin") {
        throw std::invalid_argument("plug-in matching requires a fitted model (supply training data)");
    }
    throw std::invalid_argument("unknown matching strategy '" + text + "'");
}

std::string describe(const MatchingStrategy& strategy) {
    if (std::holds_alternative<NeighbourStrategy>(strategy)) return "neighbour";
    if (const auto* c = std::get_if<CrossBinStrategy>(&strategy)) return c->bins.describe();
    return "plugin";
}

WeightedMatching build_matching(const Dataset& d, const MatchingStrategy& strategy) {
    if (std::holds_alternative<NeighbourStrategy>(strategy)) return neighbour_matching(d);
    if (const auto* c = std::get_if<CrossBinStrategy>(&strategy)) return cross_bin_matching(d, c->bins);
    const auto& plug = std::get<PlugInStrategy>(strategy);
    if (!plug.model) throw std::invalid_argument("plug-in strategy without a fitted model");
    return max_weight_matching(d, plug.model->moments_for(d));
}

double statistic(std::span<const double> xs, const Matching& m, const WeightVector& w, const KernelSpec& k) {
    check_lengths(xs, m, w);
    double t = 0.0;
    for (std::size_t l = 0; l < m.size(); ++l) t += w[l] * k(xs[m[l].first], xs[m[l].second]);
    return t;
}

TestResult exact_p_value(std::span<const double> xs, const Matching& m, const WeightVector& w,
                         const KernelSpec& k) {
    check_lengths(xs, m, w);
    TestResult r = exact_from_differences(swap_differences(xs, m, w, k));
    r.statistic = statistic(xs, m, w, k);
    return r;
}

TestResult monte_carlo_p_value(std::span<const double> xs, const Matching& m, const WeightVector& w,
                               const KernelSpec& k, std::size_t draws, std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("monte carlo needs at least one draw");
    check_lengths(xs, m, w);
    const auto d = swap_differences(xs, m, w, k);
    const std::size_t L = d.size();
    std::size_t count = 0;
    for (std::size_t draw = 0; draw < draws; ++draw) {
        SplitMix64 bits(derive_seed(seed, draw));
        double sum = 0.0;
        for (std::size_t base = 0; base < L; base += 64) {
            const std::uint64_t word = bits();
            const std::size_t span = std::min<std::size_t>(64, L - base);
            for (std::size_t b = 0; b < span; ++b) {
                if ((word >> b) & 1U) sum += d[base + b];
            }
        }
        if (sum <= 0.0) ++count;
    }
    TestResult r;
    r.statistic = statistic(xs, m, w, k);
    r.method = PValueMethod::monte_carlo;
    r.num_pairs = L;
    r.num_draws = draws;
    r.seed = seed;
    r.p_value = static_cast<double>(1 + count) / static_cast<double>(1 + draws);
    return r;
}

TestResult run_test(const Dataset& d, const TestConfig& cfg, const MatchingStrategy& strategy) {
    const auto built = build_matching(d, strategy);
    if (!validate_matching(d, built.matching)) {
        throw std::logic_error("matching strategy produced an invalid matching");
    }
    TestResult r = cfg.method == PValueMethod::exact
                       ? exact_p_value(d.x(), built.matching, built.weights, cfg.kernel)
                       : monte_carlo_p_value(d.x(), built.matching, built.weights, cfg.kernel, cfg.draws, cfg.seed);
    if (cfg.method == PValueMethod::exact) r.seed.reset();
    if (built.matching.empty()) {
        r.warnings.push_back("matching strategy '" + describe(strategy) +
                             "' produced no pairs; reporting p = 1 (no evidence against the null)");
    }
    return r;
}

double theoretical_power(std::span<const double> means, std::span<const double> variances, const WeightVector& w,
                         double alpha) {
    if (means.size() != w.size() || variances.size() != w.size()) {
        throw std::invalid_argument("means, variances and weights must share length L");
    }
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) {
        if (!(variances[l] > 0.0)) throw std::invalid_argument("variances must be positive");
        signal += w[l] * means[l];
        noise += w[l] * w[l] * variances[l];
    }
    if (!(noise > 0.0)) throw std::invalid_argument("power approximation needs sum w^2 var > 0");
    return normal_cdf(signal / std::sqrt(noise) - normal_isf(alpha));
}

double normal_approx_p_value(std::span<const double> xs, const Matching& m, const WeightVector& w,
                             const KernelSpec& k) {
    check_lengths(xs, m, w);
    double t = 0.0;
    double ss = 0.0;
    for (std::size_t l = 0; l < m.size(); ++l) {
        const double term = w[l] * k(xs[m[l].first], xs[m[l].second]);
        t += term;
        ss += term * term;
    }
    if (ss == 0.0) return 1.0;
    return normal_sf(t / std::sqrt(ss));
}

bool satisfies_linear_condition(std::span<const double> beta, const Matching& m) {
    for (const auto& p : m.pairs()) {
        if (p.first >= beta.size() || p.second >= beta.size()) throw std::out_of_range("coefficient index");
        if (!(beta[p.first] >= beta[p.second])) return false;
    }
    return true;
}

TestResult linear_statistic_p_value(std::span<const double> xs, const Matching& m, std::span<const double> beta) {
    if (!satisfies_linear_condition(beta, m)) {
        throw std::invalid_argument("linear statistic needs beta_first >= beta_second on every pair");
    }
    // psi_l(x, x') - psi_l(x', x) = (beta_i - beta_j)(x - x'): the linear
    // kernel with weights beta_i - beta_j.
    std::vector<double> w(m.size());
    for (std::size_t l = 0; l < m.size(); ++l) w[l] = beta[m[l].first] - beta[m[l].second];
    TestResult r = exact_p_value(xs, m, WeightVector(std::move(w)), KernelSpec::linear());
    double t = 0.0;
    for (std::size_t i = 0; i < xs.size() && i < beta.size(); ++i) t += beta[i] * xs[i];
    r.statistic = t;
    return r;
}

}  // namespace pairswap
