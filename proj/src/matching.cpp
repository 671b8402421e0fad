#include "pairswap/matching.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>

#include "pairswap/blossom.hpp"

namespace pairswap {

namespace {

std::vector<std::size_t> z_order(std::span<const double> z) {
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
    return order;
}

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("cannot parse number in '" + context + "'");
    }
    return value;
}

}  // namespace

CrossBinConfig CrossBinConfig::fixed(std::size_t bins) {
    if (bins < 2) throw std::invalid_argument("cross-bin matching needs K >= 2 bins");
    CrossBinConfig c;
    c.fixed_ = bins;
    return c;
}

CrossBinConfig CrossBinConfig::power_rule(double exponent) {
    if (!(exponent > 0.0 && exponent < 1.0)) throw std::invalid_argument("bin exponent must lie in (0, 1)");
    CrossBinConfig c;
    c.exponent_ = exponent;
    return c;
}

CrossBinConfig CrossBinConfig::parse(const std::string& text) {
    std::string rest = text;
    if (rest.rfind("crossbin:", 0) == 0) rest = rest.substr(9);
    if (rest.rfind("pow:", 0) == 0) {
        const std::string e = rest.substr(4);
        const auto slash = e.find('/');
        if (slash != std::string::npos) {
            return power_rule(parse_double(e.substr(0, slash), text) / parse_double(e.substr(slash + 1), text));
        }
        return power_rule(parse_double(e, text));
    }
    const double k = parse_double(rest, text);
    if (k != std::floor(k) || k < 0) throw std::invalid_argument("bin count must be an integer in '" + text + "'");
    return fixed(static_cast<std::size_t>(k));
}

std::size_t CrossBinConfig::bins_for(std::size_t n) const {
    std::size_t k = fixed_;
    if (is_power_rule()) {
        // The small offset keeps exact powers such as 1000^(2/3) = 100 from
        // rounding down to 99.
        k = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), exponent_) + 1e-9));
    }
    if (k < 2) throw std::invalid_argument("cross-bin matching needs K >= 2 bins (n = " + std::to_string(n) + ")");
    if (k > n) throw std::invalid_argument("cross-bin matching needs K <= n");
    return k;
}

std::string CrossBinConfig::describe() const {
    if (is_power_rule()) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, exponent_);
        return "crossbin:pow:" + std::string(buf, ptr);
    }
    return "crossbin:" + std::to_string(fixed_);
}

WeightedMatching neighbour_matching(const Dataset& d) {
    const std::size_t n = d.size();
    if (n < 2) throw std::invalid_argument("neighbour matching needs at least two rows");
    const auto y = d.y();
    const auto order = z_order(d.z());
    std::vector<IndexPair> pairs;
    std::vector<double> weights;
    for (std::size_t m = 0; m + 1 < n; m += 2) {
        const std::size_t i = order[m];
        const std::size_t j = order[m + 1];
        if (y[i] > y[j]) {
            pairs.push_back({i, j});
            weights.push_back(y[i] - y[j]);
        }
    }
    return {Matching(std::move(pairs)), WeightVector(std::move(weights))};
}

WeightedMatching cross_bin_matching(const Dataset& d, const CrossBinConfig& cfg) {
    const std::size_t n = d.size();
    const std::size_t bins = cfg.bins_for(n);
    const std::size_t m = n / bins;
    const auto y = d.y();
    const auto order = z_order(d.z());

    // ranked[k]: indices of bin k sorted by Y ascending, ties by row index.
    std::vector<std::vector<std::size_t>> ranked(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        auto& bin = ranked[k];
        bin.assign(order.begin() + static_cast<std::ptrdiff_t>(k * m),
                   order.begin() + static_cast<std::ptrdiff_t>((k + 1) * m));
        std::sort(bin.begin(), bin.end(), [&](std::size_t a, std::size_t b) {
            return y[a] < y[b] || (y[a] == y[b] && a < b);
        });
    }
    std::vector<IndexPair> pairs;
    std::vector<double> weights;
    for (std::size_t k = 0; k + 1 < bins; ++k) {
        for (std::size_t s = 1; s <= m / 2; ++s) {
            const std::size_t i = ranked[k][m - s];
            const std::size_t j = ranked[k + 1][s - 1];
            if (y[i] > y[j]) {
                pairs.push_back({i, j});
                weights.push_back(y[i] - y[j]);
            }
        }
    }
    return {Matching(std::move(pairs)), WeightVector(std::move(weights))};
}

double oracle_weights(double mean, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("variance estimate must be positive");
    return std::max(mean, 0.0) / variance;
}

WeightedMatching max_weight_matching(const Dataset& d, const MomentEstimates& moments) {
    const std::size_t n = d.size();
    if (n < 2) throw std::invalid_argument("matching needs at least two rows");
    const auto z = d.z();

    struct Candidate {
        std::size_t first;
        std::size_t second;
        double w;
    };
    std::vector<Candidate> candidates;
    double max_score = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            Candidate c{};
            if (z[a] < z[b]) {
                c = {a, b, oracle_weights(moments.mean(a, b), moments.variance(a, b))};
            } else if (z[b] < z[a]) {
                c = {b, a, oracle_weights(moments.mean(b, a), moments.variance(b, a))};
            } else {
                const double forward = oracle_weights(moments.mean(a, b), moments.variance(a, b));
                const double backward = oracle_weights(moments.mean(b, a), moments.variance(b, a));
                c = backward > forward ? Candidate{b, a, backward} : Candidate{a, b, forward};
            }
            if (c.w > 0.0) {
                candidates.push_back(c);
                max_score = std::max(max_score, c.w * c.w);
            }
        }
    }
    if (candidates.empty()) return {};
    if (!std::isfinite(max_score)) throw std::invalid_argument("matching scores overflow");

    // Scores are mapped to integers below 2^40 so the blossom duals stay exact.
    const double scale = std::ldexp(1.0, 40) / max_score;
    std::vector<graph::WeightedEdge> edges;
    std::vector<std::size_t> edge_candidate;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double score = candidates[c].w * candidates[c].w;
        const auto scaled = static_cast<std::int64_t>(std::llround(score * scale));
        if (scaled <= 0) continue;
        edges.push_back({candidates[c].first, candidates[c].second, scaled});
        edge_candidate.push_back(c);
    }
    const auto mate = graph::max_weight_matching(n, edges);

    std::vector<IndexPair> pairs;
    std::vector<double> weights;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& c = candidates[edge_candidate[e]];
        if (mate[c.first] == static_cast<std::ptrdiff_t>(c.second)) {
            pairs.push_back({c.first, c.second});
            weights.push_back(c.w);
        }
    }
    return {Matching(std::move(pairs)), WeightVector(std::move(weights))};
}

PlugInModel fit_plugin_model(const Dataset& train, const KernelSpec& kernel) {
    if (kernel.kind() != KernelKind::linear) {
        throw std::invalid_argument("the built-in plug-in estimator supports the linear kernel only");
    }
    const std::size_t n = train.size();
    if (n < 3) throw std::invalid_argument("plug-in fitting needs at least three training rows");
    const auto x = train.x();
    const auto y = train.y();
    const auto z = train.z();

    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double syy = 0.0;
    for (double v : y) syy += (v - y_mean) * (v - y_mean);
    if (!(syy > 0.0)) {
        throw std::invalid_argument("constant Y column: plug-in moments are not identifiable; supply estimates directly");
    }

    // The profile score h(b) = sum (y - ybar)(x - b y - g_b) is non-increasing
    // in b, where g_b is the isotonic fit of x - b y. Its root is the joint
    // least-squares slope; plain backfitting converges too slowly when Y and Z
    // are strongly correlated.
    std::vector<double> partial(n);
    std::size_t evaluations = 0;
    const auto h = [&](double b) {
        ++evaluations;
        for (std::size_t i = 0; i < n; ++i) partial[i] = x[i] - b * y[i];
        const auto g = pava_l2(partial, z);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (y[i] - y_mean) * (partial[i] - g.fitted[i]);
        return s;
    };
    double ols = 0.0;
    for (std::size_t i = 0; i < n; ++i) ols += (y[i] - y_mean) * x[i];
    ols /= syy;
    double step = std::max(1.0, std::abs(ols));
    double lo = ols - step, hi = ols + step;
    double h_lo = h(lo), h_hi = h(hi);
    for (int expand = 0; h_lo < 0.0 || h_hi > 0.0; ++expand) {
        if (expand > 60) throw std::runtime_error("plug-in slope search failed to bracket a root");
        step *= 2.0;
        if (h_lo < 0.0) h_lo = h(lo = ols - step);
        if (h_hi > 0.0) h_hi = h(hi = ols + step);
    }
    double slope = lo;
    if (h_hi == 0.0) {
        slope = hi;
    } else if (h_lo != 0.0) {
        std::uintmax_t max_iter = 200;
        const auto root = boost::math::tools::toms748_solve(h, lo, hi, h_lo, h_hi,
                                                            boost::math::tools::eps_tolerance<double>(52), max_iter);
        slope = 0.5 * (root.first + root.second);
    }
    const std::size_t iter = evaluations;
    for (std::size_t i = 0; i < n; ++i) partial[i] = x[i] - slope * y[i];

    PlugInModel model;
    model.slope_ = slope;
    model.iterations_ = iter;
    model.g_ = IsotonicStepFunction::fit(partial, z);
    double ss = 0.0;
    double x_var = 0.0;
    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = x[i] - model.mean_at(y[i], z[i]);
        ss += r * r;
        x_var += (x[i] - x_mean) * (x[i] - x_mean);
    }
    x_var /= static_cast<double>(n);
    // Noiseless fits would otherwise give V = 0.
    model.sigma2_ = std::max(ss / static_cast<double>(n), 1e-12 * std::max(1.0, x_var));
    return model;
}

MomentEstimates PlugInModel::moments_for(const Dataset& target) const {
    auto mu = std::make_shared<std::vector<double>>(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) (*mu)[i] = mean_at(target.y()[i], target.z()[i]);
    const double v = 2.0 * sigma2_;
    return {[mu](std::size_t i, std::size_t j) { return (*mu)[i] - (*mu)[j]; },
            [v](std::size_t, std::size_t) { return v; }};
}

MomentEstimates fit_plugin_moments(const Dataset& train, const KernelSpec& kernel) {
    return fit_plugin_model(train, kernel).moments_for(train);
}

Matching isotonic_median_matching(std::span<const double> u, std::span<const double> z) {
    if (u.size() != z.size()) throw std::invalid_argument("u and z differ in length");
    if (!std::is_sorted(z.begin(), z.end())) throw std::invalid_argument("z must be sorted ascending");
    const std::size_t n = u.size();
    if (n == 0) return {};

    std::vector<double> sorted(u.begin(), u.end());
    std::sort(sorted.begin(), sorted.end());
    double min_gap = std::numeric_limits<double>::infinity();
    bool has_ties = false;
    for (std::size_t i = 1; i < n; ++i) {
        const double gap = sorted[i] - sorted[i - 1];
        if (gap == 0.0) {
            has_ties = true;
        } else {
            min_gap = std::min(min_gap, gap);
        }
    }
    std::vector<double> v(u.begin(), u.end());
    if (has_ties) {
        if (!std::isfinite(min_gap)) min_gap = std::max(1.0, std::abs(sorted.front()));
        const double eps = min_gap / (4.0 * static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) v[i] += eps * static_cast<double>(i);
    }

    const auto projected = isotonic_l1_projection(v, z);
    std::vector<IndexPair> pairs;
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start;
        while (end < n && projected[end] == projected[start]) ++end;
        const double level = projected[start];
        std::vector<std::size_t> above, below;
        for (std::size_t i = start; i < end; ++i) {
            if (v[i] > level) above.push_back(i);
            if (v[i] < level) below.push_back(i);
        }
        const std::size_t count = std::min(above.size(), below.size());
        for (std::size_t r = 0; r < count; ++r) pairs.push_back({above[r], below[r]});
        start = end;
    }
    return Matching(std::move(pairs));
}

double matching_score(std::span<const double> mu, const Matching& m) {
    double total = 0.0;
    for (const auto& p : m.pairs()) {
        const double diff = std::max(mu[p.first] - mu[p.second], 0.0);
        total += diff * diff;
    }
    return total;
}

namespace {

struct Enumerator {
    std::span<const double> mu;
    std::span<const double> z;
    std::vector<char> used;
    std::vector<IndexPair> current;
    double current_value = 0.0;
    BruteForceResult best;

    static double gain(double a, double b) {
        const double d = std::max(a - b, 0.0);
        return d * d;
    }

    void run(std::size_t i) {
        const std::size_t n = mu.size();
        while (i < n && used[i]) ++i;
        if (i >= n) {
            if (current_value > best.value) {
                best.value = current_value;
                best.matching = Matching(current);
            }
            return;
        }
        used[i] = 1;
        run(i + 1);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (used[j]) continue;
            IndexPair pair{i, j};
            if (z[j] < z[i]) {
                pair = {j, i};
            } else if (z[j] == z[i] && gain(mu[j], mu[i]) > gain(mu[i], mu[j])) {
                pair = {j, i};
            }
            const double g = gain(mu[pair.first], mu[pair.second]);
            used[j] = 1;
            current.push_back(pair);
            current_value += g;
            run(i + 1);
            current_value -= g;
            current.pop_back();
            used[j] = 0;
        }
        used[i] = 0;
    }
};

}  // namespace

BruteForceResult brute_force_best_matching(std::span<const double> mu, std::span<const double> z) {
    if (mu.size() != z.size()) throw std::invalid_argument("mu and z differ in length");
    if (mu.size() > 12) throw std::invalid_argument("brute-force matching is limited to n <= 12");
    Enumerator e{mu, z, std::vector<char>(mu.size(), 0), {}, 0.0, {}};
    e.run(0);
    // Recompute in pair order so the value matches matching_score exactly.
    e.best.value = matching_score(mu, e.best.matching);
    return e.best;
}

}  // namespace pairswap
