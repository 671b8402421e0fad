#include "pairswap/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pairswap {

namespace {

struct TieGroup {
    double z;
    double weight;
    double mean;
    std::vector<std::size_t> members;
};

std::vector<TieGroup> group_by_z(std::span<const double> values, std::span<const double> z,
                                 std::span<const double> weights) {
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });

    std::vector<TieGroup> groups;
    for (std::size_t idx : order) {
        if (groups.empty() || groups.back().z != z[idx]) {
            groups.push_back({z[idx], 0.0, 0.0, {}});
        }
        auto& g = groups.back();
        g.mean += weights[idx] * values[idx];
        g.weight += weights[idx];
        g.members.push_back(idx);
    }
    for (auto& g : groups) g.mean /= g.weight;
    return groups;
}

// Returns per-group fitted levels.
std::vector<double> pool_adjacent_violators(const std::vector<TieGroup>& groups) {
    struct Block {
        double mean;
        double weight;
        std::size_t count;
    };
    std::vector<Block> stack;
    stack.reserve(groups.size());
    for (const auto& g : groups) {
        Block b{g.mean, g.weight, 1};
        while (!stack.empty() && stack.back().mean >= b.mean) {
            const Block& top = stack.back();
            const double w = top.weight + b.weight;
            b.mean = (top.mean * top.weight + b.mean * b.weight) / w;
            b.weight = w;
            b.count += top.count;
            stack.pop_back();
        }
        stack.push_back(b);
    }
    std::vector<double> levels;
    levels.reserve(groups.size());
    for (const auto& b : stack) levels.insert(levels.end(), b.count, b.mean);
    return levels;
}

void require_sorted(std::span<const double> z) {
    if (!std::is_sorted(z.begin(), z.end())) throw std::invalid_argument("z must be sorted ascending");
}

}  // namespace

IsotonicFit pava_l2(std::span<const double> values, std::span<const double> z,
                    std::optional<std::span<const double>> weights) {
    if (values.size() != z.size()) throw std::invalid_argument("values and z differ in length");
    std::vector<double> unit;
    std::span<const double> w;
    if (weights) {
        if (weights->size() != values.size()) throw std::invalid_argument("weights differ in length");
        for (double v : *weights) {
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be positive");
        }
        w = *weights;
    } else {
        unit.assign(values.size(), 1.0);
        w = unit;
    }

    IsotonicFit fit;
    fit.fitted.assign(values.size(), 0.0);
    if (values.empty()) return fit;

    const auto groups = group_by_z(values, z, w);
    const auto levels = pool_adjacent_violators(groups);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t idx : groups[g].members) fit.fitted[idx] = levels[g];
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double r = values[i] - fit.fitted[i];
        ss += r * r;
    }
    fit.residual_norm = std::sqrt(ss);
    return fit;
}

IsotonicStepFunction IsotonicStepFunction::fit(std::span<const double> values, std::span<const double> z) {
    if (values.empty()) throw std::invalid_argument("cannot fit a step function to no data");
    if (values.size() != z.size()) throw std::invalid_argument("values and z differ in length");
    std::vector<double> unit(values.size(), 1.0);
    const auto groups = group_by_z(values, z, unit);
    IsotonicStepFunction f;
    f.levels_ = pool_adjacent_violators(groups);
    f.knots_.reserve(groups.size());
    for (const auto& g : groups) f.knots_.push_back(g.z);
    return f;
}

double IsotonicStepFunction::operator()(double z) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), z);
    if (it == knots_.begin()) return levels_.front();
    return levels_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double empirical_isnr(std::span<const double> mu, std::span<const double> z, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    return pava_l2(mu, z).residual_norm / sigma;
}

double median_of(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty vector");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    if (m % 2 == 1) return v[m / 2];
    return 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

std::vector<double> isotonic_l1_projection(std::span<const double> u, std::span<const double> z) {
    if (u.size() != z.size()) throw std::invalid_argument("u and z differ in length");
    require_sorted(z);
    const std::size_t n = u.size();
    if (n == 0) return {};

    // Tie groups in z are contiguous index ranges [start[g], start[g+1]).
    std::vector<std::size_t> start;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || z[i] != z[i - 1]) start.push_back(i);
    }
    const std::size_t groups = start.size();
    start.push_back(n);

    // med[a][b]: median of u over groups a..b.
    std::vector<std::vector<double>> med(groups, std::vector<double>(groups, 0.0));
    std::vector<double> window;
    for (std::size_t a = 0; a < groups; ++a) {
        window.clear();
        for (std::size_t b = a; b < groups; ++b) {
            for (std::size_t i = start[b]; i < start[b + 1]; ++i) {
                window.insert(std::upper_bound(window.begin(), window.end(), u[i]), u[i]);
            }
            const std::size_t m = window.size();
            med[a][b] = (m % 2 == 1) ? window[m / 2] : 0.5 * (window[m / 2 - 1] + window[m / 2]);
        }
    }
    // Suffix minima over b >= c, in place.
    for (std::size_t a = 0; a < groups; ++a) {
        for (std::size_t b = groups - 1; b > a; --b) med[a][b - 1] = std::min(med[a][b - 1], med[a][b]);
    }
    std::vector<double> out(n);
    for (std::size_t c = 0; c < groups; ++c) {
        double best = med[0][c];
        for (std::size_t a = 1; a <= c; ++a) best = std::max(best, med[a][c]);
        for (std::size_t i = start[c]; i < start[c + 1]; ++i) out[i] = best;
    }
    return out;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> values, std::vector<double> probabilities)
    : values_(std::move(values)), probs_(std::move(probabilities)) {
    if (values_.empty() || values_.size() != probs_.size()) {
        throw std::invalid_argument("distribution needs matching non-empty support and probabilities");
    }
    if (!std::is_sorted(values_.begin(), values_.end()) ||
        std::adjacent_find(values_.begin(), values_.end()) != values_.end()) {
        throw std::invalid_argument("support points must be strictly increasing");
    }
    double total = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0)) throw std::invalid_argument("probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to one");
}

DiscreteDistribution DiscreteDistribution::from_sample(std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::vector<double> v(sample.begin(), sample.end());
    std::sort(v.begin(), v.end());
    std::vector<double> values, probs;
    const double mass = 1.0 / static_cast<double>(v.size());
    for (double x : v) {
        if (values.empty() || values.back() != x) {
            values.push_back(x);
            probs.push_back(0.0);
        }
        probs.back() += mass;
    }
    return DiscreteDistribution(std::move(values), std::move(probs));
}

double DiscreteDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) m += probs_[i] * values_[i];
    return m;
}

double DiscreteDistribution::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) v += probs_[i] * (values_[i] - m) * (values_[i] - m);
    return v;
}

double DiscreteDistribution::quantile(double q) const {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        cumulative += probs_[i];
        if (cumulative >= q) return values_[i];
    }
    return values_.back();
}

double deviance(const DiscreteDistribution& dist) {
    // Breakpoints of q -> F^{-1}(q) and of q -> F^{-1}(1-q); both quantile
    // functions are constant between consecutive breakpoints.
    std::vector<double> cuts{0.0, 1.0};
    double cumulative = 0.0;
    for (double p : dist.probabilities()) {
        cumulative += p;
        if (cumulative < 1.0) {
            cuts.push_back(cumulative);
            cuts.push_back(1.0 - cumulative);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double width = cuts[i + 1] - cuts[i];
        if (width <= 0.0) continue;
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        const double gap = dist.quantile(1.0 - mid) - dist.quantile(mid);
        total += width * gap * gap;
    }
    return total;
}

double deviance(std::span<const double> sample) {
    // Equal masses 1/n: F^{-1} equals the k-th order statistic on ((k-1)/n, k/n].
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::vector<double> v(sample.begin(), sample.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double gap = v[n - 1 - k] - v[k];
        total += gap * gap;
    }
    return total / static_cast<double>(n);
}

namespace {

std::vector<double> bernoulli_draws(const std::vector<double>& means, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        std::bernoulli_distribution draw(std::clamp(means[i], 0.0, 1.0));
        out[i] = draw(rng) ? 1.0 : 0.0;
    }
    return out;
}

void require_binary(std::span<const double> x) {
    for (double v : x) {
        if (v != 0.0 && v != 1.0) throw std::invalid_argument("synthetic control requires a 0/1 response");
    }
}

}  // namespace

std::vector<double> fit_synthetic_control(std::span<const double> x_binary, std::span<const double> z,
                                          std::uint64_t seed) {
    require_binary(x_binary);
    return bernoulli_draws(pava_l2(x_binary, z).fitted, seed);
}

std::vector<double> synthetic_control_from(std::span<const double> train_x, std::span<const double> train_z,
                                           std::span<const double> target_z, std::uint64_t seed) {
    require_binary(train_x);
    const auto step = IsotonicStepFunction::fit(train_x, train_z);
    std::vector<double> means(target_z.size());
    for (std::size_t i = 0; i < target_z.size(); ++i) means[i] = step(target_z[i]);
    return bernoulli_draws(means, seed);
}

}  // namespace pairswap
