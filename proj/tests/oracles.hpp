#pragma once

// Slow, independent reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "pairswap/core.hpp"
#include "pairswap/kernels.hpp"

namespace oracle {

/// Isotonic L2 regression by enumerating every split of the distinct-z
/// groups into consecutive blocks. Each candidate fits block means; the best
/// monotone candidate is the constrained least-squares solution.
inline std::vector<double> isotonic_qp(const std::vector<double>& v, const std::vector<double>& z,
                                       const std::vector<double>& w = {}) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] < z[b]; });
    // Group boundaries: positions in sorted order where z changes.
    std::vector<std::size_t> cuts;
    for (std::size_t k = 1; k < n; ++k) {
        if (z[order[k]] != z[order[k - 1]]) cuts.push_back(k);
    }
    const auto weight = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_fit;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cuts.size()); ++mask) {
        std::vector<std::size_t> bounds{0};
        for (std::size_t c = 0; c < cuts.size(); ++c) {
            if ((mask >> c) & 1U) bounds.push_back(cuts[c]);
        }
        bounds.push_back(n);
        std::vector<double> fit(n);
        double prev = -std::numeric_limits<double>::infinity();
        bool monotone = true;
        double sse = 0.0;
        for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
            double sw = 0.0, swv = 0.0;
            for (std::size_t k = bounds[b]; k < bounds[b + 1]; ++k) {
                sw += weight(order[k]);
                swv += weight(order[k]) * v[order[k]];
            }
            const double mean = swv / sw;
            if (mean < prev - 1e-12) monotone = false;
            prev = mean;
            for (std::size_t k = bounds[b]; k < bounds[b + 1]; ++k) {
                fit[order[k]] = mean;
                sse += weight(order[k]) * (v[order[k]] - mean) * (v[order[k]] - mean);
            }
        }
        if (monotone && sse < best) {
            best = sse;
            best_fit = fit;
        }
    }
    return best_fit;
}

/// max over matchings valid for z of sum_l score(i_l, j_l), where a pair
/// {a, b} may be used in either order permitted by z.
template <typename Score>
double best_matching_value(std::size_t n, const std::vector<double>& z, Score score) {
    std::vector<bool> used(n, false);
    const auto rec = [&](auto&& self) -> double {
        std::size_t first = 0;
        while (first < n && used[first]) ++first;
        if (first == n) return 0.0;
        used[first] = true;
        double best = self(self);  // leave `first` unmatched
        for (std::size_t other = first + 1; other < n; ++other) {
            if (used[other]) continue;
            double s = -std::numeric_limits<double>::infinity();
            if (z[first] <= z[other]) s = std::max(s, score(first, other));
            if (z[other] <= z[first]) s = std::max(s, score(other, first));
            used[other] = true;
            best = std::max(best, s + self(self));
            used[other] = false;
        }
        used[first] = false;
        return best;
    };
    return rec(rec);
}

/// 2^-L #{s : T(x^s) >= T(x)} evaluated literally through swapped copies.
inline double exact_p_value(const std::vector<double>& xs, const pairswap::Matching& m, const std::vector<double>& w,
                            const pairswap::KernelSpec& k) {
    const auto stat = [&](const std::vector<double>& x) {
        double t = 0.0;
        for (std::size_t l = 0; l < m.size(); ++l) t += w[l] * k(x[m[l].first], x[m[l].second]);
        return t;
    };
    const double t0 = stat(xs);
    const std::size_t L = m.size();
    std::size_t count = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
        auto x = xs;
        for (std::size_t l = 0; l < L; ++l) {
            if ((mask >> l) & 1U) std::swap(x[m[l].first], x[m[l].second]);
        }
        if (stat(x) >= t0 - 1e-12 * std::max(1.0, std::abs(t0))) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(std::uint64_t{1} << L);
}

/// Deviance of the empirical distribution of a sample by averaging the
/// squared quantile gap over a midpoint grid that refines every atom.
inline double deviance_by_grid(std::vector<double> sample, std::size_t per_atom = 64) {
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    const std::size_t cells = n * per_atom * 2;
    const auto quantile = [&](double q) {
        // inf{t : F(t) >= q} for the empirical CDF
        auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-12));
        k = std::clamp<std::size_t>(k, 1, n);
        return sample[k - 1];
    };
    double total = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        const double q = (static_cast<double>(c) + 0.5) / static_cast<double>(cells);
        const double gap = quantile(1.0 - q) - quantile(q);
        total += gap * gap;
    }
    return total / static_cast<double>(cells);
}

inline double population_variance(const std::vector<double>& s) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(s.size());
}

inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Upper 10% point of the standard normal.
inline constexpr double kUpper10 = 1.2815515655446004;

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline std::vector<double> sorted_uniform(std::mt19937_64& rng, std::size_t n) {
    auto z = uniform_vector(rng, n, 0.0, 1.0);
    std::sort(z.begin(), z.end());
    return z;
}

inline pairswap::Matching consecutive_pairs(std::size_t L) {
    std::vector<pairswap::IndexPair> p;
    for (std::size_t l = 0; l < L; ++l) p.push_back({2 * l, 2 * l + 1});
    return pairswap::Matching(std::move(p));
}

}  // namespace oracle
