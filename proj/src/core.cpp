#include "pairswap/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace pairswap {

namespace {

void require_finite(std::span<const double> v, const char* column) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw std::invalid_argument(std::string("non-finite value in column ") + column +
                                        " at row " + std::to_string(i + 1));
        }
    }
}

void check_bounds(const Matching& m, std::size_t n) {
    for (const auto& p : m.pairs()) {
        if (p.first >= n || p.second >= n) {
            throw std::out_of_range("matching index " + std::to_string(std::max(p.first, p.second) + 1) +
                                    " outside [1, " + std::to_string(n) + "]");
        }
    }
}

bool indices_distinct(const Matching& m, std::size_t n) {
    std::vector<char> seen(n, 0);
    for (const auto& p : m.pairs()) {
        if (p.first == p.second || seen[p.first] || seen[p.second]) return false;
        seen[p.first] = seen[p.second] = 1;
    }
    return true;
}

}  // namespace

Dataset::Dataset(std::vector<double> x, std::vector<double> y, std::vector<double> z)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {
    if (x_.empty()) throw std::invalid_argument("dataset must contain at least one row");
    if (y_.size() != x_.size() || z_.size() != x_.size()) {
        throw std::invalid_argument("dataset columns differ in length");
    }
    require_finite(x_, "x");
    require_finite(y_, "y");
    require_finite(z_, "z");
}

Dataset Dataset::with_x(std::vector<double> x) const { return Dataset(std::move(x), y_, z_); }

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<double> x, y, z;
    x.reserve(rows.size());
    y.reserve(rows.size());
    z.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= size()) throw std::out_of_range("subset row outside dataset");
        x.push_back(x_[r]);
        y.push_back(y_[r]);
        z.push_back(z_[r]);
    }
    return Dataset(std::move(x), std::move(y), std::move(z));
}

Matching::Matching(std::vector<IndexPair> pairs) : pairs_(std::move(pairs)) {
    std::unordered_set<std::size_t> seen;
    seen.reserve(2 * pairs_.size());
    for (const auto& p : pairs_) {
        if (p.first == p.second || !seen.insert(p.first).second || !seen.insert(p.second).second) {
            throw std::invalid_argument("matching indices must be distinct");
        }
    }
}

Matching Matching::from_one_based(std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    std::vector<IndexPair> out;
    out.reserve(pairs.size());
    for (auto [i, j] : pairs) {
        if (i == 0 || j == 0) throw std::out_of_range("1-based index must be >= 1");
        out.push_back({i - 1, j - 1});
    }
    return Matching(std::move(out));
}

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
    for (double v : w_) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
    }
}

WeightVector WeightVector::scaled(double c) const {
    if (!(c > 0.0)) throw std::invalid_argument("weight scale must be positive");
    std::vector<double> out(w_);
    for (double& v : out) v *= c;
    return WeightVector(std::move(out));
}

SwapVector::SwapVector(std::vector<int> s) : s_(std::move(s)) {
    for (int v : s_) {
        if (v != 1 && v != -1) throw std::invalid_argument("swap entries must be +1 or -1");
    }
}

SwapVector SwapVector::identity(std::size_t length) { return SwapVector(std::vector<int>(length, 1)); }

SwapVector SwapVector::from_mask(std::uint64_t mask, std::size_t length) {
    if (length > 64) throw std::invalid_argument("mask swap vectors are limited to 64 pairs");
    std::vector<int> s(length, 1);
    for (std::size_t l = 0; l < length; ++l) {
        if ((mask >> l) & 1U) s[l] = -1;
    }
    return SwapVector(std::move(s));
}

std::string to_string(PValueMethod method) {
    return method == PValueMethod::exact ? "exact" : "monte_carlo";
}

PValueMethod parse_method(const std::string& text) {
    if (text == "exact") return PValueMethod::exact;
    if (text == "mc" || text == "monte_carlo") return PValueMethod::monte_carlo;
    throw std::invalid_argument("unknown p-value method '" + text + "' (expected exact or mc)");
}

void TestResult::check_invariants() const {
    if (!(p_value >= 0.0 && p_value <= 1.0)) throw std::logic_error("p-value outside [0,1]");
    if (method == PValueMethod::monte_carlo) {
        if (!num_draws) throw std::logic_error("monte carlo result without draw count");
        if (p_value * (1.0 + static_cast<double>(*num_draws)) < 1.0 - 1e-12) {
            throw std::logic_error("monte carlo p-value below 1/(1+M)");
        }
    }
}

bool validate_matching(const Dataset& d, const Matching& m) { return validate_matching(d.z(), m); }

bool validate_matching(std::span<const double> z, const Matching& m) {
    check_bounds(m, z.size());
    if (!indices_distinct(m, z.size())) return false;
    return std::all_of(m.pairs().begin(), m.pairs().end(),
                       [&](const IndexPair& p) { return z[p.first] <= z[p.second]; });
}

bool validate_matching(std::span<const std::vector<double>> z_points, const Matching& m) {
    check_bounds(m, z_points.size());
    if (!z_points.empty()) {
        const auto dim = z_points.front().size();
        for (const auto& row : z_points) {
            if (row.size() != dim) throw std::invalid_argument("Z rows differ in dimension");
        }
    }
    if (!indices_distinct(m, z_points.size())) return false;
    for (const auto& p : m.pairs()) {
        const auto& a = z_points[p.first];
        const auto& b = z_points[p.second];
        for (std::size_t c = 0; c < a.size(); ++c) {
            if (!(a[c] <= b[c])) return false;
        }
    }
    return true;
}

std::vector<double> apply_swap(std::span<const double> xs, const Matching& m, const SwapVector& s) {
    if (s.size() != m.size()) throw std::invalid_argument("swap vector length differs from matching size");
    std::vector<double> out(xs.begin(), xs.end());
    check_bounds(m, out.size());
    for (std::size_t l = 0; l < m.size(); ++l) {
        if (s[l] == -1) std::swap(out[m[l].first], out[m[l].second]);
    }
    return out;
}

}  // namespace pairswap
