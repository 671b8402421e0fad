#pragma once

// Shared data model: datasets, matchings, weights, swap vectors and test
// results. Every type validates its invariants on construction and is
// immutable afterwards.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pairswap {

/// Aligned samples (X_i, Y_i, Z_i), i = 1..n. All entries finite, n >= 1.
class Dataset {
public:
    Dataset(std::vector<double> x, std::vector<double> y, std::vector<double> z);

    std::size_t size() const noexcept { return x_.size(); }
    std::span<const double> x() const noexcept { return x_; }
    std::span<const double> y() const noexcept { return y_; }
    std::span<const double> z() const noexcept { return z_; }

    /// Same (Y, Z) with a replacement response column.
    Dataset with_x(std::vector<double> x) const;
    /// Rows selected by 0-based index, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> z_;
};

/// An ordered pair (first, second) of 0-based row indices. For a valid
/// matching Z[first] <= Z[second].
struct IndexPair {
    std::size_t first;
    std::size_t second;

    friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// Disjoint ordered index pairs. Distinctness of all 2L indices is checked
/// here; bounds and the Z ordering depend on a dataset and are checked by
/// validate_matching().
class Matching {
public:
    Matching() = default;
    explicit Matching(std::vector<IndexPair> pairs);

    /// Builds from 1-based pairs as they appear in files and documentation.
    static Matching from_one_based(std::span<const std::pair<std::size_t, std::size_t>> pairs);

    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::span<const IndexPair> pairs() const noexcept { return pairs_; }
    const IndexPair& operator[](std::size_t l) const { return pairs_[l]; }

    friend bool operator==(const Matching&, const Matching&) = default;

private:
    std::vector<IndexPair> pairs_;
};

/// Non-negative finite per-pair weights.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::vector<double> w);

    std::size_t size() const noexcept { return w_.size(); }
    std::span<const double> values() const noexcept { return w_; }
    double operator[](std::size_t l) const { return w_[l]; }

    WeightVector scaled(double c) const;

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<double> w_;
};

/// s in {+1, -1}^L; s_l = -1 exchanges the two entries of pair l.
class SwapVector {
public:
    explicit SwapVector(std::vector<int> s);
    static SwapVector identity(std::size_t length);
    /// Bit l of mask set means s_l = -1. Requires length <= 64.
    static SwapVector from_mask(std::uint64_t mask, std::size_t length);

    std::size_t size() const noexcept { return s_.size(); }
    int operator[](std::size_t l) const { return s_[l]; }
    std::span<const int> values() const noexcept { return s_; }

private:
    std::vector<int> s_;
};

enum class PValueMethod { exact, monte_carlo };

std::string to_string(PValueMethod method);
PValueMethod parse_method(const std::string& text);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    PValueMethod method = PValueMethod::exact;
    std::size_t num_pairs = 0;
    std::optional<std::size_t> num_draws;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> warnings;

    /// Throws std::logic_error if p_value violates the [0,1] or
    /// 1/(1+M) floor invariant.
    void check_invariants() const;
};

/// True iff all 2L indices are distinct and Z[first] <= Z[second] for every
/// pair. Throws std::out_of_range when an index lies outside the dataset.
bool validate_matching(const Dataset& d, const Matching& m);
bool validate_matching(std::span<const double> z, const Matching& m);

/// Coordinate-wise partial order check for vector-valued Z: every
/// coordinate of z_points[first] must be <= the same coordinate of
/// z_points[second]. Rows must share a dimension.
bool validate_matching(std::span<const std::vector<double>> z_points, const Matching& m);

/// Copy of xs with the entries of every pair l having s_l = -1 exchanged.
std::vector<double> apply_swap(std::span<const double> xs, const Matching& m, const SwapVector& s);

}  // namespace pairswap
