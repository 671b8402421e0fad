#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pairswap/core.hpp"
#include "pairswap/isotonic.hpp"
#include "pairswap/kernels.hpp"

namespace pairswap {

struct WeightedMatching {
    Matching matching;
    WeightVector weights;
};

/// Estimates of E[psi(X_i, X_j) | Y, Z] and Var[psi(X_i, X_j) | Y, Z] for
/// 0-based row indices of the dataset being tested.
struct MomentEstimates {
    std::function<double(std::size_t, std::size_t)> mean;
    std::function<double(std::size_t, std::size_t)> variance;
};

/// Bin count for cross-bin matching: either fixed, or floor(n^exponent).
class CrossBinConfig {
public:
    static CrossBinConfig fixed(std::size_t bins);
    static CrossBinConfig power_rule(double exponent);
    /// "crossbin:<K>" or "crossbin:pow:<e>" (the "crossbin:" prefix is optional).
    static CrossBinConfig parse(const std::string& text);

    /// Number of bins K for sample size n. Throws if K < 2 or K > n.
    std::size_t bins_for(std::size_t n) const;
    /// Bin size m = floor(n / K).
    std::size_t bin_size_for(std::size_t n) const { return n / bins_for(n); }

    bool is_power_rule() const noexcept { return exponent_ > 0.0; }
    std::string describe() const;

private:
    std::size_t fixed_ = 0;
    double exponent_ = 0.0;
};

/// Nearest neighbours in the Z order: pair (pi(2m-1), pi(2m)) is kept when
/// its Y values are strictly decreasing; w = Y_first - Y_second.
WeightedMatching neighbour_matching(const Dataset& d);

/// Adjacent-bin matching of high-Y points in bin k with low-Y points in
/// bin k+1; w = Y_first - Y_second. Points past K*m in Z order are unused.
WeightedMatching cross_bin_matching(const Dataset& d, const CrossBinConfig& cfg);

/// max{E, 0} / V. Throws std::invalid_argument unless V > 0.
double oracle_weights(double mean, double variance);

/// Exact maximum of sum W_ij^2 over valid matchings with
/// W_ij = max{E_ij, 0} / V_ij, solved as a weighted general-graph matching.
/// Each edge is oriented so the lower-Z row comes first; on Z ties the
/// orientation with the larger score is used. Returned weights are W_ij.
WeightedMatching max_weight_matching(const Dataset& d, const MomentEstimates& moments);

/// Plug-in model X ~ a * Y + g(Z) with g nondecreasing, fitted by joint
/// least squares: the slope solves the profile score equation, with g the
/// PAVA fit of X - a * Y. iterations() counts PAVA evaluations.
class PlugInModel {
public:
    double slope() const noexcept { return slope_; }
    double residual_variance() const noexcept { return sigma2_; }
    std::size_t iterations() const noexcept { return iterations_; }
    double mean_at(double y, double z) const { return slope_ * y + g_(z); }

    /// E_ij = mu(Y_i, Z_i) - mu(Y_j, Z_j) and V_ij = 2 sigma^2 on the rows
    /// of target.
    MomentEstimates moments_for(const Dataset& target) const;

    friend PlugInModel fit_plugin_model(const Dataset& train, const KernelSpec& kernel);

private:
    double slope_ = 0.0;
    double sigma2_ = 0.0;
    std::size_t iterations_ = 0;
    IsotonicStepFunction g_;
};

/// Requires a linear kernel and n >= 3; throws on a constant Y column.
PlugInModel fit_plugin_model(const Dataset& train, const KernelSpec& kernel);

/// Moments fitted on train and evaluated on train's own rows.
MomentEstimates fit_plugin_moments(const Dataset& train, const KernelSpec& kernel);

/// Pairs above-median with below-median indices, in rank order, inside each
/// constant block of the L1 median projection of u. Requires z sorted.
/// Ties in u are broken by an index-scaled perturbation first.
Matching isotonic_median_matching(std::span<const double> u, std::span<const double> z);

struct BruteForceResult {
    Matching matching;
    double value = 0.0;
};

/// Exhaustive maximum of sum (max{mu_i - mu_j, 0})^2 over all valid
/// matchings. n <= 12.
BruteForceResult brute_force_best_matching(std::span<const double> mu, std::span<const double> z);

/// Sum over pairs of (max{mu_first - mu_second, 0})^2.
double matching_score(std::span<const double> mu, const Matching& m);

}  // namespace pairswap
