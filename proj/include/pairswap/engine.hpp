#pragma once

// The swap test: statistic, exact and Monte Carlo p-values, the end-to-end
// runner and the Gaussian power approximation.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pairswap/core.hpp"
#include "pairswap/kernels.hpp"
#include "pairswap/matching.hpp"

namespace pairswap {

/// Exact enumeration visits 2^L swap vectors.
inline constexpr std::size_t kMaxExactPairs = 20;
inline constexpr std::size_t kDefaultDraws = 9999;

struct TestConfig {
    KernelSpec kernel = KernelSpec::linear();
    PValueMethod method = PValueMethod::monte_carlo;
    std::size_t draws = kDefaultDraws;
    std::uint64_t seed = 0;
    /// Reporting threshold only; the p-value does not depend on it.
    double alpha = 0.05;
};

struct NeighbourStrategy {};
struct CrossBinStrategy {
    CrossBinConfig bins;
};
struct PlugInStrategy {
    std::shared_ptr<const PlugInModel> model;
};
using MatchingStrategy = std::variant<NeighbourStrategy, CrossBinStrategy, PlugInStrategy>;

/// "neighbour" or "crossbin:<K>" / "crossbin:pow:<e>". Plug-in strategies
/// carry a fitted model and are built directly.
MatchingStrategy parse_strategy(const std::string& text);
std::string describe(const MatchingStrategy& strategy);

WeightedMatching build_matching(const Dataset& d, const MatchingStrategy& strategy);

/// T(x) = sum_l w_l psi(x_{i_l}, x_{j_l}); zero for an empty matching.
double statistic(std::span<const double> xs, const Matching& m, const WeightVector& w, const KernelSpec& k);

/// 2^-L * #{s : T(x^s) >= T(x)}. Throws std::invalid_argument for L > 20.
TestResult exact_p_value(std::span<const double> xs, const Matching& m, const WeightVector& w,
                         const KernelSpec& k);

/// (1 + #{m : T(x^{s_m}) >= T(x)}) / (1 + M), with s_m drawn from a stream
/// derived from (seed, m).
TestResult monte_carlo_p_value(std::span<const double> xs, const Matching& m, const WeightVector& w,
                               const KernelSpec& k, std::size_t draws, std::uint64_t seed);

/// Builds the matching and weights, then computes the configured p-value.
/// An empty matching yields p = 1 and a warning.
TestResult run_test(const Dataset& d, const TestConfig& cfg, const MatchingStrategy& strategy);

/// Phi( sum w_l m_l / sqrt(sum w_l^2 v_l) - isf(alpha) ).
double theoretical_power(std::span<const double> means, std::span<const double> variances,
                         const WeightVector& w, double alpha);

/// Normal approximation 1 - Phi(T / sqrt(sum_l (w_l psi_l)^2)) to the
/// exact p-value; 1 when every term is zero.
double normal_approx_p_value(std::span<const double> xs, const Matching& m, const WeightVector& w,
                             const KernelSpec& k);

/// A linear statistic sum_i beta_i x_i is a valid swap statistic iff
/// beta_first >= beta_second on every pair.
bool satisfies_linear_condition(std::span<const double> beta, const Matching& m);

/// Exact p-value of the linear statistic sum_i beta_i x_i.
TestResult linear_statistic_p_value(std::span<const double> xs, const Matching& m, std::span<const double> beta);

}  // namespace pairswap
