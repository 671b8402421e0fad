#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pairswap {

struct IsotonicFit {
    /// Fitted values in the input order; nondecreasing along sorted z, equal
    /// on ties in z.
    std::vector<double> fitted;
    /// ||values - fitted||_2
    double residual_norm = 0.0;
};

/// Weighted L2 projection of values onto vectors nondecreasing in z
/// (pool-adjacent-violators). z need not be sorted; exact ties in z are
/// pooled first.
IsotonicFit pava_l2(std::span<const double> values, std::span<const double> z,
                    std::optional<std::span<const double>> weights = std::nullopt);

/// Nondecreasing step function fitted by pava_l2, evaluable at new z.
/// Between knots it takes the level of the largest knot <= z; below the
/// first knot it takes the first level.
class IsotonicStepFunction {
public:
    static IsotonicStepFunction fit(std::span<const double> values, std::span<const double> z);

    double operator()(double z) const;
    std::span<const double> knots() const noexcept { return knots_; }
    std::span<const double> levels() const noexcept { return levels_; }

private:
    std::vector<double> knots_;
    std::vector<double> levels_;
};

/// min_{g nondecreasing} ||mu - g(z)||_2 / sigma.
double empirical_isnr(std::span<const double> mu, std::span<const double> z, double sigma);

/// Median with the midpoint convention for even lengths.
double median_of(std::span<const double> values);

/// u~_i = max_{j: z_j <= z_i} min_{k: z_k >= z_i} Med(u_l : z_j <= z_l <= z_k).
/// Requires z sorted ascending (std::invalid_argument otherwise).
std::vector<double> isotonic_l1_projection(std::span<const double> u, std::span<const double> z);

/// Finite discrete distribution: distinct sorted support points and their
/// probabilities.
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<double> values, std::vector<double> probabilities);
    static DiscreteDistribution from_sample(std::span<const double> sample);

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> probabilities() const noexcept { return probs_; }

    double mean() const;
    double variance() const;
    /// Generalized inverse F^{-1}(q) = inf{t : F(t) >= q}, q in (0, 1].
    double quantile(double q) const;

private:
    std::vector<double> values_;
    std::vector<double> probs_;
};

/// E_{q ~ Unif(0,1)} (F^{-1}(1-q) - F^{-1}(q))^2, integrated exactly over
/// the piecewise-constant quantile function.
double deviance(const DiscreteDistribution& dist);
double deviance(std::span<const double> sample);

/// Fits E[X | Z] by pava_l2 (clipped to [0,1]) on binary x and samples
/// X~_i ~ Bernoulli(fitted_i) from a stream seeded by seed.
std::vector<double> fit_synthetic_control(std::span<const double> x_binary, std::span<const double> z,
                                          std::uint64_t seed);

/// Same, but the conditional mean is fitted on (train_x, train_z) and the
/// draws are made at target_z.
std::vector<double> synthetic_control_from(std::span<const double> train_x, std::span<const double> train_z,
                                           std::span<const double> target_z, std::uint64_t seed);

}  // namespace pairswap
