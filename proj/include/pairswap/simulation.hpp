#pragma once

// Data generators for the null and alternative models, and seeded
// experiment drivers that estimate rejection rates over many trials.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pairswap/core.hpp"
#include "pairswap/engine.hpp"

namespace pairswap {

/// Draws per Monte Carlo p-value inside experiments.
inline constexpr std::size_t kExperimentDraws = 511;

enum class MuShape { identity, gauss_cdf };
std::string to_string(MuShape shape);
MuShape parse_mu_shape(const std::string& text);

enum class ModelKind { null_additive, partial_linear, bounded_partial_linear };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// null_additive:          Y, Z ~ N(0,1) independent, X = mu(gamma Z) + e.
/// partial_linear:         (Y, Z) standard bivariate normal with corr rho,
///                         X = beta Y + gamma Z + e.
/// bounded_partial_linear: Y ~ U[-1,1], Z ~ N(0,1) independent,
///                         X = Z + beta Y + sigma e.
/// e ~ N(0,1) throughout.
struct ModelSpec {
    ModelKind kind = ModelKind::null_additive;
    std::size_t n = 0;
    MuShape mu = MuShape::identity;
    double gamma = 0.0;
    double beta = 0.0;
    double rho = 0.0;
    double sigma = 1.0;

    static ModelSpec null_additive(std::size_t n, MuShape mu, double gamma);
    static ModelSpec partial_linear(std::size_t n, double beta, double gamma, double rho);
    static ModelSpec bounded_partial_linear(std::size_t n, double beta, double sigma);

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;
    /// True when the model satisfies conditional independence with a mean
    /// nondecreasing in Z.
    bool is_null() const;
    std::string describe() const;
};

/// beta_n = scale * n^exponent, e.g. n^{-1/3} or 1.5 / sqrt(n).
double beta_for(std::size_t n, double scale, double exponent);

/// Deterministic given (spec, seed).
Dataset generate(const ModelSpec& spec, std::uint64_t seed);

struct ExperimentTest {
    TestConfig config;
    MatchingStrategy strategy;
};

struct ExperimentReport {
    double rejection_rate = 0.0;
    std::size_t rejections = 0;
    std::size_t trials = 0;
    double alpha = 0.0;
    double std_err = 0.0;
    std::string model;
    std::string test;
    std::uint64_t master_seed = 0;
    std::vector<double> p_values;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 picks the
/// hardware concurrency). The first exception thrown is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// One p-value per trial. Trial t generates data from derive_seed(master, t)
/// and draws its swaps from a stream derived from that seed, so results do
/// not depend on scheduling.
std::vector<double> trial_p_values(const ModelSpec& spec, const ExperimentTest& test, std::size_t trials,
                                   std::uint64_t master_seed, std::size_t threads = 0);

/// Rejection rate at alpha (p <= alpha) and its binomial standard error.
ExperimentReport summarize(std::vector<double> p_values, double alpha);

/// Throws std::invalid_argument unless spec.is_null().
ExperimentReport type1_experiment(const ModelSpec& spec, const ExperimentTest& test, std::size_t trials,
                                  std::uint64_t master_seed, std::size_t threads = 0);
ExperimentReport power_experiment(const ModelSpec& spec, const ExperimentTest& test, std::size_t trials,
                                  std::uint64_t master_seed, std::size_t threads = 0);

}  // namespace pairswap
