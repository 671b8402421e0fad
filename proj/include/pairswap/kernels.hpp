#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace pairswap {

enum class KernelKind { linear, sign, truncated, custom };

/// An anti-monotone pair function psi(x, x').
///
/// Built-ins: linear x - x', sign(x - x') with sign(0) = 0, and the
/// truncation clamp(x - x', -K, K). All three are anti-symmetric.
/// User kernels go through custom(), which spot-checks anti-monotonicity
/// on random inputs and throws std::invalid_argument on a violation.
class KernelSpec {
public:
    using Function = std::function<double(double, double)>;

    static KernelSpec linear();
    static KernelSpec sign();
    static KernelSpec truncated(double bound);
    static KernelSpec custom(Function fn, std::string name, std::uint64_t check_seed = 0x5eed,
                             std::size_t check_trials = 2000);

    /// Parses the CLI form: linear | sign | trunc:<K>.
    static KernelSpec parse(const std::string& text);

    KernelKind kind() const noexcept { return kind_; }
    double bound() const noexcept { return bound_; }
    std::string name() const;

    /// True for the built-in kernels, whose swap terms are exact negations.
    bool anti_symmetric() const noexcept { return kind_ != KernelKind::custom; }

    double operator()(double x, double x_prime) const;

private:
    KernelSpec(KernelKind kind, double bound, Function fn, std::string name)
        : kind_(kind), bound_(bound), fn_(std::move(fn)), name_(std::move(name)) {}

    KernelKind kind_;
    double bound_;
    Function fn_;
    std::string name_;
};

double eval_kernel(const KernelSpec& k, double x, double x_prime);

/// psi(x+d, x'-d') - psi(x'-d', x+d) >= psi(x, x') - psi(x', x) - 1e-12.
/// Requires d, d' >= 0.
bool check_anti_monotonicity(const KernelSpec& k, double x, double x_prime, double delta,
                             double delta_prime);

}  // namespace pairswap
