#include "pairswap/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pairswap {

namespace {
constexpr double kAntiMonotoneTol = 1e-12;
}

KernelSpec KernelSpec::linear() { return KernelSpec(KernelKind::linear, 0.0, {}, "linear"); }

KernelSpec KernelSpec::sign() { return KernelSpec(KernelKind::sign, 0.0, {}, "sign"); }

KernelSpec KernelSpec::truncated(double bound) {
    if (!(bound > 0.0) || !std::isfinite(bound)) {
        throw std::invalid_argument("truncation constant K must be positive and finite");
    }
    return KernelSpec(KernelKind::truncated, bound, {}, "trunc");
}

KernelSpec KernelSpec::custom(Function fn, std::string name, std::uint64_t check_seed,
                              std::size_t check_trials) {
    if (!fn) throw std::invalid_argument("custom kernel requires a callable");
    KernelSpec k(KernelKind::custom, 0.0, std::move(fn), std::move(name));
    std::mt19937_64 rng(check_seed);
    std::uniform_real_distribution<double> point(-10.0, 10.0);
    std::uniform_real_distribution<double> shift(0.0, 10.0);
    for (std::size_t t = 0; t < check_trials; ++t) {
        const double x = point(rng), xp = point(rng), d = shift(rng), dp = shift(rng);
        if (!check_anti_monotonicity(k, x, xp, d, dp)) {
            throw std::invalid_argument("custom kernel '" + k.name_ + "' violates anti-monotonicity at (" +
                                        std::to_string(x) + ", " + std::to_string(xp) + ")");
        }
    }
    return k;
}

KernelSpec KernelSpec::parse(const std::string& text) {
    if (text == "linear") return linear();
    if (text == "sign") return sign();
    if (text.rfind("trunc:", 0) == 0) {
        const std::string rest = text.substr(6);
        double bound = 0.0;
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), bound);
        if (ec != std::errc() || ptr != rest.data() + rest.size()) {
            throw std::invalid_argument("bad truncation constant in kernel '" + text + "'");
        }
        return truncated(bound);
    }
    throw std::invalid_argument("unknown kernel '" + text + "' (expected linear, sign or trunc:<K>)");
}

std::string KernelSpec::name() const {
    if (kind_ == KernelKind::truncated) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, bound_);
        return "trunc:" + std::string(buf, ptr);
    }
    return name_;
}

double KernelSpec::operator()(double x, double x_prime) const {
    const double diff = x - x_prime;
    switch (kind_) {
        case KernelKind::linear:
            return diff;
        case KernelKind::sign:
            return diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        case KernelKind::truncated:
            return std::clamp(diff, -bound_, bound_);
        case KernelKind::custom:
            return fn_(x, x_prime);
    }
    return 0.0;
}

double eval_kernel(const KernelSpec& k, double x, double x_prime) {
    if (!std::isfinite(x) || !std::isfinite(x_prime)) throw std::invalid_argument("kernel inputs must be finite");
    return k(x, x_prime);
}

bool check_anti_monotonicity(const KernelSpec& k, double x, double x_prime, double delta,
                             double delta_prime) {
    if (delta < 0.0 || delta_prime < 0.0) throw std::invalid_argument("shifts must be non-negative");
    const double moved_x = x + delta;
    const double moved_xp = x_prime - delta_prime;
    const double lhs = k(moved_x, moved_xp) - k(moved_xp, moved_x);
    const double rhs = k(x, x_prime) - k(x_prime, x);
    return lhs >= rhs - kAntiMonotoneTol;
}

}  // namespace pairswap
