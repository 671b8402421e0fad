#include "pairswap/simulation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pairswap/rng.hpp"
#include "pairswap/stats.hpp"

namespace pairswap {

std::string to_string(MuShape shape) { return shape == MuShape::identity ? "identity" : "gauss_cdf"; }

MuShape parse_mu_shape(const std::string& text) {
    if (text == "identity") return MuShape::identity;
    if (text == "gauss_cdf" || text == "phi") return MuShape::gauss_cdf;
    throw std::invalid_argument("unknown mean shape '" + text + "' (expected identity or gauss_cdf)");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::null_additive: return "null_additive";
        case ModelKind::partial_linear: return "partial_linear";
        case ModelKind::bounded_partial_linear: return "bounded_partial_linear";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "null_additive") return ModelKind::null_additive;
    if (text == "partial_linear") return ModelKind::partial_linear;
    if (text == "bounded_partial_linear") return ModelKind::bounded_partial_linear;
    throw std::invalid_argument("unknown model '" + text + "'");
}

ModelSpec ModelSpec::null_additive(std::size_t n, MuShape mu, double gamma) {
    ModelSpec s;
    s.kind = ModelKind::null_additive;
    s.n = n;
    s.mu = mu;
    s.gamma = gamma;
    s.validate();
    return s;
}

ModelSpec ModelSpec::partial_linear(std::size_t n, double beta, double gamma, double rho) {
    ModelSpec s;
    s.kind = ModelKind::partial_linear;
    s.n = n;
    s.beta = beta;
    s.gamma = gamma;
    s.rho = rho;
    s.validate();
    return s;
}

ModelSpec ModelSpec::bounded_partial_linear(std::size_t n, double beta, double sigma) {
    ModelSpec s;
    s.kind = ModelKind::bounded_partial_linear;
    s.n = n;
    s.beta = beta;
    s.sigma = sigma;
    s.validate();
    return s;
}

void ModelSpec::validate() const {
    if (n < 1) throw std::invalid_argument("model needs n >= 1");
    if (!std::isfinite(gamma) || !std::isfinite(beta)) throw std::invalid_argument("model parameters must be finite");
    switch (kind) {
        case ModelKind::null_additive:
            if (gamma < 0.0) throw std::invalid_argument("null_additive needs gamma >= 0");
            break;
        case ModelKind::partial_linear:
            if (beta < 0.0) throw std::invalid_argument("partial_linear needs beta >= 0");
            if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("partial_linear needs rho in (-1, 1)");
            break;
        case ModelKind::bounded_partial_linear:
            if (beta < 0.0) throw std::invalid_argument("bounded_partial_linear needs beta >= 0");
            if (!(sigma > 0.0) || !std::isfinite(sigma)) {
                throw std::invalid_argument("bounded_partial_linear needs sigma > 0");
            }
            break;
    }
}

bool ModelSpec::is_null() const {
    switch (kind) {
        case ModelKind::null_additive: return gamma >= 0.0;
        case ModelKind::partial_linear: return beta == 0.0 && gamma >= 0.0;
        case ModelKind::bounded_partial_linear: return beta == 0.0;
    }
    return false;
}

std::string ModelSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind) << "(n=" << n;
    switch (kind) {
        case ModelKind::null_additive: os << ", mu=" << to_string(mu) << ", gamma=" << gamma; break;
        case ModelKind::partial_linear: os << ", beta=" << beta << ", gamma=" << gamma << ", rho=" << rho; break;
        case ModelKind::bounded_partial_linear: os << ", beta=" << beta << ", sigma=" << sigma; break;
    }
    os << ")";
    return os.str();
}

double beta_for(std::size_t n, double scale, double exponent) {
    return scale * std::pow(static_cast<double>(n), exponent);
}

Dataset generate(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const std::size_t n = spec.n;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (spec.kind) {
            case ModelKind::null_additive: {
                y[i] = normal(rng);
                z[i] = normal(rng);
                const double arg = spec.gamma * z[i];
                const double mean = spec.mu == MuShape::identity ? arg : normal_cdf(arg);
                x[i] = mean + normal(rng);
                break;
            }
            case ModelKind::partial_linear: {
                // Cholesky factor of [[1, rho], [rho, 1]].
                const double a = normal(rng);
                const double b = normal(rng);
                y[i] = a;
                z[i] = spec.rho * a + std::sqrt(1.0 - spec.rho * spec.rho) * b;
                x[i] = spec.beta * y[i] + spec.gamma * z[i] + normal(rng);
                break;
            }
            case ModelKind::bounded_partial_linear: {
                y[i] = uniform(rng);
                z[i] = normal(rng);
                x[i] = z[i] + spec.beta * y[i] + spec.sigma * normal(rng);
                break;
            }
        }
    }
    return Dataset(std::move(x), std::move(y), std::move(z));
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<double> trial_p_values(const ModelSpec& spec, const ExperimentTest& test, std::size_t trials,
                                   std::uint64_t master_seed, std::size_t threads) {
    spec.validate();
    std::vector<double> p(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        const std::uint64_t data_seed = derive_seed(master_seed, t);
        TestConfig cfg = test.config;
        cfg.seed = derive_seed(data_seed, 1);
        p[t] = run_test(generate(spec, data_seed), cfg, test.strategy).p_value;
    });
    return p;
}

ExperimentReport summarize(std::vector<double> p_values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    ExperimentReport r;
    r.alpha = alpha;
    r.trials = p_values.size();
    for (double p : p_values) {
        if (p <= alpha) ++r.rejections;
    }
    if (r.trials > 0) {
        r.rejection_rate = static_cast<double>(r.rejections) / static_cast<double>(r.trials);
        r.std_err = std::sqrt(r.rejection_rate * (1.0 - r.rejection_rate) / static_cast<double>(r.trials));
    }
    r.p_values = std::move(p_values);
    return r;
}

ExperimentReport power_experiment(const ModelSpec& spec, const ExperimentTest& test, std::size_t trials,
                                  std::uint64_t master_seed, std::size_t threads) {
    ExperimentReport r = summarize(trial_p_values(spec, test, trials, master_seed, threads), test.config.alpha);
    r.model = spec.describe();
    r.test = describe(test.strategy) + " / " + test.config.kernel.name();
    r.master_seed = master_seed;
    return r;
}

ExperimentReport type1_experiment(const ModelSpec& spec, const ExperimentTest& test, std::size_t trials,
                                  std::uint64_t master_seed, std::size_t threads) {
    if (!spec.is_null()) {
        throw std::invalid_argument("type I error experiment needs a null model, got " + spec.describe());
    }
    return power_experiment(spec, test, trials, master_seed, threads);
}

}  // namespace pairswap
