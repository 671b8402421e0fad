#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "pairswap/commands.hpp"
#include "pairswap/rng.hpp"

namespace pairswap::cli {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

// Accepts decimals and simple fractions such as "2/3" or "-1/3".
double parse_real(const std::string& key, const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const double num = parse_real(key, trim(text.substr(0, slash)));
        const double den = parse_real(key, trim(text.substr(slash + 1)));
        if (den == 0.0) throw io::UsageError(key + ": division by zero in '" + text + "'");
        return num / den;
    }
    double v = 0.0;
    std::string_view s = text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw io::UsageError(key + ": '" + text + "' is not a number");
    }
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw io::UsageError(key + ": '" + text + "' is not a non-negative integer");
    }
    return v;
}

std::vector<double> parse_reals(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(parse_real(key, item));
    if (out.empty()) throw io::UsageError(key + ": empty list");
    return out;
}

const std::set<std::string> kCommonKeys = {"type", "model", "n", "matching", "kernel", "alpha", "trials", "draws"};

std::set<std::string> model_keys(ModelKind kind) {
    switch (kind) {
        case ModelKind::null_additive: return {"mu", "gamma"};
        case ModelKind::partial_linear: return {"beta", "beta_scale", "beta_exponent", "gamma", "rho"};
        case ModelKind::bounded_partial_linear: return {"beta", "beta_scale", "beta_exponent", "sigma"};
    }
    return {};
}

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SweepSpec build_sweep(const std::string& name, const std::map<std::string, std::string>& kv,
                      std::vector<std::string>& unknown) {
    SweepSpec s;
    s.name = name;
    const auto key = [&](const std::string& k) { return name + "." + k; };

    const auto model_it = kv.find("model");
    if (model_it == kv.end()) throw io::UsageError(key("model") + " is required");
    try {
        s.model = parse_model_kind(model_it->second);
    } catch (const std::invalid_argument& e) {
        throw io::UsageError(key("model") + ": " + e.what());
    }
    const auto allowed = model_keys(s.model);
    for (const auto& [k, v] : kv) {
        if (!kCommonKeys.contains(k) && !allowed.contains(k)) unknown.push_back(key(k));
    }
    if (kv.contains("beta") && kv.contains("beta_scale")) {
        throw io::UsageError(name + ": give either beta or beta_scale, not both");
    }

    for (const auto& [k, v] : kv) {
        const std::string full = key(k);
        if (k == "type") {
            if (v == "type1") {
                s.type = SweepType::type1;
            } else if (v == "power") {
                s.type = SweepType::power;
            } else {
                throw io::UsageError(full + ": expected type1 or power, got '" + v + "'");
            }
        } else if (k == "n") {
            s.n.clear();
            for (const auto& item : split_list(v)) {
                const auto n = parse_count(full, item);
                if (n < 2) throw io::UsageError(full + ": sample sizes must be at least 2");
                s.n.push_back(n);
            }
        } else if (k == "mu") {
            s.mu.clear();
            for (const auto& item : split_list(v)) {
                try {
                    s.mu.push_back(parse_mu_shape(item));
                } catch (const std::invalid_argument& e) {
                    throw io::UsageError(full + ": " + e.what());
                }
            }
        } else if (k == "gamma") {
            s.gamma = parse_reals(full, v);
        } else if (k == "beta") {
            s.beta = parse_reals(full, v);
        } else if (k == "beta_scale") {
            s.beta_scale = parse_reals(full, v);
        } else if (k == "beta_exponent") {
            s.beta_exponent = parse_real(full, v);
        } else if (k == "rho") {
            s.rho = parse_reals(full, v);
        } else if (k == "sigma") {
            s.sigma = parse_reals(full, v);
        } else if (k == "matching") {
            s.matching = split_list(v);
        } else if (k == "kernel") {
            s.kernel = v;
        } else if (k == "alpha") {
            s.alpha = parse_reals(full, v);
        } else if (k == "trials") {
            s.trials = parse_count(full, v);
        } else if (k == "draws") {
            s.draws = parse_count(full, v);
        }
    }

    if (s.n.empty()) throw io::UsageError(key("n") + " is required");
    if (s.mu.empty() || s.matching.empty()) throw io::UsageError(name + ": empty mu or matching list");
    if (s.trials < 1) throw io::UsageError(key("trials") + " must be at least 1");
    if (s.draws < 1) throw io::UsageError(key("draws") + " must be at least 1");
    for (double a : s.alpha) {
        if (!(a > 0.0 && a < 1.0)) throw io::UsageError(key("alpha") + " values must lie in (0, 1)");
    }
    try {
        (void)KernelSpec::parse(s.kernel);
        for (const auto& m : s.matching) (void)parse_strategy(m);
    } catch (const std::invalid_argument& e) {
        throw io::UsageError(name + ": " + e.what());
    }
    return s;
}

std::vector<ModelSpec> model_points(const SweepSpec& s) {
    std::vector<ModelSpec> out;
    for (std::size_t n : s.n) {
        const std::vector<double> betas = [&] {
            if (!s.beta_scale) return s.beta;
            std::vector<double> b;
            for (double scale : *s.beta_scale) b.push_back(beta_for(n, scale, s.beta_exponent));
            return b;
        }();
        for (MuShape mu : s.mu) {
            for (double gamma : s.gamma) {
                for (double beta : betas) {
                    for (double rho : s.rho) {
                        for (double sigma : s.sigma) {
                            ModelSpec m;
                            m.kind = s.model;
                            m.n = n;
                            m.mu = mu;
                            m.gamma = gamma;
                            m.beta = beta;
                            m.rho = rho;
                            m.sigma = sigma;
                            out.push_back(m);
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

SimulationConfig parse_simulation_config(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw io::UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string k = trim(content.substr(0, eq));
        const std::string v = trim(content.substr(eq + 1));
        if (k.empty()) throw io::UsageError("config line " + std::to_string(line_no) + ": empty key");
        if (!entries.emplace(k, v).second) {
            throw io::UsageError("config line " + std::to_string(line_no) + ": duplicate key '" + k + "'");
        }
    }

    SimulationConfig cfg;
    std::vector<std::string> names;
    if (const auto it = entries.find("sweeps"); it != entries.end()) names = split_list(it->second);
    std::set<std::string> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second) throw io::UsageError("duplicate sweep name '" + name + "'");
        if (name.find('.') != std::string::npos) throw io::UsageError("sweep name '" + name + "' contains '.'");
    }

    std::vector<std::string> unknown;
    std::map<std::string, std::map<std::string, std::string>> per_sweep;
    for (const auto& [k, v] : entries) {
        if (k == "sweeps") continue;
        if (k == "seed") {
            cfg.seed = parse_count(k, v);
            continue;
        }
        if (k == "threads") {
            cfg.threads = parse_count(k, v);
            continue;
        }
        const auto dot = k.find('.');
        if (dot == std::string::npos || !seen.contains(k.substr(0, dot))) {
            unknown.push_back(k);
            continue;
        }
        per_sweep[k.substr(0, dot)][k.substr(dot + 1)] = v;
    }
    for (const auto& name : names) cfg.sweeps.push_back(build_sweep(name, per_sweep[name], unknown));

    if (!unknown.empty()) {
        std::sort(unknown.begin(), unknown.end());
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw io::UsageError(msg);
    }
    return cfg;
}

SimulationConfig parse_simulation_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io::UsageError("cannot open config '" + path + "'");
    try {
        return parse_simulation_config(in);
    } catch (const io::UsageError& e) {
        throw io::UsageError(path + ": " + e.what());
    }
}

std::vector<SimulationCell> run_simulation(const SimulationConfig& cfg, std::uint64_t seed, std::size_t threads,
                                           std::ostream* progress) {
    std::vector<SimulationCell> cells;
    for (const auto& sweep : cfg.sweeps) {
        const std::uint64_t sweep_seed = derive_seed(seed, name_hash(sweep.name));
        const auto points = model_points(sweep);
        for (std::size_t p = 0; p < points.size(); ++p) {
            const ModelSpec& model = points[p];
            try {
                model.validate();
            } catch (const std::invalid_argument& e) {
                throw io::UsageError(sweep.name + ": " + e.what());
            }
            if (sweep.type == SweepType::type1 && !model.is_null()) {
                throw io::UsageError(sweep.name + ": type1 sweep over a non-null model " + model.describe());
            }
            // Every matching sees the same simulated datasets.
            const std::uint64_t point_seed = derive_seed(sweep_seed, p);
            for (const auto& matching : sweep.matching) {
                ExperimentTest test{TestConfig{}, parse_strategy(matching)};
                test.config.kernel = KernelSpec::parse(sweep.kernel);
                test.config.method = PValueMethod::monte_carlo;
                test.config.draws = sweep.draws;
                test.config.alpha = sweep.alpha.front();
                const auto p_values = trial_p_values(model, test, sweep.trials, point_seed, threads);
                for (double alpha : sweep.alpha) {
                    SimulationCell cell;
                    cell.sweep = sweep.name;
                    cell.type = sweep.type;
                    cell.model = model;
                    cell.matching = matching;
                    cell.kernel = test.config.kernel.name();
                    cell.draws = sweep.draws;
                    cell.report = summarize(p_values, alpha);
                    cell.report.model = model.describe();
                    cell.report.test = matching + " / " + cell.kernel;
                    cell.report.master_seed = point_seed;
                    if (progress) {
                        *progress << sweep.name << "  " << model.describe() << "  " << matching << "  alpha="
                                  << alpha << "  rate=" << cell.report.rejection_rate << " (se " << cell.report.std_err
                                  << ")\n";
                    }
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

void write_cells_csv(std::ostream& out, const std::vector<SimulationCell>& cells) {
    out << "sweep,type,model,n,mu,gamma,beta,rho,sigma,matching,kernel,draws,trials,alpha,rejections,"
           "rejection_rate,std_err,master_seed\n";
    for (const auto& c : cells) {
        const auto& m = c.model;
        const auto& r = c.report;
        out << c.sweep << ',' << (c.type == SweepType::type1 ? "type1" : "power") << ',' << to_string(m.kind) << ','
            << m.n << ',' << to_string(m.mu) << ',' << io::format_double(m.gamma) << ','
            << io::format_double(m.beta) << ',' << io::format_double(m.rho) << ',' << io::format_double(m.sigma)
            << ',' << c.matching << ',' << c.kernel << ',' << c.draws << ',' << r.trials << ','
            << io::format_double(r.alpha) << ',' << r.rejections << ',' << io::format_double(r.rejection_rate)
            << ',' << io::format_double(r.std_err) << ',' << r.master_seed << '\n';
    }
}

}  // namespace pairswap::cli
