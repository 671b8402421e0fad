#include "pairswap/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include "pairswap/isotonic.hpp"
#include "pairswap/rng.hpp"

namespace pairswap::cli {

namespace {

constexpr std::uint64_t kSplitStream = 0x5b1170;

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

Split random_split(std::size_t n, std::size_t train_size, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_size));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_size), perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

MatchingStrategy plugin_strategy(const Dataset& train, const TestConfig& cfg) {
    return PlugInStrategy{std::make_shared<const PlugInModel>(fit_plugin_model(train, cfg.kernel))};
}

void print_result(std::ostream& out, const std::string& matching, const TestConfig& cfg, std::size_t n,
                  const TestResult& r) {
    out << "rows: " << n << "  matching: " << matching << "  kernel: " << cfg.kernel.name() << '\n';
    out << "pairs (L): " << r.num_pairs << '\n';
    out << "statistic T: " << io::format_double(r.statistic) << '\n';
    out << "p-value: " << io::format_double(r.p_value) << " (" << to_string(r.method);
    if (r.num_draws) out << ", M = " << *r.num_draws;
    if (r.seed) out << ", seed = " << *r.seed;
    out << ")\n";
    out << "at alpha = " << io::format_double(cfg.alpha) << ": "
        << (r.p_value <= cfg.alpha ? "reject" : "do not reject") << " conditional independence\n";
    for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

}  // namespace

std::uint64_t default_seed() {
    const char* env = std::getenv(kSeedEnvVar);
    if (env == nullptr || *env == '\0') return kFallbackSeed;
    std::uint64_t seed = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw io::UsageError(std::string(kSeedEnvVar) + " must be an unsigned 64-bit integer, got '" + env + "'");
    }
    return seed;
}

TestConfig make_test_config(const TestFlags& flags) {
    if (!(flags.alpha > 0.0 && flags.alpha < 1.0)) throw io::UsageError("--alpha must lie in (0, 1)");
    if (flags.draws < 1) throw io::UsageError("--draws must be at least 1");
    TestConfig cfg;
    cfg.kernel = KernelSpec::parse(flags.kernel);
    cfg.method = parse_method(flags.method);
    cfg.draws = flags.draws;
    cfg.seed = flags.seed;
    cfg.alpha = flags.alpha;
    return cfg;
}

io::RunRecord cmd_test(const TestOptions& opts, std::ostream& out) {
    const TestConfig cfg = make_test_config(opts.flags);
    Dataset data = io::read_dataset_file(opts.file, opts.schema);
    nlohmann::json params = {{"file", opts.file}, {"matching", opts.flags.matching}, {"kernel", cfg.kernel.name()},
                             {"alpha", cfg.alpha}};

    MatchingStrategy strategy;
    if (opts.flags.matching == "plugin") {
        if (opts.flags.train_file && opts.flags.train_fraction) {
            throw io::UsageError("give either --train-file or --train-fraction, not both");
        }
        if (opts.flags.train_file) {
            strategy = plugin_strategy(io::read_dataset_file(*opts.flags.train_file, opts.schema), cfg);
            params["train_file"] = *opts.flags.train_file;
        } else if (opts.flags.train_fraction) {
            const double f = *opts.flags.train_fraction;
            if (!(f > 0.0 && f < 1.0)) throw io::UsageError("--train-fraction must lie in (0, 1)");
            const auto train_size = static_cast<std::size_t>(std::llround(f * static_cast<double>(data.size())));
            if (train_size < 3 || data.size() - train_size < 2) {
                throw io::UsageError("--train-fraction leaves fewer than 3 training or 2 test rows");
            }
            const auto split = random_split(data.size(), train_size, derive_seed(cfg.seed, kSplitStream));
            strategy = plugin_strategy(data.subset(split.train), cfg);
            data = data.subset(split.test);
            params["train_fraction"] = f;
            params["train_rows"] = split.train.size();
        } else {
            throw io::UsageError("plug-in matching needs held-out data: pass --train-file or --train-fraction");
        }
    } else {
        strategy = parse_strategy(opts.flags.matching);
    }

    const TestResult result = run_test(data, cfg, strategy);
    result.check_invariants();
    print_result(out, opts.flags.matching, cfg, data.size(), result);

    io::RunRecord record;
    record.timestamp = io::utc_timestamp();
    record.command = opts.command;
    record.seed = result.seed;
    record.result = result;
    record.params = std::move(params);
    if (opts.out) io::write_json_file(*opts.out, io::to_json(record));
    return record;
}

io::RunRecord cmd_subsample_study(const SubsampleOptions& opts, std::ostream& out) {
    if (opts.repeats < 1) throw io::UsageError("--repeats must be at least 1");
    const TestConfig cfg = make_test_config(opts.flags);
    const Dataset data = io::read_dataset_file(opts.file, opts.schema);
    const std::size_t n = data.size();
    if (n < 4) throw io::UsageError("subsample study needs at least 4 rows, got " + std::to_string(n));
    if (opts.synthetic_control) {
        for (double v : data.x()) {
            if (v != 0.0 && v != 1.0) throw io::UsageError("synthetic-control mode needs a binary (0/1) X column");
        }
    }
    const bool plugin = opts.flags.matching == "plugin";
    const MatchingStrategy fixed_strategy = plugin ? MatchingStrategy{} : parse_strategy(opts.flags.matching);
    const std::size_t half = n / 2;

    std::vector<double> p(opts.repeats);
    parallel_for(opts.repeats, opts.flags.threads, [&](std::size_t r) {
        const std::uint64_t repeat_seed = derive_seed(cfg.seed, r);
        const auto split = random_split(n, half, repeat_seed);
        const auto& rows = split.train;
        const Dataset complement = data.subset(split.test);
        Dataset sample = data.subset(rows);
        if (opts.synthetic_control) {
            sample = sample.with_x(
                synthetic_control_from(complement.x(), complement.z(), sample.z(), derive_seed(repeat_seed, 2)));
        }
        TestConfig trial_cfg = cfg;
        trial_cfg.seed = derive_seed(repeat_seed, 1);
        const MatchingStrategy strategy = plugin ? plugin_strategy(complement, cfg) : fixed_strategy;
        p[r] = run_test(sample, trial_cfg, strategy).p_value;
    });

    io::SubsampleReport report;
    report.repeats = opts.repeats;
    report.subsample_size = half;
    report.synthetic_control = opts.synthetic_control;
    const double R = static_cast<double>(opts.repeats);
    report.mean_p_value = std::accumulate(p.begin(), p.end(), 0.0) / R;
    if (opts.repeats > 1) {
        double ss = 0.0;
        for (double v : p) ss += (v - report.mean_p_value) * (v - report.mean_p_value);
        report.std_err = std::sqrt(ss / (R - 1.0) / R);
    }
    report.rate_at_05 = static_cast<double>(std::count_if(p.begin(), p.end(), [](double v) { return v <= 0.05; })) / R;
    report.rate_at_10 = static_cast<double>(std::count_if(p.begin(), p.end(), [](double v) { return v <= 0.1; })) / R;
    report.p_values = p;

    if (opts.repeats == 1) {
        out << "p-value: " << io::format_double(p.front()) << '\n';
    } else {
        out << "subsamples: " << opts.repeats << " of size " << half
            << (opts.synthetic_control ? " (synthetic control fitted on the complement)" : "") << '\n';
        out << "mean p-value: " << io::format_double(report.mean_p_value)
            << "  (standard error " << io::format_double(report.std_err) << ")\n";
        out << "fraction p <= 0.05: " << io::format_double(report.rate_at_05)
            << "  fraction p <= 0.1: " << io::format_double(report.rate_at_10) << '\n';
    }

    io::RunRecord record;
    record.timestamp = io::utc_timestamp();
    record.command = opts.command;
    record.seed = cfg.seed;
    record.result = report;
    record.params = {{"file", opts.file},        {"matching", opts.flags.matching}, {"kernel", cfg.kernel.name()},
                     {"method", opts.flags.method}, {"draws", cfg.draws},           {"repeats", opts.repeats}};
    if (opts.out) io::write_json_file(*opts.out, io::to_json(record));
    return record;
}

io::RunRecord cmd_isnr(const IsnrOptions& opts, std::ostream& out) {
    if (!(opts.sigma > 0.0) || !std::isfinite(opts.sigma)) throw io::UsageError("--sigma must be positive");
    const auto cols = io::read_columns_file(opts.file, {opts.mu_col, opts.z_col}, opts.delimiter, opts.has_header);
    const auto fit = pava_l2(cols[0], cols[1]);

    io::IsnrReport report;
    report.residual_norm = fit.residual_norm;
    report.sigma = opts.sigma;
    report.isnr = fit.residual_norm / opts.sigma;
    report.n = cols[0].size();
    out << "empirical ISNR: " << io::format_double(report.isnr) << "  (distance to monotone fit "
        << io::format_double(report.residual_norm) << ", n = " << report.n << ")\n";

    io::RunRecord record;
    record.timestamp = io::utc_timestamp();
    record.command = opts.command;
    record.result = report;
    record.params = {{"file", opts.file}, {"mu_col", opts.mu_col}, {"z_col", opts.z_col}};
    if (opts.out) io::write_json_file(*opts.out, io::to_json(record));
    return record;
}

std::vector<io::RunRecord> cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
    const SimulationConfig cfg = parse_simulation_config_file(opts.config);
    const std::uint64_t seed = opts.seed ? *opts.seed : cfg.seed ? *cfg.seed : default_seed();
    const std::size_t threads = opts.threads ? *opts.threads : cfg.threads;

    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) throw io::UsageError("cannot create output directory '" + opts.out_dir + "': " + ec.message());

    const auto cells = run_simulation(cfg, seed, threads, &out);
    std::vector<io::RunRecord> records;
    nlohmann::json all = nlohmann::json::array();
    const std::string stamp = io::utc_timestamp();
    for (const auto& cell : cells) {
        io::RunRecord r;
        r.timestamp = stamp;
        r.command = opts.command;
        r.seed = cell.report.master_seed;
        r.result = cell.report;
        r.params = {{"sweep", cell.sweep},
                    {"type", cell.type == SweepType::type1 ? "type1" : "power"},
                    {"model", to_string(cell.model.kind)},
                    {"n", cell.model.n},
                    {"mu", to_string(cell.model.mu)},
                    {"gamma", cell.model.gamma},
                    {"beta", cell.model.beta},
                    {"rho", cell.model.rho},
                    {"sigma", cell.model.sigma},
                    {"matching", cell.matching},
                    {"kernel", cell.kernel},
                    {"draws", cell.draws}};
        all.push_back(io::to_json(r));
        records.push_back(std::move(r));
    }

    const auto dir = std::filesystem::path(opts.out_dir);
    {
        std::ofstream csv(dir / "cells.csv");
        if (!csv) throw io::UsageError("cannot write " + (dir / "cells.csv").string());
        write_cells_csv(csv, cells);
    }
    io::write_json_file((dir / "records.json").string(), all);
    out << "wrote " << cells.size() << " cells to " << (dir / "cells.csv").string() << " and "
        << (dir / "records.json").string() << '\n';
    return records;
}

}  // namespace pairswap::cli
