#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "pairswap/commands.hpp"

using namespace pairswap;

namespace {

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void add_schema(CLI::App* cmd, io::CsvSchema& schema, bool& no_header, std::string& delimiter) {
    cmd->add_option("--x-col", schema.x_col, "Column holding X")->capture_default_str();
    cmd->add_option("--y-col", schema.y_col, "Column holding Y")->capture_default_str();
    cmd->add_option("--z-col", schema.z_col, "Column holding Z")->capture_default_str();
    cmd->add_option("--delimiter", delimiter, "Field separator (one character)")->capture_default_str();
    cmd->add_flag("--no-header", no_header, "Input has no header; columns are given as 1-based numbers");
}

void add_test_flags(CLI::App* cmd, cli::TestFlags& f) {
    cmd->add_option("--kernel", f.kernel, "linear | sign | trunc:<K>")->capture_default_str();
    cmd->add_option("--matching", f.matching, "neighbour | crossbin:<K> | crossbin:pow:<e> | plugin")
        ->capture_default_str();
    cmd->add_option("--method", f.method, "exact | mc")->capture_default_str();
    cmd->add_option("--draws", f.draws, "Monte Carlo draws M")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed (default from PAIRSWAP_SEED)");
    cmd->add_option("--alpha", f.alpha, "Reporting level")->capture_default_str();
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

char delimiter_char(const std::string& d) {
    if (d == "\\t" || d == "tab") return '\t';
    if (d.size() != 1) throw io::UsageError("--delimiter must be a single character");
    return d.front();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PairSwap-ICI: swap tests of conditional independence under stochastic monotonicity"};
    app.require_subcommand(1);
    app.set_version_flag("--version", io::kToolVersion);

    cli::TestOptions test_opts;
    std::string test_delim = ",";
    bool test_no_header = false;
    double train_fraction = 0.0;
    std::string train_file;
    auto* test = app.add_subcommand("test", "Run the test on a CSV file");
    test->add_option("file", test_opts.file, "Input CSV")->required();
    add_schema(test, test_opts.schema, test_no_header, test_delim);
    add_test_flags(test, test_opts.flags);
    auto* train_file_opt = test->add_option("--train-file", train_file, "Held-out CSV for plug-in matching");
    auto* train_frac_opt =
        test->add_option("--train-fraction", train_fraction, "Fraction of rows held out to fit plug-in matching");
    train_file_opt->excludes(train_frac_opt);
    test->add_option("--out", test_opts.out, "Write the run record as JSON");

    cli::SimulateOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Run simulation sweeps from a config file");
    simulate->add_option("config", sim_opts.config, "Sweep config")->required();
    simulate->add_option("--out-dir", sim_opts.out_dir, "Directory for cells.csv and records.json")->required();
    simulate->add_option("--seed", sim_opts.seed, "Master seed (overrides the config)");
    simulate->add_option("--threads", sim_opts.threads, "Worker threads (0 = all cores)");

    cli::SubsampleOptions sub_opts;
    std::string sub_delim = ",";
    bool sub_no_header = false;
    auto* subsample = app.add_subcommand("subsample", "Repeat the test on random half-size subsamples");
    subsample->add_option("file", sub_opts.file, "Input CSV")->required();
    add_schema(subsample, sub_opts.schema, sub_no_header, sub_delim);
    add_test_flags(subsample, sub_opts.flags);
    subsample->add_option("--repeats", sub_opts.repeats, "Number of subsamples")->capture_default_str();
    subsample->add_flag("--synthetic-control", sub_opts.synthetic_control,
                        "Replace binary X by a monotone synthetic control fitted on the complement");
    subsample->add_option("--out", sub_opts.out, "Write the run record as JSON");

    cli::IsnrOptions isnr_opts;
    std::string isnr_delim = ",";
    bool isnr_no_header = false;
    auto* isnr = app.add_subcommand("isnr", "Empirical isotonic signal-to-noise ratio of a mean column");
    isnr->add_option("file", isnr_opts.file, "Input CSV")->required();
    isnr->add_option("--mu-col", isnr_opts.mu_col, "Column of means")->capture_default_str();
    isnr->add_option("--z-col", isnr_opts.z_col, "Column of Z")->capture_default_str();
    isnr->add_option("--sigma", isnr_opts.sigma, "Noise level")->capture_default_str();
    isnr->add_option("--delimiter", isnr_delim, "Field separator")->capture_default_str();
    isnr->add_flag("--no-header", isnr_no_header, "Input has no header");
    isnr->add_option("--out", isnr_opts.out, "Write the run record as JSON");

    cli::CheckOptions check_opts;
    std::string data_file, pairs_file;
    auto* check = app.add_subcommand("check", "Run the property checks, or validate a matching file");
    check->add_option("--trials", check_opts.trials, "Random instances per property")->capture_default_str();
    check->add_option("--seed", check_opts.seed, "Random seed (default from PAIRSWAP_SEED)");
    auto* data_opt = check->add_option("--data", data_file, "Dataset whose Z column the matching refers to");
    auto* pairs_opt = check->add_option("--pairs", pairs_file, "CSV with 1-based columns i, j");
    data_opt->needs(pairs_opt);
    pairs_opt->needs(data_opt);
    check->add_option("--z-col", check_opts.schema.z_col, "Column holding Z")->capture_default_str();

    try {
        const std::uint64_t seed = cli::default_seed();
        test_opts.flags.seed = seed;
        sub_opts.flags.seed = seed;
        check_opts.seed = seed;
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const io::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    const std::string command = join_args(argc, argv);
    try {
        if (*test) {
            test_opts.command = command;
            test_opts.schema.delimiter = delimiter_char(test_delim);
            test_opts.schema.has_header = !test_no_header;
            if (*train_file_opt) test_opts.flags.train_file = train_file;
            if (*train_frac_opt) test_opts.flags.train_fraction = train_fraction;
            cli::cmd_test(test_opts, std::cout);
        } else if (*simulate) {
            sim_opts.command = command;
            cli::cmd_simulate(sim_opts, std::cout);
        } else if (*subsample) {
            sub_opts.command = command;
            sub_opts.schema.delimiter = delimiter_char(sub_delim);
            sub_opts.schema.has_header = !sub_no_header;
            cli::cmd_subsample_study(sub_opts, std::cout);
        } else if (*isnr) {
            isnr_opts.command = command;
            isnr_opts.delimiter = delimiter_char(isnr_delim);
            isnr_opts.has_header = !isnr_no_header;
            cli::cmd_isnr(isnr_opts, std::cout);
        } else if (*check) {
            if (*data_opt) {
                check_opts.data_file = data_file;
                check_opts.pairs_file = pairs_file;
            }
            return cli::cmd_check(check_opts, std::cout);
        }
    } catch (const io::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
