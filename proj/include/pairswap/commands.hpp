#pragma once

// Subcommands of the pairswap command line, callable in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pairswap/engine.hpp"
#include "pairswap/io.hpp"
#include "pairswap/simulation.hpp"

namespace pairswap::cli {

inline constexpr std::uint64_t kFallbackSeed = 20240521;
inline constexpr const char* kSeedEnvVar = "PAIRSWAP_SEED";

/// PAIRSWAP_SEED if set (UsageError when malformed), else kFallbackSeed.
std::uint64_t default_seed();

/// Options shared by every command that runs the test.
struct TestFlags {
    std::string kernel = "linear";
    std::string matching = "neighbour";
    std::string method = "mc";
    std::size_t draws = kDefaultDraws;
    std::uint64_t seed = kFallbackSeed;
    double alpha = 0.05;
    /// Plug-in matching fits its moment model on held-out data: a separate
    /// file, or a seeded random split with this training fraction. Neither
    /// has a default.
    std::optional<std::string> train_file;
    std::optional<double> train_fraction;
    std::size_t threads = 0;
};

TestConfig make_test_config(const TestFlags& flags);

struct TestOptions {
    std::string file;
    io::CsvSchema schema;
    TestFlags flags;
    std::optional<std::string> out;
    std::string command;
};

/// Loads the CSV, runs the test, prints a summary and writes the record when
/// out is set. Throws io::UsageError or std::invalid_argument on bad input.
io::RunRecord cmd_test(const TestOptions& opts, std::ostream& out);

enum class SweepType { type1, power };

/// One named sweep of a simulation config. List-valued fields are crossed;
/// every matching is evaluated on the same simulated datasets.
struct SweepSpec {
    std::string name;
    SweepType type = SweepType::power;
    ModelKind model = ModelKind::null_additive;
    std::vector<std::size_t> n;
    std::vector<MuShape> mu{MuShape::identity};
    std::vector<double> gamma{0.0};
    std::vector<double> beta{0.0};
    /// When set, beta = scale * n^beta_exponent replaces the beta list.
    std::optional<std::vector<double>> beta_scale;
    double beta_exponent = 0.0;
    std::vector<double> rho{0.0};
    std::vector<double> sigma{1.0};
    std::vector<std::string> matching{"neighbour"};
    std::string kernel = "linear";
    std::vector<double> alpha{0.05};
    std::size_t trials = 1000;
    std::size_t draws = kExperimentDraws;
};

struct SimulationConfig {
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::vector<SweepSpec> sweeps;
};

/// Parses the flat "key = value" format (see configs/README.md). Unknown
/// keys, duplicate keys and duplicate sweep names raise io::UsageError.
SimulationConfig parse_simulation_config(std::istream& in);
SimulationConfig parse_simulation_config_file(const std::string& path);

struct SimulationCell {
    std::string sweep;
    SweepType type = SweepType::power;
    ModelSpec model;
    std::string matching;
    std::string kernel;
    std::size_t draws = 0;
    ExperimentReport report;
};

/// Runs every cell of every sweep. Progress lines go to progress if set.
std::vector<SimulationCell> run_simulation(const SimulationConfig& cfg, std::uint64_t seed, std::size_t threads,
                                           std::ostream* progress);

/// Header and rows of the flat cell table.
void write_cells_csv(std::ostream& out, const std::vector<SimulationCell>& cells);

struct SimulateOptions {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string command;
};

/// Writes <out_dir>/cells.csv and <out_dir>/records.json.
std::vector<io::RunRecord> cmd_simulate(const SimulateOptions& opts, std::ostream& out);

struct SubsampleOptions {
    std::string file;
    io::CsvSchema schema;
    TestFlags flags;
    std::size_t repeats = 100;
    /// Replace X in each subsample by a synthetic control fitted on the
    /// complement rows (X must be binary).
    bool synthetic_control = false;
    std::optional<std::string> out;
    std::string command;
};

/// Repeated half-size subsamples drawn without replacement. Plug-in
/// matching fits on the complement of each subsample.
io::RunRecord cmd_subsample_study(const SubsampleOptions& opts, std::ostream& out);

struct IsnrOptions {
    std::string file;
    std::string mu_col = "mu";
    std::string z_col = "z";
    char delimiter = ',';
    bool has_header = true;
    double sigma = 1.0;
    std::optional<std::string> out;
    std::string command;
};

io::RunRecord cmd_isnr(const IsnrOptions& opts, std::ostream& out);

struct CheckOptions {
    std::size_t trials = 200;
    std::uint64_t seed = kFallbackSeed;
    /// Validate a user matching (CSV with 1-based columns i, j) against the
    /// Z column of a dataset instead of running the property suite.
    std::optional<std::string> data_file;
    std::optional<std::string> pairs_file;
    io::CsvSchema schema;
};

/// Returns the process exit code: 0 when every check passes, 1 when a
/// property fails, 2 when a supplied matching is invalid.
int cmd_check(const CheckOptions& opts, std::ostream& out);

}  // namespace pairswap::cli
