#pragma once

// CSV ingestion and JSON run records.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pairswap/core.hpp"
#include "pairswap/simulation.hpp"

namespace pairswap::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Bad input from the user: malformed files, missing columns, invalid
/// option values. The command line maps it to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Without a header, column names are 1-based column numbers ("1", "2", ...).
struct CsvSchema {
    std::string x_col = "x";
    std::string y_col = "y";
    std::string z_col = "z";
    char delimiter = ',';
    bool has_header = true;
};

/// Shortest form that reads back to the same double (up to 17 significant
/// digits).
std::string format_double(double v);

/// Reads the named columns as finite decimals. Throws UsageError naming the
/// missing column, or the line of an unparsable or non-finite cell.
std::vector<std::vector<double>> read_columns(std::istream& in, const std::vector<std::string>& names,
                                              char delimiter, bool has_header);
std::vector<std::vector<double>> read_columns_file(const std::string& path, const std::vector<std::string>& names,
                                                   char delimiter, bool has_header);

Dataset read_dataset(std::istream& in, const CsvSchema& schema);
Dataset read_dataset_file(const std::string& path, const CsvSchema& schema);
void write_dataset(std::ostream& out, const Dataset& d, const CsvSchema& schema = {});
void write_dataset_file(const std::string& path, const Dataset& d, const CsvSchema& schema = {});

struct SubsampleReport {
    std::size_t repeats = 0;
    std::size_t subsample_size = 0;
    bool synthetic_control = false;
    double mean_p_value = 0.0;
    /// Standard error of the mean p-value.
    double std_err = 0.0;
    /// Fraction of repeats with p <= 0.05 and p <= 0.1.
    double rate_at_05 = 0.0;
    double rate_at_10 = 0.0;
    std::vector<double> p_values;
};

struct IsnrReport {
    double isnr = 0.0;
    double residual_norm = 0.0;
    double sigma = 1.0;
    std::size_t n = 0;
};

struct RunRecord {
    std::string timestamp;
    std::string command;
    std::optional<std::uint64_t> seed;
    std::string tool_version = kToolVersion;
    std::variant<TestResult, ExperimentReport, SubsampleReport, IsnrReport> result;
    /// Free-form parameters of the run (experiment cell, options).
    nlohmann::json params = nlohmann::json::object();
};

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const ExperimentReport& r);
nlohmann::json to_json(const SubsampleReport& r);
nlohmann::json to_json(const IsnrReport& r);
nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace pairswap::io
