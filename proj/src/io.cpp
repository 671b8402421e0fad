#include "pairswap/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

namespace pairswap::io {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        fields.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    std::string_view s = text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open '" + path + "' for writing");
    return out;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

TestResult test_result_from_json(const json& j) {
    TestResult r;
    r.statistic = j.at("statistic").get<double>();
    r.p_value = j.at("p_value").get<double>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.num_pairs = j.at("num_pairs").get<std::size_t>();
    if (!j.at("num_draws").is_null()) r.num_draws = j.at("num_draws").get<std::size_t>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

ExperimentReport experiment_from_json(const json& j) {
    ExperimentReport r;
    r.rejection_rate = j.at("rejection_rate").get<double>();
    r.rejections = j.at("rejections").get<std::size_t>();
    r.trials = j.at("trials").get<std::size_t>();
    r.alpha = j.at("alpha").get<double>();
    r.std_err = j.at("std_err").get<double>();
    r.model = j.at("model").get<std::string>();
    r.test = j.at("test").get<std::string>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.p_values = j.at("p_values").get<std::vector<double>>();
    return r;
}

SubsampleReport subsample_from_json(const json& j) {
    SubsampleReport r;
    r.repeats = j.at("repeats").get<std::size_t>();
    r.subsample_size = j.at("subsample_size").get<std::size_t>();
    r.synthetic_control = j.at("synthetic_control").get<bool>();
    r.mean_p_value = j.at("mean_p_value").get<double>();
    r.std_err = j.at("std_err").get<double>();
    r.rate_at_05 = j.at("rate_at_05").get<double>();
    r.rate_at_10 = j.at("rate_at_10").get<double>();
    r.p_values = j.at("p_values").get<std::vector<double>>();
    return r;
}

IsnrReport isnr_from_json(const json& j) {
    IsnrReport r;
    r.isnr = j.at("isnr").get<double>();
    r.residual_norm = j.at("residual_norm").get<double>();
    r.sigma = j.at("sigma").get<double>();
    r.n = j.at("n").get<std::size_t>();
    return r;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::vector<double>> read_columns(std::istream& in, const std::vector<std::string>& names,
                                              char delimiter, bool has_header) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> positions;
    if (has_header) {
        bool found = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (!trim(line).empty()) {
                found = true;
                break;
            }
        }
        if (!found) throw UsageError("input is empty (expected a header row)");
        const auto header = split(line, delimiter);
        for (const auto& name : names) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw UsageError("column '" + name + "' not found in header");
            positions.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    } else {
        for (const auto& name : names) {
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), index);
            if (ec != std::errc() || ptr != name.data() + name.size() || index == 0) {
                throw UsageError("without a header, column '" + name + "' must be a 1-based column number");
            }
            positions.push_back(index - 1);
        }
    }

    std::vector<std::vector<double>> columns(names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split(line, delimiter);
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (positions[c] >= fields.size()) {
                throw UsageError("line " + std::to_string(line_no) + " (row " + std::to_string(row) +
                                 "): missing value for column '" + names[c] + "'");
            }
            double v = 0.0;
            if (!parse_double(fields[positions[c]], v) || !std::isfinite(v)) {
                throw UsageError("line " + std::to_string(line_no) + " (row " + std::to_string(row) +
                                 "): column '" + names[c] + "' has non-numeric or non-finite value '" +
                                 fields[positions[c]] + "'");
            }
            columns[c].push_back(v);
        }
    }
    if (row == 0) throw UsageError("input has no data rows");
    return columns;
}

std::vector<std::vector<double>> read_columns_file(const std::string& path, const std::vector<std::string>& names,
                                                   char delimiter, bool has_header) {
    auto in = open_input(path);
    try {
        return read_columns(in, names, delimiter, has_header);
    } catch (const UsageError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

Dataset read_dataset(std::istream& in, const CsvSchema& schema) {
    auto cols = read_columns(in, {schema.x_col, schema.y_col, schema.z_col}, schema.delimiter, schema.has_header);
    return Dataset(std::move(cols[0]), std::move(cols[1]), std::move(cols[2]));
}

Dataset read_dataset_file(const std::string& path, const CsvSchema& schema) {
    auto cols = read_columns_file(path, {schema.x_col, schema.y_col, schema.z_col}, schema.delimiter,
                                  schema.has_header);
    return Dataset(std::move(cols[0]), std::move(cols[1]), std::move(cols[2]));
}

void write_dataset(std::ostream& out, const Dataset& d, const CsvSchema& schema) {
    const char sep = schema.delimiter;
    if (schema.has_header) out << schema.x_col << sep << schema.y_col << sep << schema.z_col << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << format_double(d.x()[i]) << sep << format_double(d.y()[i]) << sep << format_double(d.z()[i]) << '\n';
    }
}

void write_dataset_file(const std::string& path, const Dataset& d, const CsvSchema& schema) {
    auto out = open_output(path);
    write_dataset(out, d, schema);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json to_json(const TestResult& r) {
    return {{"statistic", r.statistic},        {"p_value", r.p_value},
            {"method", to_string(r.method)},   {"num_pairs", r.num_pairs},
            {"num_draws", optional_json(r.num_draws)}, {"seed", optional_json(r.seed)},
            {"warnings", r.warnings}};
}

json to_json(const ExperimentReport& r) {
    return {{"rejection_rate", r.rejection_rate}, {"rejections", r.rejections}, {"trials", r.trials},
            {"alpha", r.alpha},                   {"std_err", r.std_err},       {"model", r.model},
            {"test", r.test},                     {"master_seed", r.master_seed}, {"p_values", r.p_values}};
}

json to_json(const SubsampleReport& r) {
    return {{"repeats", r.repeats},         {"subsample_size", r.subsample_size},
            {"synthetic_control", r.synthetic_control}, {"mean_p_value", r.mean_p_value},
            {"std_err", r.std_err},         {"rate_at_05", r.rate_at_05},
            {"rate_at_10", r.rate_at_10},   {"p_values", r.p_values}};
}

json to_json(const IsnrReport& r) {
    return {{"isnr", r.isnr}, {"residual_norm", r.residual_norm}, {"sigma", r.sigma}, {"n", r.n}};
}

json to_json(const RunRecord& r) {
    json j = {{"timestamp", r.timestamp},
              {"command", r.command},
              {"seed", optional_json(r.seed)},
              {"tool_version", r.tool_version},
              {"params", r.params}};
    std::visit(
        [&](const auto& result) {
            using T = std::decay_t<decltype(result)>;
            if constexpr (std::is_same_v<T, TestResult>) j["kind"] = "test";
            if constexpr (std::is_same_v<T, ExperimentReport>) j["kind"] = "experiment";
            if constexpr (std::is_same_v<T, SubsampleReport>) j["kind"] = "subsample";
            if constexpr (std::is_same_v<T, IsnrReport>) j["kind"] = "isnr";
            j["result"] = to_json(result);
        },
        r.result);
    return j;
}

RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.timestamp = j.at("timestamp").get<std::string>();
    r.command = j.at("command").get<std::string>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.params = j.at("params");
    const auto kind = j.at("kind").get<std::string>();
    const auto& res = j.at("result");
    if (kind == "test") {
        r.result = test_result_from_json(res);
    } else if (kind == "experiment") {
        r.result = experiment_from_json(res);
    } else if (kind == "subsample") {
        r.result = subsample_from_json(res);
    } else if (kind == "isnr") {
        r.result = isnr_from_json(res);
    } else {
        throw std::invalid_argument("unknown record kind '" + kind + "'");
    }
    return r;
}

void write_json_file(const std::string& path, const json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace pairswap::io
