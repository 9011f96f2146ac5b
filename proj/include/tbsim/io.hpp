#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "tbsim/model.hpp"

namespace tbsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// JSON object whose keys mirror the ExperimentConfig field names.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Keys missing from `j` keep their default_config() value; unknown keys and
/// mistyped values throw ConfigError naming the key path.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);

/// "sha256:<hex>" of the canonical (sorted-key, compact) JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest decimal string that round-trips to the same double.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws std::runtime_error naming it if absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, std::size_t col) const;
};

/// Plain comma-separated file with a header row. Throws on an empty file or
/// ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Radians, or a pi expression such as "pi", "pi/2", "-pi/4", "3*pi/2".
double parse_phase(const std::string& text);

void write_file(const std::filesystem::path& path, const std::string& contents);

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string command;
    std::vector<std::string> arguments;
    std::vector<std::string> outputs;
    std::string tool_version = kToolVersion;
};

nlohmann::json manifest_to_json(const RunManifest& m);

}  // namespace tbsim
