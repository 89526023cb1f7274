#pragma once

// Named experiments driven by JSON configs, and their reports.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ulr/report.hpp"

namespace ulr::experiments {

using report::Json;

inline const std::vector<std::string> kExperiments{"classical-equiv", "qm-equiv", "free-field", "phi4",
                                                   "ultralocal-check"};

struct ExperimentConfig {
    std::string experiment;
    Json parameters; ///< defaults merged with the file
    std::uint64_t seed = 0;
    std::string output_dir;
};

/// Default parameter block of an experiment.
Json default_parameters(const std::string& experiment);

/// Parses and validates a config document. Unknown keys, wrong types and
/// violated preconditions throw ValidationError with the field path.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ReportBundle {
    std::string experiment;
    Json parameters;
    std::uint64_t seed = 0;
    Json metrics = Json::object();
    std::map<std::string, bool> checks;
    std::map<std::string, report::Table> tables;
    double wall_time = 0.0;

    bool all_pass() const;
};

ReportBundle run_experiment(const ExperimentConfig& config, int jobs = 1);

enum class Format { csv, json };

/// summary.json (always), one CSV per table (csv format) and timing.json.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle, const std::filesystem::path& dir,
                                               Format format);

/// The summary document without wall time, as written to summary.json.
Json summary_json(const ReportBundle& bundle, Format format);

} // namespace ulr::experiments
