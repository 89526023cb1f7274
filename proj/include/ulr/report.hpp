#pragma once

// Byte-stable report output: JSON with sorted keys and %.17g numbers, CSV
// tables with a fixed header.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ulr::report {

using Json = nlohmann::json;

std::string format_double(double v);

/// Pretty-printed JSON, keys sorted, two-space indent, trailing newline.
/// Non-finite numbers become null.
std::string dump_json(const Json& j);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row);
    Json to_json() const;
};

std::string to_csv(const Table& t);

/// Writes `content` to `path`, creating parent directories. Throws
/// std::runtime_error when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace ulr::report
