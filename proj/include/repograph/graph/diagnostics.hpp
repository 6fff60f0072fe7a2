#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace repograph {

/// Non-fatal problem found while indexing or running the pipeline.
struct Diagnostic {
    std::string file_path;
    std::uint32_t line = 0;
    std::string kind;  // syntax_error, unresolved_call, dynamic_call, io_error, ...
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);

/// Sorts by (file_path, line, kind, message) so reports are reproducible.
void sort_diagnostics(Diagnostics& diags);

/// JSON-lines file, one diagnostic per line.
void write_diagnostics(const std::filesystem::path& path, const Diagnostics& diags);
Diagnostics read_diagnostics(const std::filesystem::path& path);

}  // namespace repograph
