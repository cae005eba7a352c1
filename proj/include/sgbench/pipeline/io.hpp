#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace sgbench::pipeline {

/// Writes to a sibling temporary file, then renames over the target.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// ISO-8601 UTC with seconds resolution.
std::string utc_timestamp();

}  // namespace sgbench::pipeline
