#pragma once

// JSON encodings shared by several translation units. Internal header.

#include <destrike/models.hpp>
#include <destrike/strokegen.hpp>

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace destrike::detail {

using nlohmann::json;

json to_json(const StrokeSpec& spec);
StrokeSpec stroke_spec_from_json(const json& j);

/// strokes.json document for one split.
json strokes_document(const std::vector<StrokeSpec>& specs, std::uint64_t seed);
std::vector<StrokeSpec> read_strokes_file(const std::filesystem::path& file);

json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const json& j);

json read_json_file(const std::filesystem::path& file);
/// Writes with two-space indentation and a trailing newline.
void write_json_file(const json& j, const std::filesystem::path& file);

}  // namespace destrike::detail
