#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace destrike {

/// Extracts a zip archive (stored and deflate entries) below out_dir and
/// returns the extracted file paths. Entries that would escape out_dir are
/// rejected with FormatError.
std::vector<std::filesystem::path> extract_zip(const std::filesystem::path& archive,
                                               const std::filesystem::path& out_dir);

}  // namespace destrike
