#pragma once

#include <destrike/dataset.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace destrike {

struct KnownDataset {
    std::string name;
    std::string description;
    /// Zenodo record id, when one is published.
    std::optional<std::string> record;
    WriterMode writer_mode = WriterMode::single_writer;
};

const std::vector<KnownDataset>& known_datasets();

struct FetchOptions {
    std::string dataset;
    std::filesystem::path out_dir;
    /// Overrides (or supplies) the record id.
    std::optional<std::string> record;
    /// Zenodo REST endpoint; a file:// URL serves a local mirror.
    std::string api_base = "https://zenodo.org/api";
};

struct FetchResult {
    std::filesystem::path root;
    Manifest manifest;
    CountReport counts;
    bool cache_hit = false;
};

/// Downloads the record's files into <out_dir>/.cache/<record>/ (skipping
/// files whose MD5 already matches), unpacks zip archives, arranges the
/// split directories into the dataset layout, writes manifest.json and
/// checks split counts. Throws ValidationError for unknown names,
/// NetworkError when offline and ChecksumError on digest mismatch.
FetchResult fetch_dataset(const FetchOptions& options);

std::string md5_hex(const std::filesystem::path& file);

/// GET into memory / to a file. file:// URLs are supported.
std::string http_get(const std::string& url);
void http_download(const std::string& url, const std::filesystem::path& file);

}  // namespace destrike
