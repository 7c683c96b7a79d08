#pragma once

#include <destrike/image.hpp>
#include <destrike/imaging.hpp>
#include <destrike/strokegen.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace destrike {

enum class WriterMode : std::uint8_t { single_writer, multi_writer };

struct PairEntry {
    std::string id;
    /// Relative to the manifest root.
    std::filesystem::path struck_path;
    std::filesystem::path clean_path;
    std::optional<StrokeType> stroke_type;

    friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

using Split = std::vector<PairEntry>;

struct Manifest {
    std::string name;
    WriterMode writer_mode = WriterMode::single_writer;
    std::map<std::string, Split> splits;
    /// Directory the entry paths are relative to. Not serialized.
    std::filesystem::path root;

    bool has_split(const std::string& split) const { return splits.contains(split); }
    const Split& split(const std::string& name) const;
    std::size_t total_pairs() const;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// True for train, validation, test and partition-0 .. partition-4.
bool is_valid_split_name(const std::string& name);
std::string partition_name(int index);

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kStrokesFile = "strokes.json";

/// Scans <root>/<split>/{struck,clean}/*.png. Entries are sorted by id.
/// Stroke types come from <root>/<split>/strokes.json when present.
/// Throws DanglingPairError when a struck or clean image lacks its mate.
Manifest build_manifest(const std::filesystem::path& root,
                        std::optional<std::string> name = std::nullopt,
                        WriterMode mode = WriterMode::single_writer);

std::string serialize_manifest(const Manifest& manifest);
Manifest parse_manifest(const std::string& text, const std::filesystem::path& root);
void save_manifest(const Manifest& manifest, const std::filesystem::path& file);
/// Entry paths resolve against the file's directory.
Manifest load_manifest(const std::filesystem::path& file);

/// Concatenates the named splits. With more than one part every id gets a
/// "@<split>" suffix so ids stay unique. Throws ValidationError on unknown names.
Split aggregate_partitions(const Manifest& manifest, const std::vector<std::string>& parts);

/// One preprocessed training/evaluation unit.
struct ImagePair {
    std::string id;
    GrayImage struck;  // inverted, 128x512
    GrayImage clean;   // inverted, 128x512
    ProcessingMeta meta;
    GrayImage clean_original;   // display polarity, original size
    GrayImage struck_original;  // display polarity, original size
    std::optional<StrokeType> stroke_type;
};

ImagePair load_pair(const PairEntry& entry, const std::filesystem::path& root);

/// Loads a split in id order, or shuffled deterministically when a seed is given.
std::vector<ImagePair> load_pairs(const Manifest& manifest, const std::string& split,
                                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);
std::vector<ImagePair> load_pairs(const Split& entries, const std::filesystem::path& root,
                                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);

template <typename Item>
void shuffle_in_place(std::vector<Item>& items, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
        std::swap(items[i - 1], items[j]);
    }
}

struct CountCheck {
    std::string split;
    std::size_t expected = 0;
    std::size_t actual = 0;
    bool matches() const noexcept { return expected == actual; }
};

struct CountReport {
    bool known_dataset = false;
    std::string reference;  // dataset the counts were taken from
    std::vector<CountCheck> checks;
    bool all_match() const;
    std::string to_string() const;
};

/// Compares split sizes with the published counts for recognised dataset
/// names (IAM strikethrough, Dracula real, Dracula synthetic).
CountReport validate_counts(const Manifest& manifest);

}  // namespace destrike
