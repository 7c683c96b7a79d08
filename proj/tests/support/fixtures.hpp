#pragma once

#include <destrike/dataset.hpp>
#include <destrike/image.hpp>
#include <destrike/rng.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace destrike::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "destrike");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

GrayImage random_image(int height, int width, Rng& rng, Polarity polarity = Polarity::display);
BinaryImage random_mask(int height, int width, Rng& rng, double ink_probability);
GrayImage constant_image(int height, int width, float value, Polarity polarity = Polarity::display);

/// Writes `count` rendered builtin words as clean PNGs, then synthesizes
/// `partitions` partitions under root/data. When held_out_seed is set, the
/// words [held_out_offset, +held_out_count) become a validation split and the
/// next held_out_count words a test split. Returns the manifest path.
std::filesystem::path make_word_dataset(const std::filesystem::path& root, std::size_t count,
                                        int partitions, std::uint64_t seed,
                                        std::optional<std::uint64_t> held_out_seed = std::nullopt,
                                        std::size_t held_out_offset = 0, std::size_t held_out_count = 0);

/// Preprocessed pairs loaded back from a small on-disk word dataset.
std::vector<ImagePair> word_pairs(std::size_t count, std::uint64_t seed);

/// Byte contents of every regular file below root, keyed by relative path.
std::vector<std::pair<std::string, std::string>> tree_contents(const std::filesystem::path& root);

/// Writes an uncompressed zip archive holding the given (name, bytes) entries.
void write_stored_zip(const std::filesystem::path& archive,
                      const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace destrike::testing
