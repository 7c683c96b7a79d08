#include "fixtures.hpp"

#include <destrike/commands.hpp>
#include <destrike/word_corpus.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>
#include <zlib.h>

namespace destrike::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

GrayImage random_image(int height, int width, Rng& rng, Polarity polarity) {
    GrayImage img(height, width, polarity);
    for (float& p : img.pixels()) p = static_cast<float>(rng.uniform());
    return img;
}

BinaryImage random_mask(int height, int width, Rng& rng, double ink_probability) {
    BinaryImage mask(height, width);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) mask.set(r, c, rng.uniform() < ink_probability);
    }
    return mask;
}

GrayImage constant_image(int height, int width, float value, Polarity polarity) {
    return GrayImage(height, width, polarity, value);
}

fs::path make_word_dataset(const fs::path& root, std::size_t count, int partitions, std::uint64_t seed,
                           std::optional<std::uint64_t> held_out_seed, std::size_t held_out_offset,
                           std::size_t held_out_count) {
    std::ostringstream quiet;
    write_word_corpus(root / "words", 0, count, seed);
    SynthOptions synth;
    synth.clean_dir = root / "words";
    synth.out_dir = root / "data";
    synth.partitions = partitions;
    synth.seed = seed;
    fs::path manifest = cmd_synth(synth, quiet);
    if (held_out_seed) {
        // Validation and test draw disjoint word ranges and seeds.
        std::size_t offset = held_out_offset;
        std::uint64_t split_seed = *held_out_seed;
        for (const char* split : {"validation", "test"}) {
            const fs::path words = root / (std::string(split) + "_words");
            write_word_corpus(words, offset, held_out_count, seed);
            synth.clean_dir = words;
            synth.partitions = 1;
            synth.seed = split_seed;
            synth.split_as = split;
            manifest = cmd_synth(synth, quiet);
            offset += held_out_count;
            split_seed = derive_seed(*held_out_seed, split);
        }
    }
    return manifest;
}

std::vector<ImagePair> word_pairs(std::size_t count, std::uint64_t seed) {
    TempDir dir("pairs");
    const Manifest manifest = load_manifest(make_word_dataset(dir.path(), count, 1, seed));
    return load_pairs(manifest, partition_name(0));
}

std::vector<std::pair<std::string, std::string>> tree_contents(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out.emplace_back(fs::relative(e.path(), root).generic_string(),
                         std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void put16(std::string& out, unsigned v) {
    out += static_cast<char>(v & 0xff);
    out += static_cast<char>((v >> 8) & 0xff);
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, v & 0xffff);
    put16(out, v >> 16);
}

}  // namespace

void write_stored_zip(const fs::path& archive, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string body;
    std::string directory;
    for (const auto& [name, bytes] : entries) {
        const auto crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
        const auto size = static_cast<std::uint32_t>(bytes.size());
        const auto offset = static_cast<std::uint32_t>(body.size());

        put32(body, 0x04034b50);
        put16(body, 20);
        put16(body, 0);
        put16(body, 0);  // stored
        put16(body, 0);
        put16(body, 0);
        put32(body, crc);
        put32(body, size);
        put32(body, size);
        put16(body, static_cast<unsigned>(name.size()));
        put16(body, 0);
        body += name;
        body += bytes;

        put32(directory, 0x02014b50);
        put16(directory, 20);
        put16(directory, 20);
        put16(directory, 0);
        put16(directory, 0);
        put16(directory, 0);
        put16(directory, 0);
        put32(directory, crc);
        put32(directory, size);
        put32(directory, size);
        put16(directory, static_cast<unsigned>(name.size()));
        put16(directory, 0);
        put16(directory, 0);
        put16(directory, 0);
        put16(directory, 0);
        put32(directory, 0);
        put32(directory, offset);
        directory += name;
    }
    std::string eocd;
    put32(eocd, 0x06054b50);
    put16(eocd, 0);
    put16(eocd, 0);
    put16(eocd, static_cast<unsigned>(entries.size()));
    put16(eocd, static_cast<unsigned>(entries.size()));
    put32(eocd, static_cast<std::uint32_t>(directory.size()));
    put32(eocd, static_cast<std::uint32_t>(body.size()));
    put16(eocd, 0);
    std::ofstream(archive, std::ios::binary) << body << directory << eocd;
}

}  // namespace destrike::testing
