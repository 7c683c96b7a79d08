#pragma once

#include <destrike/image.hpp>
#include <destrike/rng.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace destrike {

/// Distinct lowercase words used to render the offline fallback corpus.
const std::vector<std::string>& builtin_words();

/// Renders one word in a cursive Hershey face, ink dark on white, cropped to
/// the ink with a small margin. Style jitter is drawn from rng; the jitter is
/// small so the corpus looks like one writer.
GrayImage render_word(std::string_view text, Rng& rng);

struct RenderedWord {
    std::string id;
    GrayImage image;  // display polarity
};

/// Renders builtin_words()[offset, offset + count). Throws ValidationError
/// if the range exceeds the builtin list.
std::vector<RenderedWord> render_word_corpus(std::size_t offset, std::size_t count,
                                             std::uint64_t seed);

/// Writes a rendered corpus as <dir>/<id>.png.
void write_word_corpus(const std::filesystem::path& dir, std::size_t offset, std::size_t count,
                       std::uint64_t seed);

}  // namespace destrike
