#include <destrike/imaging.hpp>

#include <destrike/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace destrike {

GrayImage invert(const GrayImage& img) {
    GrayImage out = img;
    for (float& p : out.pixels()) p = 1.0f - p;
    out.set_polarity(img.polarity() == Polarity::display ? Polarity::inverted
                                                         : Polarity::display);
    return out;
}

namespace {

struct Tap {
    int lo;
    int hi;
    double frac;
};

std::vector<Tap> bilinear_taps(int src, int dst) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    const double ratio = static_cast<double>(src) / static_cast<double>(dst);
    for (int i = 0; i < dst; ++i) {
        double pos = (static_cast<double>(i) + 0.5) * ratio - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
        const int lo = static_cast<int>(std::floor(pos));
        const int hi = std::min(lo + 1, src - 1);
        taps[static_cast<std::size_t>(i)] = {lo, hi, pos - lo};
    }
    return taps;
}

struct FrameLayout {
    int content_height;
    int content_width;
    double scale;
};

FrameLayout layout_for(int height, int width) {
    const double by_height = static_cast<double>(kFrameHeight) / height;
    const long scaled_width = std::lround(width * by_height);
    if (scaled_width <= kFrameWidth) {
        return {kFrameHeight, static_cast<int>(std::max(1L, scaled_width)), by_height};
    }
    const double by_width = static_cast<double>(kFrameWidth) / width;
    const long scaled_height = std::lround(height * by_width);
    return {static_cast<int>(std::clamp(scaled_height, 1L, static_cast<long>(kFrameHeight))),
            kFrameWidth, by_width};
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& img, int height, int width) {
    if (img.height() == height && img.width() == width) return img;
    GrayImage out(height, width, img.polarity());
    const auto rows = bilinear_taps(img.height(), height);
    const auto cols = bilinear_taps(img.width(), width);
    for (int r = 0; r < height; ++r) {
        const Tap& ty = rows[static_cast<std::size_t>(r)];
        for (int c = 0; c < width; ++c) {
            const Tap& tx = cols[static_cast<std::size_t>(c)];
            const double top = img.at(ty.lo, tx.lo) * (1.0 - tx.frac) + img.at(ty.lo, tx.hi) * tx.frac;
            const double bottom =
                img.at(ty.hi, tx.lo) * (1.0 - tx.frac) + img.at(ty.hi, tx.hi) * tx.frac;
            const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
            out.at(r, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

Preprocessed preprocess(const GrayImage& img) {
    const FrameLayout layout = layout_for(img.height(), img.width());
    const GrayImage content = resize_bilinear(img, layout.content_height, layout.content_width);

    Preprocessed result{GrayImage(kFrameHeight, kFrameWidth, img.polarity(), 0.0f),
                        ProcessingMeta{img.height(), img.width(), layout.scale,
                                       kFrameWidth - layout.content_width,
                                       kFrameHeight - layout.content_height}};
    for (int r = 0; r < layout.content_height; ++r) {
        for (int c = 0; c < layout.content_width; ++c) result.image.at(r, c) = content.at(r, c);
    }
    return result;
}

GrayImage postprocess(const GrayImage& img, const ProcessingMeta& meta) {
    if (img.height() != kFrameHeight || img.width() != kFrameWidth) {
        throw ShapeError("postprocess expects a 128x512 frame, got " +
                         std::to_string(img.height()) + "x" + std::to_string(img.width()));
    }
    if (meta.original_height < 1 || meta.original_width < 1 || !(meta.scale_factor > 0.0) ||
        meta.pad_right < 0 || meta.pad_bottom < 0 || meta.pad_right >= kFrameWidth ||
        meta.pad_bottom >= kFrameHeight) {
        throw InvalidMetaError("processing meta out of range");
    }
    const FrameLayout expected = layout_for(meta.original_height, meta.original_width);
    if (expected.content_height != meta.content_height() ||
        expected.content_width != meta.content_width() ||
        std::abs(expected.scale - meta.scale_factor) > 1e-9 * expected.scale) {
        throw InvalidMetaError("processing meta inconsistent with original " +
                               std::to_string(meta.original_height) + "x" +
                               std::to_string(meta.original_width));
    }

    GrayImage content(meta.content_height(), meta.content_width(), img.polarity());
    for (int r = 0; r < meta.content_height(); ++r) {
        for (int c = 0; c < meta.content_width(); ++c) content.at(r, c) = img.at(r, c);
    }
    GrayImage restored = resize_bilinear(content, meta.original_height, meta.original_width);
    return img.polarity() == Polarity::display ? restored : invert(restored);
}

int intensity_bin(float v) noexcept {
    if (!(v > 0.0f)) return 0;  // also catches NaN
    if (v >= 1.0f) return 255;
    const int bin = static_cast<int>(std::floor(static_cast<double>(v) * 256.0));
    return std::clamp(bin, 0, 255);
}

int otsu_threshold(const GrayImage& img) {
    std::array<std::uint64_t, 256> hist{};
    for (float p : img.pixels()) ++hist[static_cast<std::size_t>(intensity_bin(p))];

    double total = 0.0;
    double total_sum = 0.0;
    for (int i = 0; i < 256; ++i) {
        total += static_cast<double>(hist[static_cast<std::size_t>(i)]);
        total_sum += static_cast<double>(i) * static_cast<double>(hist[static_cast<std::size_t>(i)]);
    }

    double weight0 = 0.0;
    double sum0 = 0.0;
    double best = 0.0;
    int threshold = -1;
    for (int t = 0; t < 255; ++t) {
        const auto count = static_cast<double>(hist[static_cast<std::size_t>(t)]);
        weight0 += count;
        sum0 += static_cast<double>(t) * count;
        const double weight1 = total - weight0;
        if (weight0 == 0.0 || weight1 == 0.0) continue;
        const double diff = sum0 / weight0 - (total_sum - sum0) / weight1;
        const double between = weight0 * weight1 * diff * diff;
        if (between > best) {
            best = between;
            threshold = t;
        }
    }
    return threshold;
}

BinaryImage otsu_binarize(const GrayImage& img) {
    BinaryImage mask(img.height(), img.width());
    const int t = otsu_threshold(img);
    if (t < 0) return mask;
    auto src = img.pixels();
    auto dst = mask.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = intensity_bin(src[i]) <= t ? 1 : 0;
    return mask;
}

std::uint8_t to_byte(float v) noexcept {
    const double scaled = std::floor(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0 + 0.5);
    return static_cast<std::uint8_t>(scaled);
}

}  // namespace destrike
