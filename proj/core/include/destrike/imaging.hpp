#pragma once

#include <destrike/image.hpp>

#include <filesystem>

namespace destrike {

inline constexpr int kFrameHeight = 128;
inline constexpr int kFrameWidth = 512;

/// Geometry of the fixed-frame transform, sufficient to undo it exactly.
struct ProcessingMeta {
    int original_height = 0;
    int original_width = 0;
    double scale_factor = 1.0;
    int pad_right = 0;
    int pad_bottom = 0;

    int content_height() const noexcept { return kFrameHeight - pad_bottom; }
    int content_width() const noexcept { return kFrameWidth - pad_right; }

    friend bool operator==(const ProcessingMeta&, const ProcessingMeta&) = default;
};

struct Preprocessed {
    GrayImage image;
    ProcessingMeta meta;
};

GrayImage invert(const GrayImage& img);

/// Bilinear resampling with half-pixel centres (no antialiasing prefilter).
GrayImage resize_bilinear(const GrayImage& img, int height, int width);

/// Fits an inverted-polarity image into the 128x512 network frame.
///
/// Content is scaled to height 128 keeping its aspect ratio and padded on the
/// right with background. When that would exceed width 512 the content is
/// scaled to width 512 instead and padded at the bottom.
Preprocessed preprocess(const GrayImage& img);

/// Inverse of preprocess applied to a network output: crops the padding,
/// rescales to the original size and returns display polarity.
/// Throws InvalidMetaError if the meta does not describe a 128x512 frame.
GrayImage postprocess(const GrayImage& img, const ProcessingMeta& meta);

/// Otsu threshold as a bin index in [0, 255] over 256 uniform bins on [0, 1].
/// Returns -1 for images with zero between-class variance at every threshold.
int otsu_threshold(const GrayImage& img);

/// Display-polarity binarization: ink is every pixel whose bin is <= the
/// Otsu threshold. Constant images give an empty mask.
BinaryImage otsu_binarize(const GrayImage& img);

/// Bin of an intensity in the 256-bin histogram used by otsu_threshold.
int intensity_bin(float v) noexcept;

/// Loads an 8/16-bit PNG (gray, gray+alpha, RGB, RGBA) as a display image.
GrayImage load_png(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG, mapping [0,1] to [0,255] rounding half up.
void save_png(const GrayImage& img, const std::filesystem::path& path);
void save_mask_png(const BinaryImage& mask, const std::filesystem::path& path);

std::uint8_t to_byte(float v) noexcept;

}  // namespace destrike
