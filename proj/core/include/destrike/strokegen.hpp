#pragma once

#include <destrike/image.hpp>
#include <destrike/rng.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace destrike {

enum class StrokeType : std::uint8_t { single, doubled, diagonal, cross, zigzag, wave, scratch };

inline constexpr std::array<StrokeType, 7> kStrokeTypes = {
    StrokeType::single, StrokeType::doubled, StrokeType::diagonal, StrokeType::cross,
    StrokeType::zigzag, StrokeType::wave,    StrokeType::scratch};

std::string_view to_string(StrokeType type) noexcept;
std::optional<StrokeType> parse_stroke_type(std::string_view name) noexcept;

/// Where the written word sits. Rows and columns are inclusive pixel indices.
struct InkGeometry {
    int top = 0;
    int left = 0;
    int bottom = 0;
    int right = 0;
    int band_lo = 0;
    int band_hi = 0;
    double pen_width = 1.0;
    /// 95th percentile of inverted ink intensity; strokes are drawn relative to it.
    double ink_level = 1.0;

    int bbox_width() const noexcept { return right - left; }
    int bbox_height() const noexcept { return bottom - top; }
    double band_mid() const noexcept { return 0.5 * (band_lo + band_hi); }
    double band_height() const noexcept { return static_cast<double>(band_hi - band_lo); }
};

/// Pixel-centre coordinates: x is the column, y the row.
struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

enum class PathKind : std::uint8_t {
    polyline,
    /// Chain of quadratic Bezier segments. Points alternate on-curve and
    /// control: p0, c1, p1, c2, p2, ... (odd length).
    quadratic,
};

struct StrokePath {
    PathKind kind = PathKind::polyline;
    std::vector<Point> points;
    friend bool operator==(const StrokePath&, const StrokePath&) = default;
};

/// Complete record of one synthetic strikethrough; rendering is a pure
/// function of this record and the canvas size.
struct StrokeSpec {
    StrokeType type = StrokeType::single;
    std::uint64_t seed = 0;
    std::vector<StrokePath> paths;
    double brush_width = 1.0;
    double intensity = 1.0;
    std::string image_id;

    friend bool operator==(const StrokeSpec&, const StrokeSpec&) = default;
};

struct StrokeLayer {
    GrayImage layer;  // inverted polarity
    BinaryImage mask;
};

struct StruckImage {
    GrayImage struck;  // inverted polarity
    BinaryImage mask;
    StrokeSpec spec;
};

/// Throws NoInkError when Otsu finds no ink.
InkGeometry estimate_ink_geometry(const GrayImage& clean);

StrokeSpec sample_stroke(StrokeType type, const InkGeometry& geom, Rng& rng);

/// Polyline approximation of a path, as used by the renderer.
std::vector<Point> flatten(const StrokePath& path);

StrokeLayer render_stroke(const StrokeSpec& spec, int height, int width);

StruckImage apply_strikethrough(const GrayImage& clean, StrokeType type, std::uint64_t seed);

struct CleanWord {
    std::string id;
    GrayImage image;  // inverted polarity
};

struct SyntheticPair {
    std::string id;
    GrayImage struck;  // inverted polarity
    GrayImage clean;   // inverted polarity
    BinaryImage mask;
    StrokeSpec spec;
};

/// One stroke per clean image. Each image draws its stroke type and stroke
/// seed from a generator seeded by derive_seed(global_seed, id), so the
/// result does not depend on input order.
std::vector<SyntheticPair> generate_partition(const std::vector<CleanWord>& clean_set,
                                              std::uint64_t global_seed);

}  // namespace destrike
