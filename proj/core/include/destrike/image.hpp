#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace destrike {

/// Which intensity encodes ink. Files on disk and metric inputs use
/// display polarity; networks and stroke synthesis work in inverted space.
enum class Polarity : std::uint8_t { display, inverted };

/// Single-channel image with intensities in [0, 1], row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int height, int width, Polarity polarity, float fill = 0.0f);
    GrayImage(int height, int width, Polarity polarity, std::vector<float> pixels);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }
    Polarity polarity() const noexcept { return polarity_; }
    void set_polarity(Polarity p) noexcept { polarity_ = p; }

    float& at(int row, int col) { return pixels_[index(row, col)]; }
    float at(int row, int col) const { return pixels_[index(row, col)]; }

    std::span<float> pixels() noexcept { return pixels_; }
    std::span<const float> pixels() const noexcept { return pixels_; }

    bool same_shape(const GrayImage& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    Polarity polarity_ = Polarity::display;
    std::vector<float> pixels_;
};

/// Per-pixel ink mask; true marks ink.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int height, int width, bool fill = false);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return mask_.size(); }

    bool at(int row, int col) const {
        return mask_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                     static_cast<std::size_t>(col)] != 0;
    }
    void set(int row, int col, bool value) {
        mask_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
              static_cast<std::size_t>(col)] = value ? 1 : 0;
    }

    std::span<std::uint8_t> data() noexcept { return mask_; }
    std::span<const std::uint8_t> data() const noexcept { return mask_; }

    std::size_t count() const noexcept;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> mask_;
};

}  // namespace destrike
