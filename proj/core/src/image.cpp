#include <destrike/image.hpp>

#include <destrike/errors.hpp>

#include <algorithm>
#include <numeric>
#include <string>

namespace destrike {

namespace {

void check_dims(int height, int width) {
    if (height < 1 || width < 1) {
        throw ShapeError("image dimensions must be positive, got " + std::to_string(height) +
                         "x" + std::to_string(width));
    }
}

}  // namespace

GrayImage::GrayImage(int height, int width, Polarity polarity, float fill)
    : height_(height), width_(width), polarity_(polarity) {
    check_dims(height, width);
    pixels_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

GrayImage::GrayImage(int height, int width, Polarity polarity, std::vector<float> pixels)
    : height_(height), width_(width), polarity_(polarity), pixels_(std::move(pixels)) {
    check_dims(height, width);
    if (pixels_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw ShapeError("pixel buffer does not match " + std::to_string(height) + "x" +
                         std::to_string(width));
    }
}

BinaryImage::BinaryImage(int height, int width, bool fill) : height_(height), width_(width) {
    check_dims(height, width);
    mask_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
                 fill ? 1 : 0);
}

std::size_t BinaryImage::count() const noexcept {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

}  // namespace destrike
