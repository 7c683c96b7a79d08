#pragma once

#include <destrike/image.hpp>

#include <cstddef>
#include <span>

namespace destrike {

struct PixelCounts {
    std::size_t truth_ink = 0;      // N
    std::size_t predicted_ink = 0;  // M
    std::size_t matched = 0;        // O2O

    friend bool operator==(const PixelCounts&, const PixelCounts&) = default;
};

/// Throws ShapeError on a dimension mismatch.
PixelCounts pixel_counts(const BinaryImage& pred, const BinaryImage& truth);

/// O2O / N. Blank truth and blank prediction agree (1); a blank truth with
/// ink predicted scores 0.
double detection_rate(const PixelCounts& c) noexcept;
/// O2O / M, with the mirrored degenerate conventions.
double recognition_accuracy(const PixelCounts& c) noexcept;
/// Harmonic mean of DR and RA, 0 when both are 0.
double f1_score(const PixelCounts& c) noexcept;

/// Root mean squared intensity difference. Throws ShapeError on a dimension mismatch.
double rmse(const GrayImage& pred, const GrayImage& truth);

double mean(std::span<const double> xs);
/// Population standard deviation.
double stddev(std::span<const double> xs);

}  // namespace destrike
