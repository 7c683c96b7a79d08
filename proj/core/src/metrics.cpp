#include <destrike/metrics.hpp>

#include <destrike/errors.hpp>

#include <cmath>
#include <string>

namespace destrike {

namespace {

std::string dims(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }

}  // namespace

PixelCounts pixel_counts(const BinaryImage& pred, const BinaryImage& truth) {
    if (pred.height() != truth.height() || pred.width() != truth.width()) {
        throw ShapeError("pixel_counts: " + dims(pred.height(), pred.width()) + " vs " +
                         dims(truth.height(), truth.width()));
    }
    PixelCounts c;
    const auto p = pred.data();
    const auto t = truth.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool a = p[i] != 0;
        const bool b = t[i] != 0;
        c.predicted_ink += a;
        c.truth_ink += b;
        c.matched += a && b;
    }
    return c;
}

double detection_rate(const PixelCounts& c) noexcept {
    if (c.truth_ink == 0) return c.predicted_ink == 0 ? 1.0 : 0.0;
    return static_cast<double>(c.matched) / static_cast<double>(c.truth_ink);
}

double recognition_accuracy(const PixelCounts& c) noexcept {
    if (c.predicted_ink == 0) return c.truth_ink == 0 ? 1.0 : 0.0;
    return static_cast<double>(c.matched) / static_cast<double>(c.predicted_ink);
}

double f1_score(const PixelCounts& c) noexcept {
    const double dr = detection_rate(c);
    const double ra = recognition_accuracy(c);
    if (dr + ra == 0.0) return 0.0;
    return 2.0 * dr * ra / (dr + ra);
}

double rmse(const GrayImage& pred, const GrayImage& truth) {
    if (!pred.same_shape(truth)) {
        throw ShapeError("rmse: " + dims(pred.height(), pred.width()) + " vs " +
                         dims(truth.height(), truth.width()));
    }
    const auto a = pred.pixels();
    const auto b = truth.pixels();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double sum = 0.0;
    for (double x : xs) sum += (x - m) * (x - m);
    return std::sqrt(sum / static_cast<double>(xs.size()));
}

}  // namespace destrike
