#include <destrike/errors.hpp>
#include <destrike/imaging.hpp>

#include <algorithm>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace destrike {

namespace {

template <typename Px>
GrayImage to_gray(const cv::Mat& mat, double max_value) {
    GrayImage out(mat.rows, mat.cols, Polarity::display);
    const int channels = mat.channels();
    for (int r = 0; r < mat.rows; ++r) {
        const Px* row = mat.ptr<Px>(r);
        for (int c = 0; c < mat.cols; ++c) {
            const Px* px = row + static_cast<std::ptrdiff_t>(c) * channels;
            double v = 0.0;
            if (channels >= 3) {
                // OpenCV stores colour as B, G, R[, A]
                v = 0.114 * px[0] + 0.587 * px[1] + 0.299 * px[2];
            } else {
                v = px[0];
            }
            out.at(r, c) = static_cast<float>(std::clamp(v / max_value, 0.0, 1.0));
        }
    }
    return out;
}

}  // namespace

GrayImage load_png(const std::filesystem::path& path) {
    const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) throw IoError("cannot read image: " + path.string());
    switch (mat.depth()) {
        case CV_8U:
            return to_gray<std::uint8_t>(mat, 255.0);
        case CV_16U:
            return to_gray<std::uint16_t>(mat, 65535.0);
        default:
            throw IoError("unsupported pixel depth in " + path.string());
    }
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    cv::Mat mat(img.height(), img.width(), CV_8UC1);
    for (int r = 0; r < img.height(); ++r) {
        auto* row = mat.ptr<std::uint8_t>(r);
        for (int c = 0; c < img.width(); ++c) row[c] = to_byte(img.at(r, c));
    }
    if (!cv::imwrite(path.string(), mat)) throw IoError("cannot write image: " + path.string());
}

void save_mask_png(const BinaryImage& mask, const std::filesystem::path& path) {
    cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
    for (int r = 0; r < mask.height(); ++r) {
        auto* row = mat.ptr<std::uint8_t>(r);
        for (int c = 0; c < mask.width(); ++c) row[c] = mask.at(r, c) ? 255 : 0;
    }
    if (!cv::imwrite(path.string(), mat)) throw IoError("cannot write mask: " + path.string());
}

}  // namespace destrike
