#include "doctest.h"
#include "fixtures.hpp"

#include <destrike/errors.hpp>
#include <destrike/imaging.hpp>
#include <destrike/strokegen.hpp>
#include <destrike/word_corpus.hpp>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <map>

using namespace destrike;
using namespace destrike::testing;

namespace {

GrayImage rectangle_word(int height, int width, int top, int left, int rows, int cols, float ink = 0.9f) {
    GrayImage img(height, width, Polarity::inverted, 0.0f);
    for (int r = top; r < top + rows; ++r) {
        for (int c = left; c < left + cols; ++c) img.at(r, c) = ink;
    }
    return img;
}

std::vector<GrayImage> sample_words(std::size_t count) {
    std::vector<GrayImage> out;
    for (const RenderedWord& w : render_word_corpus(0, count, 99)) out.push_back(invert(w.image));
    return out;
}

}  // namespace

TEST_CASE("stroke type names") {
    CHECK(kStrokeTypes.size() == 7);
    for (StrokeType t : kStrokeTypes) CHECK(parse_stroke_type(to_string(t)) == t);
    CHECK_FALSE(parse_stroke_type("triple").has_value());
}

TEST_CASE("ink geometry of a filled rectangle") {
    const GrayImage img = rectangle_word(60, 100, 20, 30, 10, 40);
    const InkGeometry g = estimate_ink_geometry(img);
    CHECK(g.top == 20);
    CHECK(g.bottom == 29);
    CHECK(g.left == 30);
    CHECK(g.right == 69);
    CHECK(g.band_lo > g.top);
    CHECK(g.band_hi < g.bottom);
    CHECK(g.band_lo < g.band_hi);
    CHECK(g.pen_width == 10.0);
    CHECK(g.ink_level == doctest::Approx(0.9));
}

TEST_CASE("blank image has no ink") {
    CHECK_THROWS_AS(estimate_ink_geometry(GrayImage(20, 30, Polarity::inverted, 0.0f)), NoInkError);
    CHECK_THROWS_AS(apply_strikethrough(GrayImage(20, 30, Polarity::inverted, 0.0f), StrokeType::single, 1),
                    NoInkError);
}

TEST_CASE("core band lies within the x-height of rendered words") {
    // The x-height reference comes from rendering the glyph "x" at the same
    // baseline, which marks the rows a hand annotation would.
    const int face = cv::FONT_HERSHEY_SCRIPT_SIMPLEX | cv::FONT_ITALIC;
    const double scale = 1.5;
    const int thickness = 2;
    for (const char* word : {"summer", "reason", "common", "answer", "uneven"}) {
        cv::Mat canvas(100, 320, CV_8UC1, cv::Scalar(255));
        const cv::Point origin(10, 65);
        cv::putText(canvas, word, origin, face, scale, cv::Scalar(20), thickness, cv::LINE_AA);
        cv::Mat xglyph(100, 320, CV_8UC1, cv::Scalar(255));
        cv::putText(xglyph, "x", origin, face, scale, cv::Scalar(20), thickness, cv::LINE_AA);
        int x_top = 100, x_bottom = -1;
        for (int r = 0; r < 100; ++r) {
            for (int c = 0; c < 320; ++c) {
                if (xglyph.at<std::uint8_t>(r, c) < 128) {
                    x_top = std::min(x_top, r);
                    x_bottom = std::max(x_bottom, r);
                }
            }
        }
        GrayImage img(100, 320, Polarity::inverted);
        for (int r = 0; r < 100; ++r) {
            for (int c = 0; c < 320; ++c) img.at(r, c) = 1.0f - canvas.at<std::uint8_t>(r, c) / 255.0f;
        }
        const InkGeometry g = estimate_ink_geometry(img);
        CAPTURE(word);
        CHECK(g.band_lo >= x_top - 3);
        CHECK(g.band_hi <= x_bottom + 3);
        CHECK(g.band_hi - g.band_lo >= (x_bottom - x_top) / 3);
    }
}

TEST_CASE("single strokes stay inside the core band") {
    for (const GrayImage& img : sample_words(12)) {
        const InkGeometry g = estimate_ink_geometry(img);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Rng rng(seed);
            const StrokeSpec s = sample_stroke(StrokeType::single, g, rng);
            REQUIRE(s.paths.size() == 1);
            CHECK(s.paths[0].points.size() >= 2);
            for (const Point& p : s.paths[0].points) {
                CHECK(p.y >= g.band_lo);
                CHECK(p.y <= g.band_hi);
            }
            const auto& pts = s.paths[0].points;
            const double slope = std::abs(pts.back().y - pts.front().y) / (pts.back().x - pts.front().x);
            CHECK(slope < 0.3);
        }
    }
}

TEST_CASE("cross strokes have opposite slopes and span the word") {
    for (const GrayImage& img : sample_words(8)) {
        const InkGeometry g = estimate_ink_geometry(img);
        Rng rng(4);
        const StrokeSpec s = sample_stroke(StrokeType::cross, g, rng);
        REQUIRE(s.paths.size() == 2);
        double slopes[2];
        for (int i = 0; i < 2; ++i) {
            const auto& pts = s.paths[static_cast<std::size_t>(i)].points;
            slopes[i] = (pts.back().y - pts.front().y) / (pts.back().x - pts.front().x);
            CHECK(std::abs(pts.back().x - pts.front().x) >= 0.8 * g.bbox_width());
        }
        CHECK(slopes[0] * slopes[1] < 0);
    }
}

TEST_CASE("sampling is deterministic") {
    const InkGeometry g = estimate_ink_geometry(sample_words(1)[0]);
    for (StrokeType t : kStrokeTypes) {
        Rng a(17), b(17);
        CHECK(sample_stroke(t, g, a) == sample_stroke(t, g, b));
    }
}

TEST_CASE("placement and coverage hold for every type") {
    const auto words = sample_words(10);
    for (const GrayImage& img : words) {
        const InkGeometry g = estimate_ink_geometry(img);
        for (StrokeType t : kStrokeTypes) {
            for (std::uint64_t seed = 0; seed < 4; ++seed) {
                CAPTURE(to_string(t));
                const StruckImage s = apply_strikethrough(img, t, seed * 7919 + 1);
                CHECK(s.spec.brush_width >= 1.0);
                for (const StrokePath& p : s.spec.paths) {
                    CHECK(p.points.size() >= 2);
                    for (const Point& q : flatten(p)) {
                        if (t == StrokeType::diagonal || t == StrokeType::cross) {
                            CHECK(q.y >= g.top - 1e-9);
                            CHECK(q.y <= g.bottom + 1e-9);
                        } else if (t != StrokeType::scratch) {
                            CHECK(q.y >= g.band_lo - 1e-9);
                            CHECK(q.y <= g.band_hi + 1e-9);
                        }
                    }
                }
                int lo = img.width(), hi = -1;
                for (int r = 0; r < img.height(); ++r) {
                    for (int c = 0; c < img.width(); ++c) {
                        if (s.mask.at(r, c)) {
                            lo = std::min(lo, c);
                            hi = std::max(hi, c);
                        }
                    }
                }
                CHECK(hi - lo >= 0.8 * g.bbox_width());
            }
        }
    }
}

TEST_CASE("horizontal stroke renders as a bar of the brush width") {
    StrokeSpec spec;
    spec.paths = {{PathKind::polyline, {{10, 20}, {90, 20}}}};
    spec.brush_width = 3;
    spec.intensity = 0.9;
    const StrokeLayer layer = render_stroke(spec, 40, 100);
    for (int c = 15; c <= 85; ++c) {
        int thick = 0;
        for (int r = 0; r < 40; ++r) thick += layer.mask.at(r, c);
        CHECK(thick >= 2);
        CHECK(thick <= 4);
        CHECK(layer.mask.at(20, c));
    }
    for (int r = 0; r < 40; ++r) {
        for (int c = 0; c < 100; ++c) {
            if (std::abs(r - 20) > 4 || c < 4 || c > 96) REQUIRE(layer.layer.at(r, c) == 0.0f);
        }
    }
}

TEST_CASE("mask area approximates path length times brush width") {
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        StrokeSpec spec;
        const Point a{rng.uniform(20, 60), rng.uniform(20, 100)};
        const Point b{rng.uniform(200, 280), rng.uniform(20, 100)};
        spec.paths = {{PathKind::polyline, {a, b}}};
        spec.brush_width = rng.uniform(2, 9);
        const StrokeLayer layer = render_stroke(spec, 120, 300);
        const double expected = std::hypot(b.x - a.x, b.y - a.y) * spec.brush_width;
        const auto count = static_cast<double>(layer.mask.count());
        CHECK(std::abs(count - expected) <= 0.25 * expected);
    }
}

TEST_CASE("compositing is a pixelwise max local to the mask") {
    for (const GrayImage& clean : sample_words(6)) {
        for (StrokeType t : kStrokeTypes) {
            const StruckImage s = apply_strikethrough(clean, t, 5);
            REQUIRE(s.struck.same_shape(clean));
            for (int r = 0; r < clean.height(); ++r) {
                for (int c = 0; c < clean.width(); ++c) {
                    REQUIRE(s.struck.at(r, c) >= clean.at(r, c));
                    if (!s.mask.at(r, c)) REQUIRE(s.struck.at(r, c) == clean.at(r, c));
                }
            }
            CHECK(apply_strikethrough(clean, t, 5).struck == s.struck);
        }
    }
}

TEST_CASE("stroke intensity follows the writer's ink") {
    const GrayImage clean = sample_words(1)[0];
    const InkGeometry g = estimate_ink_geometry(clean);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const StrokeSpec s = sample_stroke(StrokeType::wave, g, rng);
        CHECK(s.intensity >= 0.85 * g.ink_level - 1e-12);
        CHECK(s.intensity <= g.ink_level + 1e-12);
        CHECK(s.brush_width >= std::max(1.0, 0.75 * g.pen_width) - 1e-12);
        CHECK(s.brush_width <= 1.25 * g.pen_width + 1e-12);
    }
}

TEST_CASE("partitions are pure functions of corpus and seed") {
    std::vector<CleanWord> words;
    for (const RenderedWord& w : render_word_corpus(0, 20, 1)) words.push_back({w.id, invert(w.image)});
    const auto a = generate_partition(words, 42);
    const auto b = generate_partition(words, 42);
    const auto c = generate_partition(words, 43);
    REQUIRE(a.size() == 20);
    int differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == words[i].id);
        CHECK(a[i].struck == b[i].struck);
        CHECK(a[i].spec == b[i].spec);
        CHECK(a[i].clean == words[i].image);
        differ += !(a[i].spec == c[i].spec);
    }
    CHECK(differ >= 1);

    std::vector<CleanWord> reversed(words.rbegin(), words.rend());
    const auto r = generate_partition(reversed, 42);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i].spec == a[a.size() - 1 - i].spec);
}

TEST_CASE("stroke types are drawn uniformly") {
    const GrayImage word = rectangle_word(24, 64, 8, 6, 8, 52);
    std::vector<CleanWord> words;
    for (int i = 0; i < 2100; ++i) words.push_back({"img" + std::to_string(i), word});
    std::map<StrokeType, int> counts;
    for (const SyntheticPair& p : generate_partition(words, 5)) ++counts[p.spec.type];
    // expected 300 each; 5 sigma is about 80
    for (StrokeType t : kStrokeTypes) {
        CAPTURE(to_string(t));
        CHECK(counts[t] > 220);
        CHECK(counts[t] < 380);
    }
}
