#include <destrike/strokegen.hpp>

#include <destrike/errors.hpp>
#include <destrike/imaging.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace destrike {

namespace {

constexpr std::array<std::string_view, 7> kStrokeNames = {
    "single", "double", "diagonal", "cross", "zigzag", "wave", "scratch"};

constexpr double kTiltJitterDeg = 3.0;
constexpr double kVertexJitter = 0.2;
constexpr double kDiagonalJitter = 0.05;

struct RowRange {
    double lo;
    double hi;
    double clamp(double y) const { return std::clamp(y, lo, hi); }
};

// Five-vertex polyline across the bbox width through centre_y, with a random
// tilt and per-vertex vertical jitter.
StrokePath single_path(const InkGeometry& g, double centre_y, RowRange rows, Rng& rng) {
    const double tilt = std::tan(rng.uniform(-kTiltJitterDeg, kTiltJitterDeg) *
                                 std::numbers::pi / 180.0);
    const double width = g.bbox_width();
    const double centre_x = g.left + 0.5 * width;
    const double jitter = kVertexJitter * std::max(1.0, g.band_height());

    StrokePath path{PathKind::polyline, {}};
    for (int i = 0; i <= 4; ++i) {
        const double x = g.left + width * i / 4.0;
        const double y = centre_y + tilt * (x - centre_x) + rng.uniform(-jitter, jitter);
        path.points.push_back({x, rows.clamp(y)});
    }
    return path;
}

StrokePath diagonal_path(const InkGeometry& g, bool falling, Rng& rng) {
    const double jx = kDiagonalJitter * g.bbox_width();
    const double jy = kDiagonalJitter * g.bbox_height();
    const double y0 = falling ? g.top : g.bottom;
    const double y1 = falling ? g.bottom : g.top;
    auto jittered = [&](double x, double y) {
        return Point{std::clamp(x + rng.uniform(-jx, jx), static_cast<double>(g.left),
                                static_cast<double>(g.right)),
                     std::clamp(y + rng.uniform(-jy, jy), static_cast<double>(g.top),
                                static_cast<double>(g.bottom))};
    };
    StrokePath path{PathKind::polyline, {}};
    path.points.push_back(jittered(g.left, y0));
    path.points.push_back(jittered(g.right, y1));
    return path;
}

std::vector<Point> zigzag_vertices(const InkGeometry& g, RowRange band, Rng& rng) {
    const auto periods = rng.uniform_int(3, 6);
    const double amplitude = rng.uniform(0.5, 1.0) * std::max(1.0, g.band_height());
    const double sign = rng.coin() ? 1.0 : -1.0;
    const auto n = 2 * periods;
    std::vector<Point> vertices;
    for (std::int64_t k = 0; k <= n; ++k) {
        const double x = g.left + g.bbox_width() * static_cast<double>(k) / static_cast<double>(n);
        const double offset = (k % 2 == 0 ? -0.5 : 0.5) * sign * amplitude;
        vertices.push_back({x, band.clamp(g.band_mid() + offset)});
    }
    return vertices;
}

Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

// The zigzag's interior vertices become Bezier controls; on-curve points sit
// halfway between consecutive vertices, so the wave passes smoothly through.
StrokePath wave_from(const std::vector<Point>& v) {
    StrokePath path{PathKind::quadratic, {v.front()}};
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        path.points.push_back(v[i]);
        path.points.push_back(i + 2 < v.size() ? midpoint(v[i], v[i + 1]) : v.back());
    }
    return path;
}

double segment_distance(Point p, Point a, Point b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    const double ex = p.x - (a.x + t * dx);
    const double ey = p.y - (a.y + t * dy);
    return std::sqrt(ex * ex + ey * ey);
}

}  // namespace

std::string_view to_string(StrokeType type) noexcept {
    return kStrokeNames[static_cast<std::size_t>(type)];
}

std::optional<StrokeType> parse_stroke_type(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kStrokeNames.size(); ++i) {
        if (kStrokeNames[i] == name) return kStrokeTypes[i];
    }
    return std::nullopt;
}

InkGeometry estimate_ink_geometry(const GrayImage& clean) {
    const BinaryImage ink = otsu_binarize(invert(clean));
    const std::size_t total = ink.count();
    if (total == 0) throw NoInkError("no ink found in clean image");

    InkGeometry g;
    g.top = clean.height();
    g.left = clean.width();
    g.bottom = -1;
    g.right = -1;
    std::vector<std::size_t> row_mass(static_cast<std::size_t>(clean.height()), 0);
    std::vector<float> ink_values;
    ink_values.reserve(total);
    for (int r = 0; r < clean.height(); ++r) {
        for (int c = 0; c < clean.width(); ++c) {
            if (!ink.at(r, c)) continue;
            g.top = std::min(g.top, r);
            g.bottom = std::max(g.bottom, r);
            g.left = std::min(g.left, c);
            g.right = std::max(g.right, c);
            ++row_mass[static_cast<std::size_t>(r)];
            ink_values.push_back(clean.at(r, c));
        }
    }

    std::size_t cumulative = 0;
    g.band_lo = -1;
    g.band_hi = -1;
    for (int r = g.top; r <= g.bottom; ++r) {
        cumulative += row_mass[static_cast<std::size_t>(r)];
        if (g.band_lo < 0 && 4 * cumulative >= total) g.band_lo = r;
        if (g.band_hi < 0 && 4 * cumulative >= 3 * total) g.band_hi = r;
    }
    if (g.band_hi <= g.band_lo) {
        if (g.band_lo < g.bottom) {
            g.band_hi = g.band_lo + 1;
        } else {
            g.band_lo = std::max(0, g.band_hi - 1);
        }
        // single-row ink: the band may reach one row outside the bbox
        if (g.band_hi <= g.band_lo) g.band_hi = g.band_lo + 1;
    }

    std::vector<int> runs;
    for (int c = g.left; c <= g.right; ++c) {
        int run = 0;
        for (int r = g.top; r <= g.bottom + 1; ++r) {
            if (r <= g.bottom && ink.at(r, c)) {
                ++run;
            } else if (run > 0) {
                runs.push_back(run);
                run = 0;
            }
        }
    }
    std::sort(runs.begin(), runs.end());
    g.pen_width = std::max(1.0, static_cast<double>(runs[(runs.size() - 1) / 2]));

    std::sort(ink_values.begin(), ink_values.end());
    g.ink_level = ink_values[static_cast<std::size_t>(0.95 * static_cast<double>(ink_values.size() - 1))];
    return g;
}

StrokeSpec sample_stroke(StrokeType type, const InkGeometry& geom, Rng& rng) {
    StrokeSpec spec;
    spec.type = type;
    spec.brush_width = std::max(1.0, geom.pen_width * rng.uniform(0.75, 1.25));
    spec.intensity = std::clamp(rng.uniform(0.85, 1.0) * geom.ink_level, 0.0, 1.0);

    const RowRange band{static_cast<double>(geom.band_lo), static_cast<double>(geom.band_hi)};
    const RowRange bbox_rows{static_cast<double>(geom.top), static_cast<double>(geom.bottom)};
    const double band_h = std::max(1.0, geom.band_height());

    switch (type) {
        case StrokeType::single:
            spec.paths.push_back(single_path(geom, geom.band_mid(), band, rng));
            break;
        case StrokeType::doubled: {
            const double offset = rng.uniform(0.6, 1.0) * band_h;
            spec.paths.push_back(single_path(geom, geom.band_mid() - 0.5 * offset, band, rng));
            spec.paths.push_back(single_path(geom, geom.band_mid() + 0.5 * offset, band, rng));
            break;
        }
        case StrokeType::diagonal:
            spec.paths.push_back(diagonal_path(geom, rng.coin(), rng));
            break;
        case StrokeType::cross: {
            const bool first_falling = rng.coin();
            spec.paths.push_back(diagonal_path(geom, first_falling, rng));
            spec.paths.push_back(diagonal_path(geom, !first_falling, rng));
            break;
        }
        case StrokeType::zigzag:
            spec.paths.push_back({PathKind::polyline, zigzag_vertices(geom, band, rng)});
            break;
        case StrokeType::wave:
            spec.paths.push_back(wave_from(zigzag_vertices(geom, band, rng)));
            break;
        case StrokeType::scratch: {
            const auto count = rng.uniform_int(3, 7);
            for (std::int64_t i = 0; i < count; ++i) {
                const double centre = geom.band_mid() + rng.uniform(-0.5, 0.5) * band_h;
                spec.paths.push_back(single_path(geom, centre, bbox_rows, rng));
            }
            break;
        }
    }
    return spec;
}

std::vector<Point> flatten(const StrokePath& path) {
    if (path.kind == PathKind::polyline || path.points.size() < 3) return path.points;
    std::vector<Point> out{path.points.front()};
    for (std::size_t i = 0; i + 2 < path.points.size(); i += 2) {
        const Point p0 = path.points[i];
        const Point c = path.points[i + 1];
        const Point p1 = path.points[i + 2];
        const double hull = std::hypot(c.x - p0.x, c.y - p0.y) + std::hypot(p1.x - c.x, p1.y - c.y);
        const int steps = std::max(8, static_cast<int>(std::ceil(hull)));
        for (int s = 1; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const double u = 1.0 - t;
            out.push_back({u * u * p0.x + 2 * u * t * c.x + t * t * p1.x,
                           u * u * p0.y + 2 * u * t * c.y + t * t * p1.y});
        }
    }
    return out;
}

StrokeLayer render_stroke(const StrokeSpec& spec, int height, int width) {
    const double radius = 0.5 * spec.brush_width;
    const double reach = radius + 0.5;
    std::vector<double> dist(static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
                             std::numeric_limits<double>::infinity());

    for (const StrokePath& path : spec.paths) {
        std::vector<Point> pts = flatten(path);
        if (pts.size() == 1) pts.push_back(pts.front());
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const Point a = pts[i];
            const Point b = pts[i + 1];
            const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
            const int r1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)));
            const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
            const int c1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)));
            for (int r = r0; r <= r1; ++r) {
                for (int c = c0; c <= c1; ++c) {
                    double& d = dist[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                                     static_cast<std::size_t>(c)];
                    d = std::min(d, segment_distance({static_cast<double>(c), static_cast<double>(r)}, a, b));
                }
            }
        }
    }

    StrokeLayer out{GrayImage(height, width, Polarity::inverted, 0.0f), BinaryImage(height, width)};
    auto px = out.layer.pixels();
    auto mask = out.mask.data();
    for (std::size_t i = 0; i < dist.size(); ++i) {
        // Pixels whose centre lies inside the brush; the edge ramp stays within them.
        if (dist[i] > radius) continue;
        const double coverage = std::clamp(reach - dist[i], 0.0, 1.0);
        px[i] = static_cast<float>(spec.intensity * coverage);
        mask[i] = 1;
    }
    return out;
}

StruckImage apply_strikethrough(const GrayImage& clean, StrokeType type, std::uint64_t seed) {
    const InkGeometry geom = estimate_ink_geometry(clean);
    Rng rng(seed);
    StruckImage out;
    out.spec = sample_stroke(type, geom, rng);
    out.spec.seed = seed;
    StrokeLayer stroke = render_stroke(out.spec, clean.height(), clean.width());
    out.struck = clean;
    out.struck.set_polarity(Polarity::inverted);
    auto dst = out.struck.pixels();
    auto src = stroke.layer.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
    out.mask = std::move(stroke.mask);
    return out;
}

std::vector<SyntheticPair> generate_partition(const std::vector<CleanWord>& clean_set,
                                              std::uint64_t global_seed) {
    std::vector<SyntheticPair> out;
    out.reserve(clean_set.size());
    for (const CleanWord& word : clean_set) {
        Rng rng(derive_seed(global_seed, word.id));
        const auto type = kStrokeTypes[static_cast<std::size_t>(rng.uniform_int(0, 6))];
        const std::uint64_t stroke_seed = rng.next();
        StruckImage struck = apply_strikethrough(word.image, type, stroke_seed);
        struck.spec.image_id = word.id;
        out.push_back({word.id, std::move(struck.struck), word.image, std::move(struck.mask),
                       std::move(struck.spec)});
    }
    return out;
}

}  // namespace destrike
