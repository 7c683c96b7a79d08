#include <destrike/dataset.hpp>

#include <destrike/errors.hpp>

#include "json_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace destrike {

namespace fs = std::filesystem;
using detail::json;

// ---------------------------------------------------------------------------
// JSON helpers shared with the command layer

namespace detail {

json to_json(const StrokeSpec& spec) {
    json paths = json::array();
    for (const StrokePath& p : spec.paths) {
        json pts = json::array();
        for (const Point& pt : p.points) pts.push_back({pt.x, pt.y});
        paths.push_back({{"kind", p.kind == PathKind::polyline ? "polyline" : "quadratic"},
                         {"points", pts}});
    }
    return {{"image_id", spec.image_id},
            {"type", std::string(to_string(spec.type))},
            {"seed", spec.seed},
            {"brush_width", spec.brush_width},
            {"intensity", spec.intensity},
            {"paths", paths}};
}

StrokeSpec stroke_spec_from_json(const json& j) {
    StrokeSpec spec;
    try {
        spec.image_id = j.at("image_id").get<std::string>();
        const auto type = parse_stroke_type(j.at("type").get<std::string>());
        if (!type) throw FormatError("unknown stroke type " + j.at("type").dump());
        spec.type = *type;
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.brush_width = j.at("brush_width").get<double>();
        spec.intensity = j.at("intensity").get<double>();
        for (const json& p : j.at("paths")) {
            StrokePath path;
            path.kind = p.at("kind").get<std::string>() == "quadratic" ? PathKind::quadratic
                                                                        : PathKind::polyline;
            for (const json& pt : p.at("points")) {
                path.points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
            }
            spec.paths.push_back(std::move(path));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed stroke record: ") + e.what());
    }
    return spec;
}

json strokes_document(const std::vector<StrokeSpec>& specs, std::uint64_t seed) {
    json strokes = json::array();
    for (const StrokeSpec& s : specs) strokes.push_back(to_json(s));
    return {{"seed", seed}, {"strokes", strokes}};
}

std::vector<StrokeSpec> read_strokes_file(const fs::path& file) {
    const json doc = read_json_file(file);
    std::vector<StrokeSpec> out;
    if (!doc.contains("strokes")) throw FormatError("no strokes array in " + file.string());
    for (const json& s : doc.at("strokes")) out.push_back(stroke_spec_from_json(s));
    return out;
}

json read_json_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("invalid JSON in " + file.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace detail

// ---------------------------------------------------------------------------

const Split& Manifest::split(const std::string& split_name) const {
    const auto it = splits.find(split_name);
    if (it == splits.end()) throw ValidationError("manifest '" + name + "' has no split '" + split_name + "'");
    return it->second;
}

std::size_t Manifest::total_pairs() const {
    std::size_t n = 0;
    for (const auto& [_, entries] : splits) n += entries.size();
    return n;
}

bool is_valid_split_name(const std::string& name) {
    static const std::set<std::string> names = {"train",       "validation",  "test",
                                                "partition-0", "partition-1", "partition-2",
                                                "partition-3", "partition-4"};
    return names.contains(name);
}

std::string partition_name(int index) { return "partition-" + std::to_string(index); }

namespace {

std::set<std::string> png_stems(const fs::path& dir) {
    std::set<std::string> stems;
    if (!fs::is_directory(dir)) return stems;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") stems.insert(e.path().stem().string());
    }
    return stems;
}

std::string_view writer_mode_name(WriterMode m) {
    return m == WriterMode::single_writer ? "single-writer" : "multi-writer";
}

}  // namespace

Manifest build_manifest(const fs::path& root, std::optional<std::string> name, WriterMode mode) {
    Manifest m;
    m.root = root;
    m.writer_mode = mode;
    m.name = name ? *name : fs::absolute(root).lexically_normal().filename().string();
    if (m.name.empty()) m.name = fs::absolute(root).lexically_normal().parent_path().filename().string();
    if (!fs::is_directory(root)) throw IoError("dataset root is not a directory: " + root.string());

    std::vector<fs::path> split_dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory() && is_valid_split_name(e.path().filename().string())) {
            split_dirs.push_back(e.path());
        }
    }
    std::sort(split_dirs.begin(), split_dirs.end());

    for (const fs::path& dir : split_dirs) {
        const std::string split_name = dir.filename().string();
        const auto struck = png_stems(dir / "struck");
        const auto clean = png_stems(dir / "clean");
        for (const auto& id : struck) {
            if (!clean.contains(id)) {
                throw DanglingPairError(id, "struck image without clean counterpart: " + split_name + "/" + id);
            }
        }
        for (const auto& id : clean) {
            if (!struck.contains(id)) {
                throw DanglingPairError(id, "clean image without struck counterpart: " + split_name + "/" + id);
            }
        }

        std::map<std::string, StrokeType> types;
        if (fs::exists(dir / kStrokesFile)) {
            for (const StrokeSpec& s : detail::read_strokes_file(dir / kStrokesFile)) types[s.image_id] = s.type;
        }

        Split entries;
        for (const auto& id : struck) {
            PairEntry e{id, fs::path(split_name) / "struck" / (id + ".png"),
                        fs::path(split_name) / "clean" / (id + ".png"), std::nullopt};
            if (auto it = types.find(id); it != types.end()) e.stroke_type = it->second;
            entries.push_back(std::move(e));
        }
        m.splits.emplace(split_name, std::move(entries));
    }
    return m;
}

std::string serialize_manifest(const Manifest& manifest) {
    json splits = json::array();
    for (const auto& [split_name, entries] : manifest.splits) {
        json list = json::array();
        for (const PairEntry& e : entries) {
            list.push_back({{"id", e.id},
                            {"struck", e.struck_path.generic_string()},
                            {"clean", e.clean_path.generic_string()},
                            {"stroke_type", e.stroke_type ? json(std::string(to_string(*e.stroke_type)))
                                                          : json(nullptr)}});
        }
        splits.push_back({{"name", split_name}, {"entries", list}});
    }
    const json doc = {{"name", manifest.name},
                      {"writer_mode", std::string(writer_mode_name(manifest.writer_mode))},
                      {"splits", splits}};
    return doc.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text, const fs::path& root) {
    Manifest m;
    m.root = root;
    try {
        const json doc = json::parse(text);
        m.name = doc.at("name").get<std::string>();
        const auto mode = doc.at("writer_mode").get<std::string>();
        if (mode == "single-writer") {
            m.writer_mode = WriterMode::single_writer;
        } else if (mode == "multi-writer") {
            m.writer_mode = WriterMode::multi_writer;
        } else {
            throw FormatError("unknown writer_mode '" + mode + "'");
        }
        for (const json& s : doc.at("splits")) {
            const auto split_name = s.at("name").get<std::string>();
            if (!is_valid_split_name(split_name)) throw FormatError("invalid split name '" + split_name + "'");
            if (m.splits.contains(split_name)) throw FormatError("duplicate split '" + split_name + "'");
            Split entries;
            std::set<std::string> seen;
            for (const json& e : s.at("entries")) {
                PairEntry entry{e.at("id").get<std::string>(), fs::path(e.at("struck").get<std::string>()),
                                fs::path(e.at("clean").get<std::string>()), std::nullopt};
                if (!seen.insert(entry.id).second) {
                    throw FormatError("duplicate id '" + entry.id + "' in split " + split_name);
                }
                if (e.contains("stroke_type") && !e.at("stroke_type").is_null()) {
                    entry.stroke_type = parse_stroke_type(e.at("stroke_type").get<std::string>());
                    if (!entry.stroke_type) throw FormatError("unknown stroke type in entry " + entry.id);
                }
                entries.push_back(std::move(entry));
            }
            m.splits.emplace(split_name, std::move(entries));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void save_manifest(const Manifest& manifest, const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << serialize_manifest(manifest);
}

Manifest load_manifest(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str(), file.parent_path());
}

Split aggregate_partitions(const Manifest& manifest, const std::vector<std::string>& parts) {
    Split out;
    for (const auto& part : parts) {
        if (!manifest.has_split(part)) {
            throw ValidationError("unknown partition '" + part + "' in manifest '" + manifest.name + "'");
        }
    }
    for (const auto& part : parts) {
        for (PairEntry e : manifest.split(part)) {
            if (parts.size() > 1) e.id += "@" + part;
            out.push_back(std::move(e));
        }
    }
    return out;
}

ImagePair load_pair(const PairEntry& entry, const fs::path& root) {
    GrayImage struck = load_png(root / entry.struck_path);
    GrayImage clean = load_png(root / entry.clean_path);
    if (!struck.same_shape(clean)) {
        throw ShapeError("pair '" + entry.id + "' has mismatched dimensions");
    }
    Preprocessed s = preprocess(invert(struck));
    Preprocessed c = preprocess(invert(clean));
    return {entry.id,  std::move(s.image),   std::move(c.image), s.meta,
            std::move(clean), std::move(struck), entry.stroke_type};
}

std::vector<ImagePair> load_pairs(const Split& entries, const fs::path& root,
                                  std::optional<std::uint64_t> shuffle_seed) {
    std::vector<ImagePair> out;
    out.reserve(entries.size());
    for (const PairEntry& e : entries) out.push_back(load_pair(e, root));
    if (shuffle_seed) shuffle_in_place(out, *shuffle_seed);
    return out;
}

std::vector<ImagePair> load_pairs(const Manifest& manifest, const std::string& split,
                                  std::optional<std::uint64_t> shuffle_seed) {
    return load_pairs(manifest.split(split), manifest.root, shuffle_seed);
}

// ---------------------------------------------------------------------------

bool CountReport::all_match() const {
    return known_dataset &&
           std::all_of(checks.begin(), checks.end(), [](const CountCheck& c) { return c.matches(); });
}

std::string CountReport::to_string() const {
    if (!known_dataset) return "no reference counts\n";
    std::ostringstream out;
    out << "reference: " << reference << '\n';
    for (const CountCheck& c : checks) {
        out << "  " << c.split << ": expected " << c.expected << ", found " << c.actual
            << (c.matches() ? "  ok" : "  MISMATCH") << '\n';
    }
    return out.str();
}

CountReport validate_counts(const Manifest& manifest) {
    std::string key;
    for (char ch : manifest.name) {
        if (std::isalnum(static_cast<unsigned char>(ch))) key += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }

    std::vector<std::pair<std::string, std::size_t>> expected;
    CountReport report;
    if (key == "iam" || key == "iamstrikethrough" || key == "iamsynth") {
        report.reference = "IAM strikethrough";
        expected = {{"train", 3066}, {"validation", 273}, {"test", 819}};
    } else if (key == "draculareal") {
        report.reference = "Dracula real";
        expected = {{"train", 126}, {"validation", 126}, {"test", 378}};
    } else if (key == "draculasynth") {
        report.reference = "Dracula synthetic";
        for (int k = 0; k < 5; ++k) expected.emplace_back(partition_name(k), 126);
    } else {
        return report;
    }
    report.known_dataset = true;
    for (const auto& [split_name, count] : expected) {
        const std::size_t actual = manifest.has_split(split_name) ? manifest.split(split_name).size() : 0;
        report.checks.push_back({split_name, count, actual});
    }
    return report;
}

}  // namespace destrike
