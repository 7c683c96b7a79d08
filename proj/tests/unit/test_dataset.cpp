#include "doctest.h"
#include "fixtures.hpp"

#include <destrike/dataset.hpp>
#include <destrike/errors.hpp>
#include <destrike/imaging.hpp>

#include <fstream>
#include <set>

using namespace destrike;
using namespace destrike::testing;
namespace fs = std::filesystem;

namespace {

void write_pair(const fs::path& root, const std::string& split, const std::string& id, int h = 6, int w = 10) {
    fs::create_directories(root / split / "struck");
    fs::create_directories(root / split / "clean");
    GrayImage clean(h, w, Polarity::display, 1.0f);
    clean.at(h / 2, w / 2) = 0.1f;
    GrayImage struck = clean;
    for (int c = 0; c < w; ++c) struck.at(h / 2, c) = 0.2f;
    save_png(struck, root / split / "struck" / (id + ".png"));
    save_png(clean, root / split / "clean" / (id + ".png"));
}

std::string id_of(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "img%03d", i);
    return buf;
}

void write_split(const fs::path& root, const std::string& split, int count) {
    for (int i = 0; i < count; ++i) write_pair(root, split, id_of(i));
}

}  // namespace

TEST_CASE("split names") {
    for (const char* ok : {"train", "validation", "test", "partition-0", "partition-4"}) CHECK(is_valid_split_name(ok));
    for (const char* bad : {"partition-5", "val", "", "Train"}) CHECK_FALSE(is_valid_split_name(bad));
    CHECK(partition_name(3) == "partition-3");
}

TEST_CASE("manifest of a five-partition synthetic root") {
    TempDir dir;
    for (int k = 0; k < 5; ++k) write_split(dir.path(), partition_name(k), 126);
    const Manifest m = build_manifest(dir.path(), "DraculaSynth");
    CHECK(m.splits.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(m.split(partition_name(k)).size() == 126);
    CHECK(m.total_pairs() == 630);
    const Split& p0 = m.split("partition-0");
    CHECK(std::is_sorted(p0.begin(), p0.end(), [](const PairEntry& a, const PairEntry& b) { return a.id < b.id; }));
    CHECK(validate_counts(m).all_match());

    SUBCASE("aggregating all partitions gives 630 entries") {
        std::vector<std::string> parts;
        for (int k = 0; k < 5; ++k) parts.push_back(partition_name(k));
        const Split all = aggregate_partitions(m, parts);
        CHECK(all.size() == 630);
        std::set<std::string> ids;
        for (const PairEntry& e : all) ids.insert(e.id);
        CHECK(ids.size() == 630);  // colliding ids were suffixed
    }
    SUBCASE("a single partition is returned unchanged") {
        CHECK(aggregate_partitions(m, {"partition-2"}) == m.split("partition-2"));
    }
    SUBCASE("aggregation sizes add up for every subset") {
        for (int mask = 1; mask < 32; ++mask) {
            std::vector<std::string> parts;
            for (int k = 0; k < 5; ++k) {
                if (mask & (1 << k)) parts.push_back(partition_name(k));
            }
            CHECK(aggregate_partitions(m, parts).size() == 126 * parts.size());
        }
    }
    SUBCASE("unknown partition") {
        CHECK_THROWS_AS(aggregate_partitions(m, {"partition-0", "partition-9"}), ValidationError);
    }
}

TEST_CASE("empty directory gives an empty manifest") {
    TempDir dir;
    const Manifest m = build_manifest(dir.path());
    CHECK(m.splits.empty());
    CHECK(m.total_pairs() == 0);
}

TEST_CASE("struck image without its clean mate") {
    TempDir dir;
    write_split(dir.path(), "train", 3);
    fs::remove(dir / "train/clean/img001.png");
    try {
        build_manifest(dir.path());
        FAIL("expected a dangling pair error");
    } catch (const DanglingPairError& e) {
        CHECK(e.id() == "img001");
        CHECK(std::string(e.what()).find("img001") != std::string::npos);
    }
}

TEST_CASE("manifest serialization round trip") {
    TempDir dir;
    write_split(dir.path(), "train", 4);
    write_split(dir.path(), "test", 2);
    Manifest m = build_manifest(dir.path(), "toy", WriterMode::multi_writer);
    m.splits["train"][1].stroke_type = StrokeType::zigzag;
    const Manifest back = parse_manifest(serialize_manifest(m), m.root);
    CHECK(back == m);

    save_manifest(m, dir / "manifest.json");
    const Manifest loaded = load_manifest(dir / "manifest.json");
    CHECK(loaded.splits == m.splits);
    CHECK(loaded.name == "toy");
    CHECK(loaded.writer_mode == WriterMode::multi_writer);
}

TEST_CASE("loading pairs") {
    TempDir dir;
    write_split(dir.path(), "validation", 126);
    const Manifest m = build_manifest(dir.path(), "DraculaReal");
    const auto pairs = load_pairs(m, "validation");
    CHECK(pairs.size() == 126);
    for (const ImagePair& p : pairs) {
        REQUIRE(p.struck.height() == 128);
        REQUIRE(p.struck.width() == 512);
        REQUIRE(p.clean.height() == 128);
        REQUIRE(p.clean.width() == 512);
        REQUIRE(p.struck.polarity() == Polarity::inverted);
        REQUIRE(p.clean_original.height() == 6);
        REQUIRE(p.clean_original.width() == 10);
    }

    const auto a = load_pairs(m, "validation", 9);
    const auto b = load_pairs(m, "validation", 9);
    const auto c = load_pairs(m, "validation", 10);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].id == b[i].id && a[i].struck == b[i].struck;
        differs = differs || a[i].id != c[i].id;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("unreadable image names its path") {
    TempDir dir;
    write_split(dir.path(), "test", 2);
    const Manifest m = build_manifest(dir.path());
    {
        std::ofstream out(dir / "test/struck/img000.png", std::ios::trunc);
        out << "not a png";
    }
    try {
        load_pairs(m, "test");
        FAIL("expected an I/O error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("img000.png") != std::string::npos);
    }
}

TEST_CASE("published split counts") {
    Manifest iam;
    iam.name = "IAM-strikethrough";
    iam.splits["train"].resize(3066);
    iam.splits["validation"].resize(273);
    iam.splits["test"].resize(819);
    CHECK(validate_counts(iam).all_match());
    iam.splits["test"].resize(818);
    const CountReport bad = validate_counts(iam);
    CHECK(bad.known_dataset);
    CHECK_FALSE(bad.all_match());
    CHECK(bad.to_string().find("MISMATCH") != std::string::npos);

    Manifest real;
    real.name = "DraculaReal";
    real.splits["train"].resize(126);
    real.splits["validation"].resize(126);
    real.splits["test"].resize(378);
    const CountReport ok = validate_counts(real);
    CHECK(ok.all_match());
    REQUIRE(ok.checks.size() == 3);
    CHECK(ok.checks[2].expected == 378);

    Manifest other;
    other.name = "my-words";
    const CountReport none = validate_counts(other);
    CHECK_FALSE(none.known_dataset);
    CHECK(none.to_string() == "no reference counts\n");
}

TEST_CASE("stroke types are read from strokes.json") {
    TempDir dir;
    const Manifest m = load_manifest(make_word_dataset(dir.path(), 6, 1, 3));
    const Split& split = m.split("partition-0");
    REQUIRE(split.size() == 6);
    for (const PairEntry& e : split) CHECK(e.stroke_type.has_value());
}
