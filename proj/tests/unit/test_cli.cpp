#include "doctest.h"
#include "fixtures.hpp"

#include <destrike/commands.hpp>
#include <destrike/config.hpp>
#include <destrike/errors.hpp>
#include <destrike/fetch.hpp>
#include <destrike/imaging.hpp>
#include <destrike/report.hpp>
#include <destrike/word_corpus.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace destrike;
using namespace destrike::testing;
namespace fs = std::filesystem;

namespace {

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string file_bytes(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One small dataset shared by the train/evaluate tests: 2 partitions plus
// held-out validation and test splits.
struct SharedDataset {
    TempDir dir{"cli-data"};
    fs::path manifest = make_word_dataset(dir.path(), 8, 2, 31, 32, 200, 3);
};

const SharedDataset& shared() {
    static const SharedDataset data;
    return data;
}

TrainOptions train_options(const fs::path& config, bool force = false) {
    TrainOptions o;
    o.config = config;
    o.force = force;
    return o;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    fs::create_directories(dir);
    const fs::path file = dir / "exp.conf";
    std::ofstream(file) << "dataset = " << shared().manifest.string() << "\n" << body;
    return file;
}

}  // namespace

TEST_CASE("experiment config parsing") {
    const std::string text =
        "# sweep\n"
        "name = sweep\n"
        "dataset = data\n"
        "train_splits = partition-0, partition-1\n"
        "archs = simple_cnn, unet  # two\n"
        "epochs = 3\n"
        "learning_rate = 0.0005\n"
        "repetitions = 2\n"
        "run_seed = 9\n"
        "train_limit = 10\n";
    const ExperimentConfig c = parse_experiment_config(text, "/base");
    CHECK(c.name == "sweep");
    CHECK(c.dataset == fs::path("/base/data"));
    CHECK(c.train_splits == std::vector<std::string>{"partition-0", "partition-1"});
    CHECK(c.archs == std::vector<ArchName>{ArchName::simple_cnn, ArchName::unet});
    CHECK(c.epochs == 3);
    CHECK(c.adam.learning_rate == doctest::Approx(0.0005));
    CHECK(c.repetitions == 2);
    CHECK(c.run_seed == 9);
    CHECK(c.train_limit == 10);
    CHECK(c.batch_size == 4);
    CHECK(c.output_dir == fs::path("/base/runs"));

    SUBCASE("serialization round trip") {
        CHECK(parse_experiment_config(serialize_experiment_config(c), "/elsewhere") == c);
    }
}

TEST_CASE("config errors are reported together") {
    const std::string msg = error_of([] {
        parse_experiment_config("colour = red\nepochs = -2\narchs = resnet\nbeta1 = 1.5\nnot a line\n", "/b");
    });
    CHECK(contains(msg, "colour"));
    CHECK(contains(msg, "epochs"));
    CHECK(contains(msg, "resnet"));
    CHECK(contains(msg, "beta1"));
    CHECK(contains(msg, "dataset"));
    CHECK(contains(msg, "line 5: expected"));

    CHECK(contains(error_of([] { parse_experiment_config("dataset = a\nepochs = 2\nepochs = 3\n", "/b"); }),
                   "epochs"));
}

TEST_CASE("desk profile") {
    ExperimentConfig c = parse_experiment_config("dataset = d\narchs = unet, generator\nrepetitions = 30\n", "/b");
    apply_profile(c, "desk");
    CHECK(c.archs == std::vector<ArchName>{ArchName::shallow});
    CHECK(c.repetitions == 1);
    CHECK(c.train_limit > 0);
    CHECK(c.train_limit <= 640);
    CHECK(c.validation_limit > 0);
    CHECK_THROWS_AS(apply_profile(c, "cluster"), ValidationError);

    const ExperimentConfig p = parse_experiment_config("dataset = d\nprofile = desk\n", "/b");
    CHECK(p.profile == std::optional<std::string>("desk"));
    CHECK(p.archs == std::vector<ArchName>{ArchName::shallow});
}

TEST_CASE("resolving splits") {
    TempDir dir("cli-resolve");
    ExperimentConfig c = load_experiment_config(write_config(dir.path(), "train_splits = partitions\n"));
    resolve_experiment_config(c);
    CHECK(c.train_splits == std::vector<std::string>{"partition-0", "partition-1"});

    ExperimentConfig bad = load_experiment_config(write_config(dir.path(), "train_splits = train\ntest_split = test\n"));
    const std::string msg = error_of([&] { resolve_experiment_config(bad); });
    CHECK(contains(msg, "'train'"));
}

TEST_CASE("synth writes five partitions deterministically") {
    TempDir dir("cli-synth");
    write_word_corpus(dir / "words", 0, 126, 4);
    std::ostringstream log;
    SynthOptions o;
    o.clean_dir = dir / "words";
    o.out_dir = dir / "a";
    o.seed = 17;
    const Manifest m = load_manifest(cmd_synth(o, log));
    CHECK(m.splits.size() == 5);
    CHECK(m.total_pairs() == 630);
    for (int k = 0; k < 5; ++k) CHECK(m.split(partition_name(k)).size() == 126);

    o.out_dir = dir / "b";
    cmd_synth(o, log);
    fs::remove(dir / "a" / kManifestFile);
    fs::remove(dir / "b" / kManifestFile);
    CHECK(tree_contents(dir / "a") == tree_contents(dir / "b"));

    SUBCASE("single partition") {
        o.out_dir = dir / "one";
        o.partitions = 1;
        const Manifest one = load_manifest(cmd_synth(o, log));
        CHECK(one.splits.size() == 1);
        CHECK(one.split(partition_name(0)).size() == 126);
    }
    SUBCASE("bad arguments") {
        o.partitions = 0;
        CHECK_THROWS_AS(cmd_synth(o, log), ValidationError);
        o.partitions = 2;
        o.split_as = "test";
        CHECK_THROWS_AS(cmd_synth(o, log), ValidationError);
        o.partitions = 1;
        o.split_as = "holdout";
        CHECK_THROWS_AS(cmd_synth(o, log), ValidationError);
    }
}

TEST_CASE("train and evaluate every architecture") {
    TempDir dir("cli-train");
    std::ostringstream log;
    const fs::path conf = write_config(dir.path(),
                                       "name = all\n"
                                       "train_splits = partitions\n"
                                       "archs = simple_cnn, shallow, unet, generator\n"
                                       "epochs = 1\n"
                                       "repetitions = 3\n"
                                       "train_limit = 2\n"
                                       "validation_limit = 1\n");
    const auto runs = cmd_train(train_options(conf), log);
    CHECK(runs.size() == 12);
    const fs::path exp = dir / "runs" / "all";
    std::size_t run_dirs = 0;
    for (ArchName arch : kArchNames) {
        const auto found = find_run_dirs(exp, arch);
        CHECK(found.size() == 3);
        for (const fs::path& run : found) {
            CHECK(fs::exists(run / "best.ckpt"));
            CHECK(fs::exists(run / "curve.csv"));
        }
        run_dirs += found.size();
    }
    CHECK(run_dirs == 12);
    CHECK(fs::exists(exp / kResolvedConfigFile));
    CHECK(fs::exists(exp / kExperimentIndexFile));

    // existing experiment is refused without force
    {
        CHECK_THROWS_AS(cmd_train(train_options(conf), log), ValidationError);
    }

    // evaluation continues past a missing checkpoint
    {
        fs::remove(exp / "unet" / "rep-1" / "best.ckpt");
        EvaluateOptions eo;
        eo.experiment_dir = exp;
        eo.identity_baseline = true;
        const EvaluateResult r = cmd_evaluate(eo, log);
        CHECK(r.failed_runs == std::vector<std::string>{"unet/rep-1"});
        REQUIRE(r.rows.size() == 5);
        CHECK(r.rows[2].model == "unet");
        CHECK(r.rows[2].summary.n_runs == 2);
        CHECK(r.rows[0].summary.n_runs == 3);
        CHECK(r.rows[4].model == "identity");
        for (const char* f : {"summary.csv", "per_type.csv", "table.md"}) CHECK(fs::exists(r.out_dir / f));
        CHECK(parse_summary_csv(read_text_file(r.out_dir / "summary.csv")).size() == 5);
    }
}

TEST_CASE("rerunning from the resolved config reproduces the run") {
    TempDir dir("cli-rerun");
    std::ostringstream log;
    const fs::path conf = write_config(dir.path(),
                                       "name = small\n"
                                       "train_splits = partitions\n"
                                       "archs = simple_cnn\n"
                                       "epochs = 2\n"
                                       "run_seed = 5\n");
    cmd_train(train_options(conf), log);
    const fs::path exp = dir / "runs" / "small";
    const std::string first = file_bytes(exp / "simple_cnn" / "rep-0" / "best.ckpt");

    cmd_train(train_options(exp / kResolvedConfigFile, true), log);
    CHECK(file_bytes(exp / "simple_cnn" / "rep-0" / "best.ckpt") == first);

    // single run has zero spread
    {
        EvaluateOptions eo;
        eo.experiment_dir = exp;
        const EvaluateResult r = cmd_evaluate(eo, log);
        REQUIRE(r.rows.size() == 1);
        CHECK(r.rows[0].summary.n_runs == 1);
        CHECK(r.rows[0].summary.std_f1 == 0.0);
        CHECK(r.rows[0].summary.std_rmse == 0.0);

        const std::string md = cmd_report({exp, exp}, dir / "report", log);
        CHECK(contains(md, "simple_cnn"));
        CHECK(fs::exists(dir / "report" / "report.md"));
        CHECK(fs::exists(dir / "report" / "report.csv"));
    }

    // clean and mean-image
    {
        const fs::path input = fs::directory_iterator(shared().dir / "test_words")->path();
        const GrayImage original = load_png(input);
        cmd_clean(exp / "simple_cnn" / "rep-0" / "best.ckpt", input, dir / "clean.png", ArchName::simple_cnn, log);
        const GrayImage cleaned = load_png(dir / "clean.png");
        CHECK(cleaned.height() == original.height());
        CHECK(cleaned.width() == original.width());

        cmd_mean_image(exp, ArchName::simple_cnn, input, dir / "mean.png", log);
        CHECK(file_bytes(dir / "mean.png") == file_bytes(dir / "clean.png"));

        CHECK_THROWS_AS(cmd_clean(exp / "simple_cnn" / "rep-0" / "best.ckpt", input, dir / "x.png", ArchName::unet, log),
                        FormatError);
        CHECK_THROWS_AS(cmd_mean_image(exp, ArchName::unet, input, dir / "x.png", log), ValidationError);
    }
}

TEST_CASE("fetch") {
    TempDir dir("cli-fetch");
    std::ostringstream log;

    SUBCASE("unknown dataset lists the known ones") {
        FetchOptions o;
        o.dataset = "mnist";
        o.out_dir = dir / "out";
        const std::string msg = error_of([&] { cmd_fetch(o, log); });
        for (const KnownDataset& d : known_datasets()) CHECK(contains(msg, d.name));
    }

    SUBCASE("records without a published id need --record") {
        FetchOptions o;
        o.dataset = "dracula-real";
        o.out_dir = dir / "out";
        CHECK(contains(error_of([&] { cmd_fetch(o, log); }), "--record"));
    }

    SUBCASE("local mirror") {
        const fs::path png = dir / "word.png";
        save_png(constant_image(20, 40, 0.8f), png);
        const std::string bytes = file_bytes(png);
        const fs::path mirror = dir / "mirror";
        fs::create_directories(mirror / "records");
        write_stored_zip(mirror / "data.zip", {{"DraculaSynth/0/struck/w1.png", bytes},
                                              {"DraculaSynth/0/gt/w1.png", bytes},
                                              {"DraculaSynth/1/struck/w2.png", bytes},
                                              {"DraculaSynth/1/gt/w2.png", bytes}});
        auto write_record = [&](const std::string& checksum) {
            std::ofstream(mirror / "records" / "6406538")
                << R"({"files": [{"key": "data.zip", "checksum": "md5:)" << checksum
                << R"(", "links": {"self": "file://)" << (mirror / "data.zip").string() << R"("}}]})";
        };
        write_record(md5_hex(mirror / "data.zip"));

        FetchOptions o;
        o.dataset = "DraculaSynth";
        o.out_dir = dir / "out";
        o.api_base = "file://" + mirror.string();
        const FetchResult first = cmd_fetch(o, log);
        CHECK_FALSE(first.cache_hit);
        CHECK(first.manifest.split(partition_name(0)).size() == 1);
        CHECK(first.manifest.split(partition_name(1)).size() == 1);
        CHECK(fs::exists(dir / "out" / kManifestFile));

        const FetchResult second = cmd_fetch(o, log);
        CHECK(second.cache_hit);
        CHECK(second.manifest == first.manifest);

        o.out_dir = dir / "corrupt";
        write_record("00000000000000000000000000000000");
        CHECK_THROWS_AS(cmd_fetch(o, log), ChecksumError);

        o.out_dir = dir / "offline";
        o.api_base = "file://" + (dir / "missing").string();
        CHECK_THROWS_AS(cmd_fetch(o, log), NetworkError);
    }
}
