#include <destrike/commands.hpp>

#include <destrike/dataset.hpp>
#include <destrike/errors.hpp>
#include <destrike/evaluation.hpp>
#include <destrike/imaging.hpp>
#include <destrike/rng.hpp>
#include <destrike/strokegen.hpp>
#include <destrike/word_corpus.hpp>

#include "json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <sstream>

namespace destrike {

namespace fs = std::filesystem;
using detail::json;

namespace {

std::vector<CleanWord> load_clean_words(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("clean image directory does not exist: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no PNG images in " + dir.string());
    std::vector<CleanWord> words;
    words.reserve(files.size());
    for (const fs::path& f : files) words.push_back({f.stem().string(), invert(load_png(f))});
    return words;
}

void write_partition(const std::vector<SyntheticPair>& pairs, std::uint64_t seed, const fs::path& dir) {
    for (const char* sub : {"struck", "clean", "masks"}) {
        fs::remove_all(dir / sub);
        fs::create_directories(dir / sub);
    }
    std::vector<StrokeSpec> specs;
    specs.reserve(pairs.size());
    for (const SyntheticPair& p : pairs) {
        save_png(invert(p.struck), dir / "struck" / (p.id + ".png"));
        save_png(invert(p.clean), dir / "clean" / (p.id + ".png"));
        save_mask_png(p.mask, dir / "masks" / (p.id + ".png"));
        specs.push_back(p.spec);
    }
    detail::write_json_file(detail::strokes_document(specs, seed), dir / kStrokesFile);
}

ExperimentConfig load_resolved_config(const fs::path& experiment) {
    const fs::path file = experiment / kResolvedConfigFile;
    if (!fs::exists(file)) throw ValidationError("not an experiment directory (no " + file.string() + ")");
    return load_experiment_config(file);
}

std::vector<ImagePair> load_test_pairs(const fs::path& dataset, const std::string& split, std::size_t limit) {
    const Manifest manifest = load_manifest(manifest_file(dataset));
    if (!manifest.has_split(split)) {
        throw ValidationError("dataset " + manifest.name + " has no split '" + split + "'");
    }
    return load_pairs(limit_split(manifest.split(split), limit), manifest.root);
}

}  // namespace

fs::path cmd_synth(const SynthOptions& o, std::ostream& log) {
    std::vector<std::string> problems;
    if (o.partitions < 1) problems.emplace_back("partitions must be at least 1");
    if (o.split_as) {
        if (o.partitions != 1) problems.emplace_back("--as needs exactly one partition");
        if (!is_valid_split_name(*o.split_as)) problems.push_back("'" + *o.split_as + "' is not a split name");
    } else if (o.partitions > 5) {
        problems.emplace_back("at most 5 partitions (partition-0 .. partition-4)");
    }
    if (!problems.empty()) {
        std::string msg = "invalid synth options:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }

    const std::vector<CleanWord> words = load_clean_words(o.clean_dir);
    fs::create_directories(o.out_dir);
    for (int k = 0; k < o.partitions; ++k) {
        const std::string split = o.split_as ? *o.split_as : partition_name(k);
        const std::uint64_t seed = derive_seed(o.seed, static_cast<std::uint64_t>(k));
        write_partition(generate_partition(words, seed), seed, o.out_dir / split);
        log << "synth: " << split << ": " << words.size() << " pairs\n";
    }

    const fs::path manifest_path = o.out_dir / kManifestFile;
    std::optional<std::string> name = o.name;
    if (!name && fs::exists(manifest_path)) name = load_manifest(manifest_path).name;
    save_manifest(build_manifest(o.out_dir, name), manifest_path);
    return manifest_path;
}

void cmd_render_words(const fs::path& out_dir, std::size_t offset, std::size_t count, std::uint64_t seed,
                      std::ostream& log) {
    write_word_corpus(out_dir, offset, count, seed);
    log << "render-words: wrote " << count << " images to " << out_dir.string() << '\n';
}

std::vector<fs::path> find_run_dirs(const fs::path& experiment, ArchName arch) {
    std::vector<std::pair<int, fs::path>> runs;
    const fs::path arch_dir = experiment / std::string(to_string(arch));
    if (!fs::is_directory(arch_dir)) return {};
    for (const auto& e : fs::directory_iterator(arch_dir)) {
        const std::string name = e.path().filename().string();
        int k = 0;
        char tail = 0;
        if (e.is_directory() && std::sscanf(name.c_str(), "rep-%d%c", &k, &tail) == 1 && k >= 0) {
            runs.emplace_back(k, e.path());
        }
    }
    std::sort(runs.begin(), runs.end());
    std::vector<fs::path> out;
    for (auto& r : runs) out.push_back(std::move(r.second));
    return out;
}

std::vector<TrainedRun> cmd_train(const TrainOptions& o, std::ostream& log) {
    ExperimentConfig config = load_experiment_config(o.config);
    if (o.profile) apply_profile(config, *o.profile);
    if (o.parallel) {
        if (*o.parallel < 1) throw ValidationError("parallel must be at least 1");
        config.parallel = *o.parallel;
    }
    resolve_experiment_config(config);

    const fs::path dir = experiment_dir(config);
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        if (!o.force) throw ValidationError("experiment directory exists: " + dir.string() + " (use --force to overwrite)");
        fs::remove_all(dir);
    }
    fs::create_directories(dir);
    write_text_file(serialize_experiment_config(config), dir / kResolvedConfigFile);

    std::mutex log_mutex;
    std::vector<TrainedRun> runs;
    std::optional<TrainingData> data;
    for (ArchName arch : config.archs) {
        const TrainConfig t = train_config_for(config, arch);
        validate(t);
        if (!data) data = load_training_data(t);
        log << "train: " << to_string(arch) << ": " << data->train.size() << " train / "
            << data->validation.size() << " validation pairs, " << t.repetitions << " repetition(s)\n";
        const auto on_epoch = [&](int k, const EpochRecord& r) {
            const std::lock_guard lock(log_mutex);
            char line[160];
            std::snprintf(line, sizeof line, "train: %s rep-%d epoch %d loss %.5f val_f1 %.4f\n",
                          std::string(to_string(arch)).c_str(), k, r.epoch, r.train_loss, r.val_f1);
            log << line << std::flush;
        };
        for (RunResult& r : train_many(t, data->train, data->validation, dir / std::string(to_string(arch)),
                                       config.parallel, on_epoch)) {
            runs.push_back({arch, std::move(r)});
        }
    }

    json index = {{"name", config.name}, {"config", kResolvedConfigFile}, {"runs", json::array()}};
    for (const TrainedRun& r : runs) {
        index["runs"].push_back({{"arch", to_string(r.arch)},
                                 {"repetition", r.result.repetition},
                                 {"run_seed", r.result.run_seed},
                                 {"best_epoch", r.result.best_epoch},
                                 {"best_val_f1", r.result.best_val_f1},
                                 {"checkpoint", fs::relative(r.result.checkpoint, dir).generic_string()}});
    }
    detail::write_json_file(index, dir / kExperimentIndexFile);
    return runs;
}

EvaluateResult cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
    const ExperimentConfig config = load_resolved_config(o.experiment_dir);
    const fs::path dataset = o.dataset ? *o.dataset : (config.test_dataset.empty() ? config.dataset : config.test_dataset);
    const std::string split = o.split.value_or(config.test_split);
    const std::vector<ImagePair> pairs = load_test_pairs(dataset, split, o.limit);
    log << "evaluate: " << pairs.size() << " pairs from split '" << split << "'\n";

    EvaluateResult result;
    result.out_dir = o.out_dir.value_or(o.experiment_dir / "eval");
    fs::create_directories(result.out_dir);

    for (ArchName arch : config.archs) {
        const std::string arch_name(to_string(arch));
        std::vector<MetricSummary> summaries;
        const auto run_dirs = find_run_dirs(o.experiment_dir, arch);
        if (run_dirs.empty()) {
            log << "evaluate: " << arch_name << ": no runs found\n";
            result.failed_runs.push_back(arch_name);
        }
        for (const fs::path& run : run_dirs) {
            const std::string label = arch_name + "/" + run.filename().string();
            try {
                LoadedModel loaded = load_checkpoint(run / "best.ckpt", arch);
                const Evaluation eval = evaluate_model(loaded.model, pairs);
                write_text_file(per_image_csv(eval.records), result.out_dir / arch_name / (run.filename().string() + ".csv"));
                summaries.push_back(eval.summary);
                log << "evaluate: " << label << " f1 " << eval.summary.mean_f1 << " rmse " << eval.summary.mean_rmse << '\n';
            } catch (const Error& e) {
                log << "evaluate: " << label << ": skipped: " << e.what() << '\n';
                result.failed_runs.push_back(label);
            }
        }
        if (!summaries.empty()) result.rows.push_back({arch_name, summarize_runs(summaries)});
    }
    if (o.identity_baseline) {
        const Evaluation eval = evaluate_identity(pairs);
        write_text_file(per_image_csv(eval.records), result.out_dir / "identity.csv");
        result.rows.push_back({"identity", eval.summary});
    }
    if (result.rows.empty()) throw IoError("no run could be evaluated in " + o.experiment_dir.string());

    write_text_file(summary_csv(result.rows), result.out_dir / "summary.csv");
    write_text_file(per_type_csv(result.rows), result.out_dir / "per_type.csv");
    std::string table = format_table(result.rows, config.name);
    if (const std::string types = format_type_table(result.rows); !types.empty()) table += "\n" + types;
    write_text_file(table, result.out_dir / "table.md");
    return result;
}

void cmd_clean(const fs::path& checkpoint, const fs::path& input, const fs::path& output,
               std::optional<ArchName> expected, std::ostream& log) {
    LoadedModel loaded = load_checkpoint(checkpoint, expected);
    save_png(clean_image(loaded.model, load_png(input)), output);
    log << "clean: wrote " << output.string() << '\n';
}

void cmd_mean_image(const fs::path& experiment, ArchName arch, const fs::path& input, const fs::path& output,
                    std::ostream& log) {
    std::vector<fs::path> checkpoints;
    for (const fs::path& run : find_run_dirs(experiment, arch)) {
        if (fs::exists(run / "best.ckpt")) checkpoints.push_back(run / "best.ckpt");
    }
    if (checkpoints.empty()) {
        throw ValidationError("no " + std::string(to_string(arch)) + " checkpoints in " + experiment.string());
    }
    save_png(mean_image(checkpoints, load_png(input)), output);
    log << "mean-image: averaged " << checkpoints.size() << " runs into " << output.string() << '\n';
}

FetchResult cmd_fetch(const FetchOptions& o, std::ostream& log) {
    FetchResult r = fetch_dataset(o);
    log << "fetch: " << r.manifest.name << " at " << r.root.string() << (r.cache_hit ? " (cached)" : "") << '\n';
    log << r.counts.to_string();
    return r;
}

std::string cmd_report(const std::vector<fs::path>& experiments, const fs::path& out_dir, std::ostream& log) {
    if (experiments.empty()) throw ValidationError("report needs at least one experiment directory");
    std::string markdown;
    std::string csv;
    for (const fs::path& exp : experiments) {
        const fs::path summary = exp / "eval" / "summary.csv";
        if (!fs::exists(summary)) throw ValidationError("no evaluation summary at " + summary.string());
        const auto rows = parse_summary_csv(read_text_file(summary));
        std::string name = exp.filename().string();
        if (name.empty()) name = exp.parent_path().filename().string();
        if (fs::exists(exp / kResolvedConfigFile)) name = load_resolved_config(exp).name;

        markdown += (markdown.empty() ? "" : "\n") + format_table(rows, name);
        std::istringstream lines(summary_csv(rows));
        std::string line;
        bool header = true;
        while (std::getline(lines, line)) {
            if (header) {
                if (csv.empty()) csv = "experiment," + line + "\n";
                header = false;
                continue;
            }
            if (!line.empty()) csv += name + "," + line + "\n";
        }
    }
    fs::create_directories(out_dir);
    write_text_file(markdown, out_dir / "report.md");
    write_text_file(csv, out_dir / "report.csv");
    log << "report: wrote " << (out_dir / "report.md").string() << '\n';
    return markdown;
}

}  // namespace destrike
