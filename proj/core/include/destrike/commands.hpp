#pragma once

#include <destrike/config.hpp>
#include <destrike/fetch.hpp>
#include <destrike/report.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace destrike {

// Library side of the command-line verbs. Each throws ValidationError for bad
// input and other destrike::Error types for runtime failures; progress goes
// to the given log stream.

struct SynthOptions {
    std::filesystem::path clean_dir;  // display-polarity PNG word images
    std::filesystem::path out_dir;
    int partitions = 5;
    std::uint64_t seed = 0;
    /// Writes a single partition under this split name (e.g. "test").
    std::optional<std::string> split_as;
    /// Manifest name; defaults to the existing manifest's name or the directory name.
    std::optional<std::string> name;
};

/// Writes <out>/<split>/{struck,clean,masks}/<id>.png and strokes.json for
/// every partition and rebuilds <out>/manifest.json. Partition k uses
/// derive_seed(seed, k). Returns the manifest path.
std::filesystem::path cmd_synth(const SynthOptions& options, std::ostream& log);

/// Writes builtin words [offset, offset + count) as display PNGs.
void cmd_render_words(const std::filesystem::path& out_dir, std::size_t offset, std::size_t count,
                      std::uint64_t seed, std::ostream& log);

struct TrainOptions {
    std::filesystem::path config;
    bool force = false;
    std::optional<std::string> profile;
    /// Overrides the config's parallel setting when set.
    std::optional<int> parallel;
};

struct TrainedRun {
    ArchName arch = ArchName::shallow;
    RunResult result;
};

/// Trains every arch x repetition into <output_dir>/<name>/<arch>/rep-<k>,
/// writes the resolved config and an experiment index. Refuses an existing
/// experiment directory unless force is set.
std::vector<TrainedRun> cmd_train(const TrainOptions& options, std::ostream& log);

struct EvaluateOptions {
    std::filesystem::path experiment_dir;
    /// Dataset root or manifest; defaults to the experiment's test dataset.
    std::optional<std::filesystem::path> dataset;
    std::optional<std::string> split;
    bool identity_baseline = false;
    /// Defaults to <experiment_dir>/eval.
    std::optional<std::filesystem::path> out_dir;
    std::size_t limit = 0;
};

struct EvaluateResult {
    std::vector<ReportRow> rows;
    /// Run directories whose checkpoint was missing or unreadable.
    std::vector<std::string> failed_runs;
    std::filesystem::path out_dir;
};

/// Scores every run's best checkpoint on the test split. Writes one per-image
/// CSV per run plus summary.csv, per_type.csv and table.md.
EvaluateResult cmd_evaluate(const EvaluateOptions& options, std::ostream& log);

void cmd_clean(const std::filesystem::path& checkpoint, const std::filesystem::path& input,
               const std::filesystem::path& output, std::optional<ArchName> expected, std::ostream& log);

/// Averages the cleaned outputs of every repetition of one arch.
void cmd_mean_image(const std::filesystem::path& experiment_dir, ArchName arch,
                    const std::filesystem::path& input, const std::filesystem::path& output, std::ostream& log);

FetchResult cmd_fetch(const FetchOptions& options, std::ostream& log);

/// Combines the evaluation summaries of several experiments into report.md
/// and report.csv under out_dir. Returns the markdown text.
std::string cmd_report(const std::vector<std::filesystem::path>& experiments,
                       const std::filesystem::path& out_dir, std::ostream& log);

/// Run directories <experiment>/<arch>/rep-<k> in arch then repetition order.
std::vector<std::filesystem::path> find_run_dirs(const std::filesystem::path& experiment_dir, ArchName arch);

}  // namespace destrike
