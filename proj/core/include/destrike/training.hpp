#pragma once

#include <destrike/dataset.hpp>
#include <destrike/models.hpp>
#include <destrike/optimizer.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace destrike {

struct TrainConfig {
    ModelConfig model = reference_config(ArchName::shallow);
    int epochs = 30;
    int batch_size = 4;
    AdamConfig adam;
    std::uint64_t run_seed = 0;
    int repetitions = 1;

    /// Dataset selection, used by the overloads that load their own data.
    std::filesystem::path manifest;
    std::vector<std::string> train_splits = {"train"};
    std::string validation_split = "validation";
    /// Caps on the number of pairs used (0 = all). Subsets are evenly spaced
    /// over the id-ordered split.
    std::size_t train_limit = 0;
    std::size_t validation_limit = 0;

    ArchName arch() const noexcept { return model.arch; }
};

/// Throws ValidationError listing every problem at once.
void validate(const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_f1 = 0.0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct RunResult {
    int repetition = 0;
    std::uint64_t run_seed = 0;
    int best_epoch = 0;
    double best_val_f1 = 0.0;
    std::filesystem::path checkpoint;
    std::vector<EpochRecord> curve;
};

/// Seed of repetition k under a parent run seed.
std::uint64_t repetition_seed(std::uint64_t run_seed, int repetition) noexcept;

/// Stacks the preprocessed struck (input) and clean (target) frames of the
/// selected pairs into batches.
struct Batch {
    nn::Tensor<float> input;
    nn::Tensor<float> target;
};
Batch make_batch(std::span<const ImagePair> pairs, std::span<const std::size_t> indices);

/// One pass over pairs in the given order (all of them, in index order, when
/// order is empty) in batches of batch_size, the last one possibly short.
/// One Adam step per batch. Returns the mean batch loss. Throws
/// ValidationError for an empty pair set.
double train_epoch(Model& model, Adam<float>& optimizer, std::span<const ImagePair> pairs, int batch_size,
                   std::span<const std::size_t> order = {});

/// Mean F1 of the restored, binarized outputs against the original-size ground truth.
double validate(Model& model, std::span<const ImagePair> pairs);

struct RunHooks {
    std::function<void(const EpochRecord&)> on_epoch;
};

/// Trains one model from config.run_seed, validating after every epoch and
/// writing best.ckpt whenever validation F1 strictly improves. Writes
/// curve.csv and config.json into run_dir.
RunResult train_run(const TrainConfig& config, std::span<const ImagePair> train,
                    std::span<const ImagePair> validation, const std::filesystem::path& run_dir,
                    const RunHooks& hooks = {});

/// Repetition k trains with repetition_seed(config.run_seed, k) into
/// experiment_dir/rep-<k>. Up to `parallel` repetitions run concurrently.
std::vector<RunResult> train_many(const TrainConfig& config, std::span<const ImagePair> train,
                                  std::span<const ImagePair> validation,
                                  const std::filesystem::path& experiment_dir, int parallel = 1,
                                  const std::function<void(int, const EpochRecord&)>& on_epoch = {});

/// Loads the configured train/validation splits, honouring the limits.
struct TrainingData {
    std::vector<ImagePair> train;
    std::vector<ImagePair> validation;
};
TrainingData load_training_data(const TrainConfig& config);

/// Evenly spaced subset of at most `limit` entries (all when limit is 0).
Split limit_split(const Split& split, std::size_t limit);

void write_curve_csv(const std::vector<EpochRecord>& curve, const std::filesystem::path& file);
std::vector<EpochRecord> read_curve_csv(const std::filesystem::path& file);

}  // namespace destrike
