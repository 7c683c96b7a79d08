#pragma once

#include <destrike/models.hpp>
#include <destrike/optimizer.hpp>
#include <destrike/training.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace destrike {

/// Flat `key = value` experiment description. Lines starting with '#' and
/// trailing '# ...' are comments. Relative paths resolve against the
/// directory of the config file.
///
///   name              experiment directory name under output_dir
///   dataset           dataset root or manifest.json used for training
///   train_splits      comma list; "partitions" selects every partition-N
///   validation_split  split of `dataset` used for best-epoch selection
///   test_dataset      dataset used by `evaluate` (defaults to dataset)
///   test_split
///   archs             comma list of simple_cnn, shallow, unet, generator
///   epochs, batch_size, learning_rate, beta1, beta2, epsilon
///   repetitions, run_seed, parallel
///   train_limit, validation_limit   0 = use every pair
///   output_dir
///   profile           optional; "desk" caps corpus size and selects shallow
struct ExperimentConfig {
    std::string name = "experiment";
    std::filesystem::path dataset;
    std::vector<std::string> train_splits = {"train"};
    std::string validation_split = "validation";
    std::filesystem::path test_dataset;
    std::string test_split = "test";
    std::vector<ArchName> archs = {ArchName::shallow};
    int epochs = 30;
    int batch_size = 4;
    AdamConfig adam;
    int repetitions = 1;
    std::uint64_t run_seed = 0;
    int parallel = 1;
    std::size_t train_limit = 0;
    std::size_t validation_limit = 0;
    std::filesystem::path output_dir = "runs";
    std::optional<std::string> profile;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline constexpr const char* kResolvedConfigFile = "experiment.conf";
inline constexpr const char* kExperimentIndexFile = "experiment.json";

/// Collects every syntax and value problem and throws one ValidationError.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

/// Every key with its value, paths absolute. Parsing the result yields an
/// equal config.
std::string serialize_experiment_config(const ExperimentConfig& config);

/// Applies a named profile ("desk"). Throws ValidationError for unknown names.
void apply_profile(ExperimentConfig& config, std::string_view profile);

/// Checks that referenced datasets and splits exist and expands
/// "partitions". Throws ValidationError listing every problem.
void resolve_experiment_config(ExperimentConfig& config);

std::filesystem::path manifest_file(const std::filesystem::path& dataset);
std::filesystem::path experiment_dir(const ExperimentConfig& config);
TrainConfig train_config_for(const ExperimentConfig& config, ArchName arch);

}  // namespace destrike
