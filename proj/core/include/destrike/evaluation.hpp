#pragma once

#include <destrike/dataset.hpp>
#include <destrike/models.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace destrike {

struct ImageRecord {
    std::string id;
    std::optional<StrokeType> stroke_type;
    double f1 = 0.0;
    double rmse = 0.0;
};

struct TypeScore {
    double f1 = 0.0;
    double rmse = 0.0;
    std::size_t count = 0;
};

/// For a single run the means and (population) stds are over images; after
/// summarize_runs they are over per-run means.
struct MetricSummary {
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    std::size_t n_runs = 0;
    std::size_t n_images = 0;  // scored images, summed over runs
    std::map<StrokeType, TypeScore> per_type;
};

struct Evaluation {
    std::vector<ImageRecord> records;  // sorted by id
    MetricSummary summary;
};

/// Full inference path for one display-polarity image: invert, fit to the
/// frame, forward, sigmoid for logit heads, restore the original geometry.
GrayImage clean_image(Model& model, const GrayImage& struck);

/// Network outputs for preprocessed pairs, restored to original size in
/// display polarity. Batched forward passes in eval mode.
std::vector<GrayImage> clean_pairs(Model& model, std::span<const ImagePair> pairs, int batch_size = 8);

/// The struck originals, untouched: the cleaner that returns its input.
std::vector<GrayImage> identity_outputs(std::span<const ImagePair> pairs);

/// F1 of the independently Otsu-binarized output and ground truth, and RMSE
/// of the greyscale pair.
ImageRecord score_image(const std::string& id, std::optional<StrokeType> stroke_type,
                        const GrayImage& output, const GrayImage& truth);

/// outputs[i] belongs to pairs[i].
Evaluation evaluate_outputs(std::span<const ImagePair> pairs, std::span<const GrayImage> outputs);
Evaluation evaluate_model(Model& model, std::span<const ImagePair> pairs);
Evaluation evaluate_identity(std::span<const ImagePair> pairs);

/// Mean and population std of per-run means. Throws ValidationError when empty.
MetricSummary summarize_runs(std::span<const MetricSummary> runs);

/// Pixelwise mean of every checkpoint's cleaned output. Throws
/// ValidationError for an empty list or mixed architectures.
GrayImage mean_image(std::span<const std::filesystem::path> checkpoints, const GrayImage& struck);
GrayImage mean_image(std::span<Model* const> models, const GrayImage& struck);

}  // namespace destrike
