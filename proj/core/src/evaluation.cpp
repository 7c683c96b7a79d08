#include <destrike/evaluation.hpp>

#include <destrike/errors.hpp>
#include <destrike/metrics.hpp>

#include <algorithm>

namespace destrike {

namespace fs = std::filesystem;

namespace {

GrayImage frame_from(const nn::Tensor<float>& y, int n) {
    const float* src = y.image(n);
    std::vector<float> px(src, src + y.shape().plane());
    for (float& v : px) v = std::clamp(v, 0.0f, 1.0f);
    return GrayImage(kFrameHeight, kFrameWidth, Polarity::inverted, std::move(px));
}

void append_frame(nn::Tensor<float>& batch, int n, const GrayImage& img) {
    if (img.height() != kFrameHeight || img.width() != kFrameWidth) {
        throw ShapeError("expected a 128x512 frame, got " + std::to_string(img.height()) + "x" +
                         std::to_string(img.width()));
    }
    std::copy(img.pixels().begin(), img.pixels().end(), batch.image(n));
}

void accumulate(GrayImage& acc_img, std::vector<double>& acc, const GrayImage& out) {
    if (acc.empty()) {
        acc.assign(out.size(), 0.0);
        acc_img = out;
    }
    const auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) acc[i] += px[i];
}

GrayImage finish_mean(GrayImage img, const std::vector<double>& acc, std::size_t count) {
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = std::clamp(static_cast<float>(acc[i] / static_cast<double>(count)), 0.0f, 1.0f);
    }
    return img;
}

}  // namespace

GrayImage clean_image(Model& model, const GrayImage& struck) {
    const GrayImage input = struck.polarity() == Polarity::display ? invert(struck) : struck;
    const Preprocessed pre = preprocess(input);
    nn::Tensor<float> batch(model.input_shape(1));
    append_frame(batch, 0, pre.image);
    const nn::Tensor<float> y = predict_probabilities(model, batch);
    return postprocess(frame_from(y, 0), pre.meta);
}

std::vector<GrayImage> clean_pairs(Model& model, std::span<const ImagePair> pairs, int batch_size) {
    if (batch_size < 1) throw ValidationError("batch size must be positive");
    std::vector<GrayImage> out;
    out.reserve(pairs.size());
    for (std::size_t start = 0; start < pairs.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(pairs.size(), start + static_cast<std::size_t>(batch_size));
        nn::Tensor<float> batch(model.input_shape(static_cast<int>(end - start)));
        for (std::size_t i = start; i < end; ++i) append_frame(batch, static_cast<int>(i - start), pairs[i].struck);
        const nn::Tensor<float> y = predict_probabilities(model, batch);
        for (std::size_t i = start; i < end; ++i) {
            out.push_back(postprocess(frame_from(y, static_cast<int>(i - start)), pairs[i].meta));
        }
    }
    return out;
}

std::vector<GrayImage> identity_outputs(std::span<const ImagePair> pairs) {
    std::vector<GrayImage> out;
    out.reserve(pairs.size());
    for (const ImagePair& p : pairs) out.push_back(p.struck_original);
    return out;
}

ImageRecord score_image(const std::string& id, std::optional<StrokeType> stroke_type, const GrayImage& output,
                        const GrayImage& truth) {
    ImageRecord r;
    r.id = id;
    r.stroke_type = stroke_type;
    r.f1 = f1_score(pixel_counts(otsu_binarize(output), otsu_binarize(truth)));
    r.rmse = rmse(output, truth);
    return r;
}

Evaluation evaluate_outputs(std::span<const ImagePair> pairs, std::span<const GrayImage> outputs) {
    if (pairs.size() != outputs.size()) {
        throw ValidationError("evaluate: " + std::to_string(outputs.size()) + " outputs for " +
                              std::to_string(pairs.size()) + " pairs");
    }
    Evaluation ev;
    ev.records.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        ev.records.push_back(score_image(pairs[i].id, pairs[i].stroke_type, outputs[i], pairs[i].clean_original));
    }
    std::sort(ev.records.begin(), ev.records.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });

    std::vector<double> f1s;
    std::vector<double> rmses;
    std::map<StrokeType, std::pair<std::vector<double>, std::vector<double>>> by_type;
    for (const ImageRecord& r : ev.records) {
        f1s.push_back(r.f1);
        rmses.push_back(r.rmse);
        if (r.stroke_type) {
            by_type[*r.stroke_type].first.push_back(r.f1);
            by_type[*r.stroke_type].second.push_back(r.rmse);
        }
    }
    MetricSummary& s = ev.summary;
    s.mean_f1 = mean(f1s);
    s.std_f1 = stddev(f1s);
    s.mean_rmse = mean(rmses);
    s.std_rmse = stddev(rmses);
    s.n_runs = 1;
    s.n_images = ev.records.size();
    for (const auto& [type, scores] : by_type) {
        s.per_type[type] = {mean(scores.first), mean(scores.second), scores.first.size()};
    }
    return ev;
}

Evaluation evaluate_model(Model& model, std::span<const ImagePair> pairs) {
    const std::vector<GrayImage> outputs = clean_pairs(model, pairs);
    return evaluate_outputs(pairs, outputs);
}

Evaluation evaluate_identity(std::span<const ImagePair> pairs) {
    const std::vector<GrayImage> outputs = identity_outputs(pairs);
    return evaluate_outputs(pairs, outputs);
}

MetricSummary summarize_runs(std::span<const MetricSummary> runs) {
    if (runs.empty()) throw ValidationError("summarize_runs: no runs");
    std::vector<double> f1s;
    std::vector<double> rmses;
    std::map<StrokeType, std::pair<std::vector<double>, std::vector<double>>> by_type;
    std::map<StrokeType, std::size_t> type_counts;
    MetricSummary s;
    for (const MetricSummary& r : runs) {
        f1s.push_back(r.mean_f1);
        rmses.push_back(r.mean_rmse);
        s.n_images += r.n_images;
        for (const auto& [type, score] : r.per_type) {
            by_type[type].first.push_back(score.f1);
            by_type[type].second.push_back(score.rmse);
            type_counts[type] += score.count;
        }
    }
    s.mean_f1 = mean(f1s);
    s.std_f1 = stddev(f1s);
    s.mean_rmse = mean(rmses);
    s.std_rmse = stddev(rmses);
    s.n_runs = runs.size();
    for (const auto& [type, scores] : by_type) {
        s.per_type[type] = {mean(scores.first), mean(scores.second), type_counts[type]};
    }
    return s;
}

GrayImage mean_image(std::span<const fs::path> checkpoints, const GrayImage& struck) {
    if (checkpoints.empty()) throw ValidationError("mean_image: no checkpoints");
    std::optional<ArchName> arch;
    GrayImage img;
    std::vector<double> acc;
    for (const fs::path& path : checkpoints) {
        LoadedModel loaded = load_checkpoint(path);
        if (arch && *arch != loaded.model.arch()) {
            throw ValidationError("mean_image: " + path.string() + " holds a " +
                                  std::string(to_string(loaded.model.arch())) + " model, expected " +
                                  std::string(to_string(*arch)));
        }
        arch = loaded.model.arch();
        accumulate(img, acc, clean_image(loaded.model, struck));
    }
    return finish_mean(std::move(img), acc, checkpoints.size());
}

GrayImage mean_image(std::span<Model* const> models, const GrayImage& struck) {
    if (models.empty()) throw ValidationError("mean_image: no models");
    GrayImage img;
    std::vector<double> acc;
    for (Model* m : models) {
        if (m->arch() != models.front()->arch()) {
            throw ValidationError("mean_image: mixed architectures " + std::string(to_string(m->arch())) +
                                  " and " + std::string(to_string(models.front()->arch())));
        }
        accumulate(img, acc, clean_image(*m, struck));
    }
    return finish_mean(std::move(img), acc, models.size());
}

}  // namespace destrike
