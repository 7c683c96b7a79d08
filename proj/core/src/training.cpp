#include <destrike/training.hpp>

#include <destrike/errors.hpp>
#include <destrike/evaluation.hpp>
#include <destrike/loss.hpp>

#include "json_io.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace destrike {

namespace fs = std::filesystem;
using detail::json;

namespace {

json run_config_json(const TrainConfig& c, int repetition, std::uint64_t run_seed, std::uint64_t init_seed) {
    return json{{"model", detail::to_json(c.model)},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"adam",
                 {{"learning_rate", c.adam.learning_rate},
                  {"beta1", c.adam.beta1},
                  {"beta2", c.adam.beta2},
                  {"epsilon", c.adam.epsilon}}},
                {"repetition", repetition},
                {"run_seed", run_seed},
                {"init_seed", init_seed},
                {"manifest", c.manifest.string()},
                {"train_splits", c.train_splits},
                {"validation_split", c.validation_split},
                {"train_limit", c.train_limit},
                {"validation_limit", c.validation_limit}};
}

std::uint64_t init_seed_of(std::uint64_t run_seed) { return derive_seed(run_seed, "init"); }

std::uint64_t shuffle_seed_of(std::uint64_t run_seed, int epoch) {
    return derive_seed(derive_seed(run_seed, "shuffle"), static_cast<std::uint64_t>(epoch));
}

}  // namespace

void validate(const TrainConfig& c) {
    std::vector<std::string> problems;
    try {
        validate(c.model);
    } catch (const ValidationError& e) {
        problems.emplace_back(e.what());
    }
    if (c.epochs < 1) problems.emplace_back("epochs must be >= 1");
    if (c.batch_size < 1) problems.emplace_back("batch_size must be >= 1");
    if (c.repetitions < 1) problems.emplace_back("repetitions must be >= 1");
    const AdamConfig& a = c.adam;
    if (!(a.learning_rate >= 0.0) || !std::isfinite(a.learning_rate)) {
        problems.emplace_back("learning_rate must be finite and non-negative");
    }
    if (!(a.beta1 > 0.0 && a.beta1 < 1.0)) problems.emplace_back("beta1 must lie in (0, 1)");
    if (!(a.beta2 > 0.0 && a.beta2 < 1.0)) problems.emplace_back("beta2 must lie in (0, 1)");
    if (!(a.epsilon > 0.0)) problems.emplace_back("epsilon must be positive");
    if (problems.empty()) return;
    std::string msg = "invalid training config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
}

std::uint64_t repetition_seed(std::uint64_t run_seed, int repetition) noexcept {
    return derive_seed(run_seed, static_cast<std::uint64_t>(repetition));
}

Batch make_batch(std::span<const ImagePair> pairs, std::span<const std::size_t> indices) {
    const nn::Shape shape{static_cast<int>(indices.size()), 1, kFrameHeight, kFrameWidth};
    Batch b{nn::Tensor<float>(shape), nn::Tensor<float>(shape)};
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const ImagePair& p = pairs[indices[k]];
        if (p.struck.height() != kFrameHeight || p.struck.width() != kFrameWidth || !p.clean.same_shape(p.struck)) {
            throw ShapeError("pair " + p.id + " is not preprocessed to 128x512");
        }
        std::copy(p.struck.pixels().begin(), p.struck.pixels().end(), b.input.image(static_cast<int>(k)));
        std::copy(p.clean.pixels().begin(), p.clean.pixels().end(), b.target.image(static_cast<int>(k)));
    }
    return b;
}

double train_epoch(Model& model, Adam<float>& optimizer, std::span<const ImagePair> pairs, int batch_size,
                   std::span<const std::size_t> order) {
    if (pairs.empty()) throw ValidationError("train_epoch: no training pairs");
    if (batch_size < 1) throw ValidationError("train_epoch: batch_size must be >= 1");
    std::vector<std::size_t> identity;
    if (order.empty()) {
        identity.resize(pairs.size());
        std::iota(identity.begin(), identity.end(), std::size_t{0});
        order = identity;
    }
    const bool from_logits = model.config().head == HeadActivation::identity;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        const Batch batch = make_batch(pairs, order.subspan(start, end - start));

        optimizer.zero_grad();
        const nn::Tensor<float> z = model.logits(batch.input, nn::Mode::train);
        if (from_logits) {
            loss_sum += bce_loss(z, batch.target, true);
        } else {
            nn::Tensor<float> p = z;
            for (float& v : p.values()) v = sigmoid(v);
            loss_sum += bce_loss(p, batch.target, false);
        }
        model.backward(bce_logit_gradient(z, batch.target));
        optimizer.step();
        ++batches;
    }
    return loss_sum / static_cast<double>(batches);
}

double validate(Model& model, std::span<const ImagePair> pairs) {
    if (pairs.empty()) throw ValidationError("validate: no validation pairs");
    return evaluate_model(model, pairs).summary.mean_f1;
}

namespace {

RunResult run_repetition(const TrainConfig& config, std::span<const ImagePair> train,
                         std::span<const ImagePair> validation, const fs::path& run_dir, const RunHooks& hooks,
                         int repetition) {
    validate(config);
    if (train.empty()) throw ValidationError("train_run: no training pairs");
    if (validation.empty()) throw ValidationError("train_run: no validation pairs");
    fs::create_directories(run_dir);

    RunResult result;
    result.repetition = repetition;
    result.run_seed = config.run_seed;
    result.checkpoint = run_dir / "best.ckpt";
    const std::uint64_t init_seed = init_seed_of(config.run_seed);
    detail::write_json_file(run_config_json(config, repetition, config.run_seed, init_seed), run_dir / "config.json");

    Model model(config.model, init_seed);
    Adam<float> optimizer(model.parameters(), config.adam);
    std::vector<std::size_t> order(train.size());
    double best = -std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_in_place(order, shuffle_seed_of(config.run_seed, epoch));
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_epoch(model, optimizer, train, config.batch_size, order);
        rec.val_f1 = validate(model, validation);
        result.curve.push_back(rec);
        if (rec.val_f1 > best) {
            best = rec.val_f1;
            result.best_epoch = epoch;
            result.best_val_f1 = rec.val_f1;
            save_checkpoint(model, {epoch, config.run_seed}, result.checkpoint);
        }
        write_curve_csv(result.curve, run_dir / "curve.csv");
        if (hooks.on_epoch) hooks.on_epoch(rec);
    }
    return result;
}

}  // namespace

RunResult train_run(const TrainConfig& config, std::span<const ImagePair> train,
                    std::span<const ImagePair> validation, const fs::path& run_dir, const RunHooks& hooks) {
    return run_repetition(config, train, validation, run_dir, hooks, 0);
}

std::vector<RunResult> train_many(const TrainConfig& config, std::span<const ImagePair> train,
                                  std::span<const ImagePair> validation, const fs::path& experiment_dir,
                                  int parallel, const std::function<void(int, const EpochRecord&)>& on_epoch) {
    validate(config);
    const int reps = config.repetitions;
    std::vector<RunResult> results(static_cast<std::size_t>(reps));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
    std::mutex hook_mutex;

    const auto run_one = [&](int k) {
        TrainConfig rc = config;
        rc.run_seed = repetition_seed(config.run_seed, k);
        RunHooks hooks;
        if (on_epoch) {
            hooks.on_epoch = [&, k](const EpochRecord& r) {
                const std::lock_guard lock(hook_mutex);
                on_epoch(k, r);
            };
        }
        const fs::path dir = experiment_dir / ("rep-" + std::to_string(k));
        results[static_cast<std::size_t>(k)] = run_repetition(rc, train, validation, dir, hooks, k);
    };

    const int workers = std::clamp(parallel, 1, reps);
    if (workers == 1) {
        for (int k = 0; k < reps; ++k) run_one(k);
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int k = next++; k < reps; k = next++) {
                try {
                    run_one(k);
                } catch (...) {
                    errors[static_cast<std::size_t>(k)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

Split limit_split(const Split& split, std::size_t limit) {
    if (limit == 0 || limit >= split.size()) return split;
    Split out;
    out.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) out.push_back(split[i * split.size() / limit]);
    return out;
}

TrainingData load_training_data(const TrainConfig& config) {
    const Manifest manifest = load_manifest(config.manifest);
    const Split train = limit_split(aggregate_partitions(manifest, config.train_splits), config.train_limit);
    const Split val = limit_split(aggregate_partitions(manifest, {config.validation_split}), config.validation_limit);
    return {load_pairs(train, manifest.root), load_pairs(val, manifest.root)};
}

void write_curve_csv(const std::vector<EpochRecord>& curve, const fs::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << "epoch,train_loss,val_f1\n";
    char line[96];
    for (const EpochRecord& r : curve) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_f1);
        out << line;
    }
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<EpochRecord> read_curve_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::string line;
    std::getline(in, line);
    if (line != "epoch,train_loss,val_f1") throw FormatError("unexpected curve header in " + file.string());
    std::vector<EpochRecord> curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        EpochRecord r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &r.epoch, &r.train_loss, &r.val_f1) != 3) {
            throw FormatError("bad curve row '" + line + "' in " + file.string());
        }
        curve.push_back(r);
    }
    return curve;
}

}  // namespace destrike
