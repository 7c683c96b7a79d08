#pragma once

#include <destrike/imaging.hpp>
#include <destrike/nn/layers.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace destrike {

enum class ArchName : std::uint8_t { simple_cnn, shallow, unet, generator };

inline constexpr std::array<ArchName, 4> kArchNames = {ArchName::simple_cnn, ArchName::shallow,
                                                      ArchName::unet, ArchName::generator};

std::string_view to_string(ArchName arch) noexcept;
std::optional<ArchName> parse_arch(std::string_view name) noexcept;

enum class HeadActivation : std::uint8_t { sigmoid, identity };

/// Layer hyperparameters. The meaning of `channels` depends on the arch:
///   simple_cnn  widths of the stride-2 down chain; the up chain mirrors it
///   shallow     {first conv, second conv}
///   generator   {7x7 stem, first stride-2 conv, second stride-2 conv}
///   unet        {stem}
struct ModelConfig {
    ArchName arch = ArchName::shallow;
    int input_height = kFrameHeight;
    int input_width = kFrameWidth;
    std::vector<int> channels;
    int outer_kernel = 7;
    int growth_rate = 0;
    int dense_layers = 0;
    bool batch_norm = true;
    HeadActivation head = HeadActivation::sigmoid;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// The configurations whose parameter counts are reported for the four models
/// (28 065, 154 241, ~181 585, ~1 345 217).
ModelConfig reference_config(ArchName arch);

/// Throws ValidationError for structurally invalid configs.
void validate(const ModelConfig& config);

template <typename T>
class Network {
public:
    /// Builds, checks that the layer chain maps 1xHxW back to 1xHxW (ShapeError
    /// otherwise) and draws initial weights from init_seed.
    Network(ModelConfig config, std::uint64_t init_seed);

    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const ModelConfig& config() const noexcept { return config_; }
    std::uint64_t init_seed() const noexcept { return init_seed_; }
    ArchName arch() const noexcept { return config_.arch; }

    nn::Shape input_shape(int batch) const {
        return {batch, 1, config_.input_height, config_.input_width};
    }

    /// Head-activated output: probabilities for sigmoid heads, raw scores for unet.
    nn::Tensor<T> forward(const nn::Tensor<T>& batch, nn::Mode mode = nn::Mode::eval);
    /// Pre-activation output.
    nn::Tensor<T> logits(const nn::Tensor<T>& batch, nn::Mode mode);
    /// Backpropagates a gradient taken with respect to logits().
    void backward(const nn::Tensor<T>& grad_logits);

    std::vector<nn::Parameter<T>*> parameters();
    std::vector<nn::Parameter<T>*> buffers();
    std::size_t parameter_count();
    void zero_grad();

private:
    void check_batch(const nn::Tensor<T>& batch) const;

    ModelConfig config_;
    std::uint64_t init_seed_ = 0;
    std::unique_ptr<nn::Layer<T>> body_;
};

extern template class Network<float>;
extern template class Network<double>;

using Model = Network<float>;

/// Elementwise logistic function; exp is evaluated on -|x| only.
template <typename T>
T sigmoid(T x) noexcept {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
}

/// Probability map for a batch regardless of head type.
nn::Tensor<float> predict_probabilities(Model& model, const nn::Tensor<float>& batch);

// ---------------------------------------------------------------------------
// Checkpoints

struct CheckpointInfo {
    int epoch = 0;
    std::uint64_t run_seed = 0;
};

struct LoadedModel {
    Model model;
    CheckpointInfo info;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Single binary file: magic, version, JSON header (config, seeds, epoch,
/// tensor table), float32 payload, CRC-32 trailer.
void save_checkpoint(Model& model, const CheckpointInfo& info, const std::filesystem::path& path);

/// Throws FormatError for corrupt files or, when expected_arch is given,
/// for checkpoints of another architecture.
LoadedModel load_checkpoint(const std::filesystem::path& path,
                            std::optional<ArchName> expected_arch = std::nullopt);

}  // namespace destrike
